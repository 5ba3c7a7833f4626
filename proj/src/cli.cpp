#include "oiqa/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "oiqa/csv.hpp"
#include "oiqa/distortion.hpp"
#include "oiqa/eval.hpp"
#include "oiqa/fr_metrics.hpp"
#include "oiqa/oiqand.hpp"
#include "oiqa/raster.hpp"
#include "oiqa/sphere_geometry.hpp"
#include "oiqa/subjective.hpp"

namespace fs = std::filesystem;

namespace oiqa::cli {

namespace {

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

// Flat key=value config file. Each key maps to a long option of the chosen
// subcommand; explicit command-line flags win. '#' starts a comment.
std::vector<std::string> inject_config(std::vector<std::string> args) {
    std::string path;
    for (size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") path = args[i + 1];
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r'))
            line.pop_back();
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(path + ":" + std::to_string(line_no) +
                        ": expected key=value");
        const std::string flag = "--" + line.substr(0, eq);
        bool given = false;
        for (const auto& a : args)
            given |= a == flag || a.rfind(flag + "=", 0) == 0;
        if (!given) {
            args.push_back(flag);
            args.push_back(line.substr(eq + 1));
        }
    }
    return args;
}

std::vector<int> parse_lenses(const std::string& s) {
    std::vector<int> out;
    std::string cur;
    for (char ch : s + ";") {
        if (ch == ';') {
            if (!cur.empty()) out.push_back(static_cast<int>(parse_int(cur, "lenses")));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    return out;
}

std::string lens_tag(const std::vector<int>& lenses) {
    std::string s = "L";
    for (size_t i = 0; i < lenses.size(); ++i)
        s += (i ? "-" : "") + std::to_string(lenses[i]);
    return s;
}

void apply_triple(const std::string& opt, const std::string& name, double out[3]) {
    if (opt.empty()) return;
    std::vector<double> vals;
    std::string cur;
    for (char ch : opt + ",") {
        if (ch == ',') {
            vals.push_back(parse_num(cur, name));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (vals.size() != 3) throw Error(name + ": expected three comma-separated values");
    for (int i = 0; i < 3; ++i) out[i] = vals[i];
}

struct DistortRow {
    std::string src_path, kind, lenses_str;
    int level = 0;
    uint64_t seed = 0;
    double mos = 0.0;
    bool has_mos = false;
    std::string out_path;  // filled after writing
};

std::vector<DistortRow> read_distort_manifest(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int cp = t.require_column("src_path");
    const int ck = t.require_column("kind");
    const int cl = t.require_column("level");
    const int cn = t.require_column("lenses");
    const int cs = t.require_column("seed");
    const int cm = t.column("mos");

    std::vector<DistortRow> rows;
    for (const auto& r : t.rows) {
        DistortRow row;
        row.src_path = r[cp];
        row.kind = r[ck];
        row.level = static_cast<int>(parse_int(r[cl], path));
        row.lenses_str = r[cn];
        row.seed = static_cast<uint64_t>(parse_int(r[cs], path));
        if (cm >= 0 && !r[cm].empty()) {
            row.mos = parse_num(r[cm], path);
            row.has_mos = true;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Runs the distortion batch; fills out_path per row and writes the echo
// manifest to <out_dir>/manifest.csv.
void run_distort_batch(std::vector<DistortRow>& rows, const std::string& out_dir,
                       double feather, const DistortionParams& params) {
    fs::create_directories(out_dir);
    for (auto& row : rows) {
        const ErpImage src = ErpImage::wrap(load_png(row.src_path));
        std::string name;
        if (row.kind == "REF") {
            name = stem_of(row.src_path) + "_REF.png";
            save_png(src.raster, (fs::path(out_dir) / name).string());
        } else {
            DistortionSpec spec;
            spec.kind = distortion_kind_from_string(row.kind);
            spec.level = row.level;
            spec.lenses = parse_lenses(row.lenses_str);
            spec.feather_deg = feather;
            const ErpImage out = apply_distortion(src, spec, row.seed, params);
            name = stem_of(row.src_path) + "_" + row.kind + "_l" +
                   std::to_string(row.level) + "_" + lens_tag(spec.lenses) +
                   "_s" + std::to_string(row.seed) + ".png";
            save_png(out.raster, (fs::path(out_dir) / name).string());
        }
        row.out_path = (fs::path(out_dir) / name).string();
    }

    std::vector<std::vector<std::string>> echo;
    for (const auto& row : rows)
        echo.push_back({row.src_path, row.kind, std::to_string(row.level),
                        row.lenses_str, std::to_string(row.seed), row.out_path});
    std::sort(echo.begin(), echo.end(),
              [](const auto& a, const auto& b) { return a[5] < b[5]; });
    write_csv((fs::path(out_dir) / "manifest.csv").string(),
              {"src_path", "kind", "level", "lenses", "seed", "out_path"}, echo);
}

ViewportSpec viewport_template(double fov, int size) {
    ViewportSpec s;
    s.fov_deg = fov;
    s.out_width = size;
    s.out_height = size;
    return s;
}

// Loads weights from file (its config wins) or seeds a fresh set.
ModelWeights make_weights(const std::string& weights_path, int m, int size,
                          uint64_t seed) {
    if (!weights_path.empty()) {
        ModelWeights w = ModelWeights::load(weights_path);
        if (w.config.viewports != m || w.config.input_size != size)
            throw Error("weights file expects m=" +
                        std::to_string(w.config.viewports) + ", size=" +
                        std::to_string(w.config.input_size) +
                        "; adjust --m/--size to match");
        return w;
    }
    ModelConfig cfg;
    cfg.viewports = m;
    cfg.input_size = size;
    return ModelWeights::init(cfg, seed);
}

void write_summaries_json(const ForwardResult& res, const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : res.summaries)
        j.push_back({{"name", s.name},
                     {"shape", s.shape},
                     {"min", s.min},
                     {"mean", s.mean},
                     {"max", s.max}});
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

int cmd_distort(const std::string& manifest, const std::string& out_dir,
                double feather, const DistortionParams& params) {
    auto rows = read_distort_manifest(manifest);
    run_distort_batch(rows, out_dir, feather, params);
    std::cout << "distort: " << rows.size() << " image(s) -> " << out_dir
              << "\n";
    return 0;
}

int cmd_viewports(const std::string& erp, const std::string& out_dir, int m,
                  double fov, int size) {
    const ErpImage src = ErpImage::wrap(load_png(erp));
    const auto set = equatorial_viewport_set(src, m, viewport_template(fov, size));
    save_viewport_set(set, out_dir);
    std::cout << "viewports: " << set.size() << " viewport(s) -> " << out_dir
              << "\n";
    return 0;
}

int cmd_metrics(const std::string& ref_dir, const std::string& manifest,
                const std::string& out_csv, int sphere_points) {
    const CsvTable t = read_csv(manifest);
    const int cp = t.require_column("src_path");
    const int co = t.require_column("out_path");
    const SpherePointSet pts = fibonacci_sphere_points(sphere_points);

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : t.rows) {
        const std::string ref_path =
            (fs::path(ref_dir) / fs::path(r[cp]).filename()).string();
        const ErpImage ref = ErpImage::wrap(load_png(ref_path));
        const ErpImage dist = ErpImage::wrap(load_png(r[co]));
        rows.push_back({stem_of(r[co]), fmt_num(s_psnr(ref, dist, pts)),
                        fmt_num(ws_psnr(ref, dist)), fmt_num(cpp_psnr(ref, dist)),
                        fmt_num(ws_ssim(ref, dist))});
    }
    std::sort(rows.begin(), rows.end());
    write_csv(out_csv, {"image_id", "s_psnr", "ws_psnr", "cpp_psnr", "ws_ssim"},
              rows);
    std::cout << "metrics: " << rows.size() << " pair(s) -> " << out_csv << "\n";
    return 0;
}

int cmd_mos(const std::string& ratings, const std::string& meta_csv,
            const std::string& out_dir, bool per_image,
            const std::string& stage2, const std::string& merge) {
    ScoreMatrix m = load_ratings_csv(ratings);
    if (!stage2.empty()) {
        const ScoreMatrix s2 = load_ratings_csv(stage2);
        m = merge_stages(m, s2,
                         merge == "replace" ? StageMerge::Replace
                                            : StageMerge::Pool);
    }
    m.validate();
    const auto meta =
        meta_csv.empty() ? std::map<std::string, ImageMeta>{}
                         : load_image_meta_csv(meta_csv);
    const ScreeningResult screened = screen_subjects(
        m, per_image ? ScreeningMode::PerImage : ScreeningMode::PerSubject);
    const MosTable table = compute_mos(screened.retained, meta);

    fs::create_directories(out_dir);
    save_mos_csv(table, (fs::path(out_dir) / "mos.csv").string());
    save_rejected_csv(screened,
                      (fs::path(out_dir) / "rejected_subjects.csv").string());
    save_group_stats_csv(mos_statistics(table),
                         (fs::path(out_dir) / "group_stats.csv").string());
    std::cout << "mos: " << table.entries.size() << " image(s), "
              << screened.rejected_subjects.size() << " subject(s) rejected -> "
              << out_dir << "\n";
    return 0;
}

int cmd_diversity(const std::string& image_dir, const std::string& out_csv) {
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(image_dir))
        if (entry.path().extension() == ".png")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw Error("no PNG images in " + image_dir);

    std::vector<std::vector<std::string>> rows;
    for (const auto& p : paths) {
        const Raster img = load_png(p);
        rows.push_back({stem_of(p), fmt_num(spatial_information(img)),
                        fmt_num(colorfulness(img))});
    }
    write_csv(out_csv, {"image_id", "si", "cf"}, rows);
    std::cout << "diversity: " << rows.size() << " image(s) -> " << out_csv
              << "\n";
    return 0;
}

int cmd_forward(const std::string& erp, const std::string& features,
                const std::string& weights_path, int m, int size, double fov,
                uint64_t seed, const std::string& dump_path) {
    ForwardResult res;
    if (!features.empty()) {
        const FeatureStack fs_in = load_feature_stack(features);
        ModelConfig cfg;
        cfg.viewports = static_cast<int>(fs_in.f1.dim(0));
        cfg.input_size = static_cast<int>(fs_in.f1.dim(1)) * 8;
        cfg.c1 = static_cast<int>(fs_in.f1.dim(3));
        cfg.c2 = static_cast<int>(fs_in.f2.dim(3));
        cfg.c3 = static_cast<int>(fs_in.f3.dim(3));
        cfg.c4 = static_cast<int>(fs_in.f4.dim(3));
        ModelWeights w = weights_path.empty() ? ModelWeights::init(cfg, seed)
                                              : ModelWeights::load(weights_path);
        res = forward(fs_in, w, !dump_path.empty());
    } else {
        const ErpImage src = ErpImage::wrap(load_png(erp));
        const auto set =
            equatorial_viewport_set(src, m, viewport_template(fov, size));
        const ModelWeights w = make_weights(weights_path, m, size, seed);
        res = forward(set, w, seed, !dump_path.empty());
    }
    if (!dump_path.empty()) write_summaries_json(res, dump_path);
    std::cout << "q = " << fmt_num(res.q) << "\n";
    return 0;
}

int cmd_evaluate(const std::string& pred_csv, const std::string& mos_csv,
                 const std::string& out_dir, const EvalOptions& opts) {
    const auto pred = load_predictions_csv(pred_csv);
    const MosTable mos = load_mos_csv(mos_csv);
    const QualityReport report = evaluate(pred, mos, opts);

    fs::create_directories(out_dir);
    save_report_csv(report, (fs::path(out_dir) / "report.csv").string());
    save_report_eta_json(report, (fs::path(out_dir) / "eta.json").string());
    std::cout << "evaluate: " << report.rows.size() << " group(s) -> "
              << out_dir << "\n";
    return 0;
}

int cmd_pipeline(const std::string& manifest, const std::string& out_dir,
                 int m, int size, double fov, uint64_t seed,
                 const std::string& weights_path, double feather,
                 const DistortionParams& params, const EvalOptions& opts) {
    auto rows = read_distort_manifest(manifest);
    for (const auto& row : rows)
        if (!row.has_mos)
            throw Error("pipeline manifest needs a 'mos' column (row for " +
                        row.src_path + " lacks one)");

    run_distort_batch(rows, (fs::path(out_dir) / "distorted").string(), feather,
                      params);
    std::cout << "pipeline[distort]: " << rows.size() << " image(s)\n";

    const ModelWeights w = make_weights(weights_path, m, size, seed);
    std::vector<std::vector<std::string>> pred_rows;
    std::map<std::string, double> predictions;
    MosTable mos;
    for (const auto& row : rows) {
        const ErpImage img = ErpImage::wrap(load_png(row.out_path));
        const auto set =
            equatorial_viewport_set(img, m, viewport_template(fov, size));
        const std::string id = stem_of(row.out_path);
        save_viewport_set(set, (fs::path(out_dir) / "viewports" / id).string());
        const ForwardResult res = forward(set, w, seed);
        predictions[id] = res.q;
        pred_rows.push_back({id, fmt_num(res.q)});

        MosEntry e;
        e.image_id = id;
        e.mos = row.mos;
        e.n_raters = 0;
        e.meta.kind = row.kind;
        e.meta.level = row.level;
        e.meta.lens_count =
            static_cast<int>(parse_lenses(row.lenses_str).size());
        mos.entries.push_back(std::move(e));
    }
    std::sort(pred_rows.begin(), pred_rows.end());
    write_csv((fs::path(out_dir) / "predictions.csv").string(),
              {"image_id", "score"}, pred_rows);
    std::cout << "pipeline[forward]: " << pred_rows.size()
              << " prediction(s)\n";

    const QualityReport report = evaluate(predictions, mos, opts);
    save_report_csv(report, (fs::path(out_dir) / "report.csv").string());
    save_report_eta_json(report, (fs::path(out_dir) / "eta.json").string());
    std::cout << "pipeline[evaluate]: " << report.rows.size()
              << " group(s) -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& argv) {
    CLI::App app{"oiqa: omnidirectional image quality toolkit"};
    app.require_subcommand(1);

    // distort
    std::string d_manifest, d_out;
    double d_feather = 4.0;
    std::string d_gn, d_gb, d_bd, d_st;
    auto* distort = app.add_subcommand(
        "distort", "apply non-uniform distortions from a manifest");
    distort->add_option("--manifest", d_manifest,
                        "CSV: src_path,kind,level,lenses,seed")->required();
    distort->add_option("--out", d_out, "output directory")->required();
    distort->add_option("--feather", d_feather, "sector blend width, degrees");
    distort->add_option("--gn-sigma", d_gn, "three GN sigmas, e.g. 0.02,0.05,0.1");
    distort->add_option("--gb-sigma", d_gb, "three GB sigmas at width 1024");
    distort->add_option("--bd-gain", d_bd, "three BD gains");
    distort->add_option("--st-strength", d_st, "three ST strengths");
    std::string d_config;
    distort->add_option("--config", d_config, "flat key=value config file");

    // viewports
    std::string v_erp, v_out;
    int v_m = 8, v_size = 224;
    double v_fov = 90.0;
    auto* viewports =
        app.add_subcommand("viewports", "extract equatorial viewports");
    viewports->add_option("--erp", v_erp, "ERP image (PNG)")->required();
    viewports->add_option("--out", v_out, "output directory")->required();
    viewports->add_option("--m", v_m, "viewport count");
    viewports->add_option("--fov", v_fov, "field of view, degrees");
    viewports->add_option("--size", v_size, "viewport edge, pixels");
    std::string v_config;
    viewports->add_option("--config", v_config, "flat key=value config file");

    // metrics
    std::string m_ref, m_manifest, m_out;
    int m_points = kDefaultSpherePoints;
    auto* metrics = app.add_subcommand(
        "metrics", "full-reference spherical metrics over a manifest");
    metrics->add_option("--ref", m_ref, "directory of reference images")
        ->required();
    metrics->add_option("--dist", m_manifest,
                        "distortion echo manifest (src_path,out_path)")
        ->required();
    metrics->add_option("--out", m_out, "output CSV")->required();
    metrics->add_option("--sphere-points", m_points, "S-PSNR point count");
    std::string m_config;
    metrics->add_option("--config", m_config, "flat key=value config file");

    // mos
    std::string s_ratings, s_meta, s_out, s_stage2, s_merge = "pool";
    bool s_per_image = false;
    auto* mos = app.add_subcommand(
        "mos", "screen subjects (BT.500) and compute MOS tables");
    mos->add_option("--ratings", s_ratings,
                    "CSV: subject_id,image_id,score")->required();
    mos->add_option("--meta", s_meta, "CSV: image_id,kind,level,lenses");
    mos->add_option("--out", s_out, "output directory")->required();
    mos->add_flag("--per-image", s_per_image,
                  "drop out-of-interval ratings instead of rejecting subjects");
    mos->add_option("--stage2", s_stage2, "second-stage ratings CSV");
    mos->add_option("--merge", s_merge, "stage merge rule: pool|replace")
        ->check(CLI::IsMember({"pool", "replace"}));
    std::string s_config;
    mos->add_option("--config", s_config, "flat key=value config file");

    // diversity
    std::string y_dir, y_out;
    auto* diversity =
        app.add_subcommand("diversity", "SI/CF statistics over a directory");
    diversity->add_option("--images", y_dir, "directory of PNG images")
        ->required();
    diversity->add_option("--out", y_out, "output CSV")->required();
    std::string y_config;
    diversity->add_option("--config", y_config, "flat key=value config file");

    // oiqand-forward
    std::string f_erp, f_features, f_weights, f_dump;
    int f_m = 8, f_size = 224;
    double f_fov = 90.0;
    uint64_t f_seed = 0;
    auto* fwd = app.add_subcommand("oiqand-forward",
                                   "forward pass of the perception model");
    auto* f_erp_opt = fwd->add_option("--erp", f_erp, "ERP image (PNG)");
    auto* f_feat_opt =
        fwd->add_option("--features", f_features, "precomputed feature stack");
    f_erp_opt->excludes(f_feat_opt);
    fwd->add_option("--weights", f_weights, "weights container file");
    fwd->add_option("--m", f_m, "viewport count");
    fwd->add_option("--size", f_size, "viewport edge, pixels");
    fwd->add_option("--fov", f_fov, "field of view, degrees");
    fwd->add_option("--seed", f_seed, "weight/backbone seed");
    fwd->add_option("--dump-summaries", f_dump,
                    "write per-stage min/mean/max JSON");
    std::string f_config;
    fwd->add_option("--config", f_config, "flat key=value config file");

    // evaluate
    std::string e_pred, e_mos, e_out;
    EvalOptions e_opts;
    bool e_global = false, e_no_split = false;
    auto* eval = app.add_subcommand(
        "evaluate", "PLCC/SRCC/RMSE report with logistic mapping");
    eval->add_option("--pred", e_pred, "predictions CSV (image_id,score)")
        ->required();
    eval->add_option("--mos", e_mos, "mos.csv")->required();
    eval->add_option("--out", e_out, "output directory")->required();
    eval->add_option("--split-seed", e_opts.split_seed, "split seed");
    eval->add_option("--train-frac", e_opts.train_frac, "training fraction");
    eval->add_option("--psnr-cap", e_opts.psnr_cap_db,
                     "cap for infinite metric scores, dB");
    eval->add_flag("--global-fit", e_global,
                   "one logistic fit shared across groups");
    eval->add_flag("--no-split", e_no_split, "evaluate on all images");
    std::string e_config;
    eval->add_option("--config", e_config, "flat key=value config file");

    // pipeline
    std::string p_manifest, p_out, p_weights;
    int p_m = 8, p_size = 224;
    double p_fov = 90.0, p_feather = 4.0;
    uint64_t p_seed = 0;
    EvalOptions p_opts;
    bool p_no_split = false;
    std::string p_gn, p_gb, p_bd, p_st;
    auto* pipeline = app.add_subcommand(
        "pipeline", "distort -> viewports -> oiqand-forward -> evaluate");
    pipeline->add_option("--manifest", p_manifest,
                         "CSV: src_path,kind,level,lenses,seed,mos")
        ->required();
    pipeline->add_option("--out", p_out, "output directory")->required();
    pipeline->add_option("--m", p_m, "viewport count");
    pipeline->add_option("--size", p_size, "viewport edge, pixels");
    pipeline->add_option("--fov", p_fov, "field of view, degrees");
    pipeline->add_option("--seed", p_seed, "weight/backbone seed");
    pipeline->add_option("--weights", p_weights, "weights container file");
    pipeline->add_option("--feather", p_feather, "sector blend width, degrees");
    pipeline->add_option("--gn-sigma", p_gn, "three GN sigmas");
    pipeline->add_option("--gb-sigma", p_gb, "three GB sigmas at width 1024");
    pipeline->add_option("--bd-gain", p_bd, "three BD gains");
    pipeline->add_option("--st-strength", p_st, "three ST strengths");
    pipeline->add_option("--split-seed", p_opts.split_seed, "split seed");
    pipeline->add_option("--train-frac", p_opts.train_frac, "training fraction");
    pipeline->add_flag("--no-split", p_no_split, "evaluate on all images");
    std::string p_config;
    pipeline->add_option("--config", p_config, "flat key=value config file");

    std::vector<std::string> args;
    try {
        args = inject_config(argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::vector<const char*> cargv;
    cargv.push_back("oiqa");
    for (const auto& s : args) cargv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*distort) {
            DistortionParams params;
            apply_triple(d_gn, "--gn-sigma", params.gn_sigma);
            apply_triple(d_gb, "--gb-sigma", params.gb_sigma);
            apply_triple(d_bd, "--bd-gain", params.bd_gain);
            apply_triple(d_st, "--st-strength", params.st_strength);
            return cmd_distort(d_manifest, d_out, d_feather, params);
        }
        if (*viewports) return cmd_viewports(v_erp, v_out, v_m, v_fov, v_size);
        if (*metrics) return cmd_metrics(m_ref, m_manifest, m_out, m_points);
        if (*mos)
            return cmd_mos(s_ratings, s_meta, s_out, s_per_image, s_stage2,
                           s_merge);
        if (*diversity) return cmd_diversity(y_dir, y_out);
        if (*fwd) {
            if (f_erp.empty() && f_features.empty())
                throw Error("oiqand-forward needs --erp or --features");
            return cmd_forward(f_erp, f_features, f_weights, f_m, f_size, f_fov,
                               f_seed, f_dump);
        }
        if (*eval) {
            e_opts.fit_scope = e_global ? FitScope::Global : FitScope::PerGroup;
            e_opts.use_split = !e_no_split;
            return cmd_evaluate(e_pred, e_mos, e_out, e_opts);
        }
        if (*pipeline) {
            DistortionParams params;
            apply_triple(p_gn, "--gn-sigma", params.gn_sigma);
            apply_triple(p_gb, "--gb-sigma", params.gb_sigma);
            apply_triple(p_bd, "--bd-gain", params.bd_gain);
            apply_triple(p_st, "--st-strength", params.st_strength);
            p_opts.use_split = !p_no_split;
            return cmd_pipeline(p_manifest, p_out, p_m, p_size, p_fov, p_seed,
                                p_weights, p_feather, params, p_opts);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace oiqa::cli
