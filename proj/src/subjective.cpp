#include "oiqa/subjective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "oiqa/csv.hpp"

namespace oiqa {

int ScoreMatrix::subject_index(const std::string& id) const {
    for (size_t i = 0; i < subject_ids.size(); ++i)
        if (subject_ids[i] == id) return static_cast<int>(i);
    return -1;
}

int ScoreMatrix::image_index(const std::string& id) const {
    for (size_t i = 0; i < image_ids.size(); ++i)
        if (image_ids[i] == id) return static_cast<int>(i);
    return -1;
}

std::vector<double> ScoreMatrix::ratings_of_image(int image) const {
    std::vector<double> out;
    for (const auto& row : scores)
        if (row[image].has_value()) out.push_back(*row[image]);
    return out;
}

void ScoreMatrix::validate() const {
    if (scores.size() != subject_ids.size())
        throw Error("score matrix row count mismatch");
    for (const auto& row : scores) {
        if (row.size() != image_ids.size())
            throw Error("score matrix column count mismatch");
        for (const auto& s : row)
            if (s.has_value() && !(*s >= 1.0 && *s <= 5.0))
                throw Error("rating outside [1,5]");
    }
    for (size_t i = 0; i < image_ids.size(); ++i)
        if (ratings_of_image(static_cast<int>(i)).size() < 2)
            throw Error("image '" + image_ids[i] + "' has fewer than 2 ratings");
}

double beta2_normality(const std::vector<double>& scores) {
    const size_t n = scores.size();
    if (n < 2) throw Error("beta2 needs at least 2 ratings");
    const double mean =
        std::accumulate(scores.begin(), scores.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double s : scores) {
        const double d = s - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    if (m2 == 0.0) return 2.0;  // all raters agree
    const double beta2 = m4 / (m2 * m2);
    return (beta2 >= 2.0 && beta2 <= 4.0) ? 2.0 : std::sqrt(20.0);
}

namespace {

struct ImageInterval {
    double lo = 0.0, hi = 0.0;
    bool defined = false;
};

std::vector<ImageInterval> per_image_intervals(const ScoreMatrix& m) {
    const int n_img = static_cast<int>(m.image_ids.size());
    std::vector<ImageInterval> iv(n_img);
    for (int i = 0; i < n_img; ++i) {
        const auto ratings = m.ratings_of_image(i);
        if (ratings.size() < 2) continue;
        const double mean =
            std::accumulate(ratings.begin(), ratings.end(), 0.0) /
            ratings.size();
        double ss = 0.0;
        for (double r : ratings) ss += (r - mean) * (r - mean);
        const double sigma = std::sqrt(ss / (ratings.size() - 1));
        const double n = beta2_normality(ratings);
        iv[i] = {mean - n * sigma, mean + n * sigma, true};
    }
    return iv;
}

}  // namespace

ScreeningResult screen_subjects(const ScoreMatrix& m, ScreeningMode mode) {
    const auto intervals = per_image_intervals(m);
    const int n_sub = static_cast<int>(m.subject_ids.size());
    const int n_img = static_cast<int>(m.image_ids.size());

    ScreeningResult res;
    res.retained = m;
    res.report.resize(n_sub);

    for (int s = 0; s < n_sub; ++s) {
        SubjectReport& rep = res.report[s];
        rep.subject_id = m.subject_ids[s];
        for (int i = 0; i < n_img; ++i) {
            const auto& score = m.scores[s][i];
            if (!score.has_value()) continue;
            ++rep.n_img;
            if (!intervals[i].defined) continue;
            if (*score > intervals[i].hi) {
                ++rep.p;
                if (mode == ScreeningMode::PerImage)
                    res.retained.scores[s][i].reset();
            } else if (*score < intervals[i].lo) {
                ++rep.q;
                if (mode == ScreeningMode::PerImage)
                    res.retained.scores[s][i].reset();
            }
        }
        const long pq = rep.p + rep.q;
        rep.outlier_fraction = rep.n_img > 0 ? double(pq) / rep.n_img : 0.0;
        rep.balance = pq > 0 ? std::abs(double(rep.p - rep.q)) / pq : 0.0;
        if (mode == ScreeningMode::PerSubject)
            rep.rejected = rep.outlier_fraction > 0.05 && pq > 0 &&
                           rep.balance < 0.3;
    }

    if (mode == ScreeningMode::PerSubject) {
        ScoreMatrix kept;
        kept.image_ids = m.image_ids;
        for (int s = 0; s < n_sub; ++s) {
            if (res.report[s].rejected) {
                res.rejected_subjects.push_back(m.subject_ids[s]);
            } else {
                kept.subject_ids.push_back(m.subject_ids[s]);
                kept.scores.push_back(m.scores[s]);
            }
        }
        res.retained = std::move(kept);
    }
    return res;
}

MosTable compute_mos(const ScoreMatrix& retained,
                     const std::map<std::string, ImageMeta>& meta) {
    MosTable t;
    for (size_t i = 0; i < retained.image_ids.size(); ++i) {
        const auto ratings = retained.ratings_of_image(static_cast<int>(i));
        if (ratings.empty()) {
            t.flagged.push_back(retained.image_ids[i]);
            continue;
        }
        MosEntry e;
        e.image_id = retained.image_ids[i];
        e.n_raters = static_cast<int>(ratings.size());
        e.mos = std::accumulate(ratings.begin(), ratings.end(), 0.0) /
                ratings.size();
        if (ratings.size() > 1) {
            double ss = 0.0;
            for (double r : ratings) ss += (r - e.mos) * (r - e.mos);
            e.variance = ss / (ratings.size() - 1);
        }
        auto it = meta.find(e.image_id);
        if (it != meta.end()) e.meta = it->second;
        t.entries.push_back(std::move(e));
    }
    return t;
}

ScoreMatrix merge_stages(const ScoreMatrix& stage1, const ScoreMatrix& stage2,
                         StageMerge mode) {
    ScoreMatrix out;
    std::set<std::string> subjects(stage1.subject_ids.begin(),
                                   stage1.subject_ids.end());
    subjects.insert(stage2.subject_ids.begin(), stage2.subject_ids.end());
    std::set<std::string> images(stage1.image_ids.begin(),
                                 stage1.image_ids.end());
    images.insert(stage2.image_ids.begin(), stage2.image_ids.end());
    out.subject_ids.assign(subjects.begin(), subjects.end());
    out.image_ids.assign(images.begin(), images.end());
    out.scores.assign(out.subject_ids.size(),
                      std::vector<std::optional<double>>(out.image_ids.size()));

    std::set<std::string> rerated(stage2.image_ids.begin(),
                                  stage2.image_ids.end());

    auto pour = [&](const ScoreMatrix& src, bool is_stage1) {
        for (size_t s = 0; s < src.subject_ids.size(); ++s) {
            const int so = out.subject_index(src.subject_ids[s]);
            for (size_t i = 0; i < src.image_ids.size(); ++i) {
                if (!src.scores[s][i].has_value()) continue;
                if (is_stage1 && mode == StageMerge::Replace &&
                    rerated.count(src.image_ids[i]))
                    continue;
                const int io = out.image_index(src.image_ids[i]);
                out.scores[so][io] = src.scores[s][i];
            }
        }
    };
    pour(stage1, true);
    pour(stage2, false);  // on (subject, image) collisions stage 2 wins
    return out;
}

double spatial_information(const Raster& img) {
    const int w = img.width, h = img.height;
    if (w < 3 || h < 3) return 0.0;

    std::vector<double> luma(static_cast<size_t>(w) * h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            luma[static_cast<size_t>(y) * w + x] = luma601(img, x, y);

    auto L = [&](int x, int y) { return luma[static_cast<size_t>(y) * w + x]; };
    const long n = static_cast<long>(w - 2) * (h - 2);
    std::vector<double> row_sum(h, 0.0), row_sq(h, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 1; y < h - 1; ++y) {
        double s = 0.0, sq = 0.0;
        for (int x = 1; x < w - 1; ++x) {
            const double gx = -L(x - 1, y - 1) + L(x + 1, y - 1) -
                              2 * L(x - 1, y) + 2 * L(x + 1, y) -
                              L(x - 1, y + 1) + L(x + 1, y + 1);
            const double gy = -L(x - 1, y - 1) - 2 * L(x, y - 1) -
                              L(x + 1, y - 1) + L(x - 1, y + 1) +
                              2 * L(x, y + 1) + L(x + 1, y + 1);
            const double mag = std::sqrt(gx * gx + gy * gy);
            s += mag;
            sq += mag * mag;
        }
        row_sum[y] = s;
        row_sq[y] = sq;
    }
    double sum = 0.0, sq = 0.0;
    for (int y = 0; y < h; ++y) {
        sum += row_sum[y];
        sq += row_sq[y];
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sq / n - mean * mean);
    return std::sqrt(var);
}

double colorfulness(const Raster& img) {
    const long n = static_cast<long>(img.pixel_count());
    std::vector<double> rs(img.height, 0.0), rsq(img.height, 0.0);
    std::vector<double> ys(img.height, 0.0), ysq(img.height, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        double sr = 0, sr2 = 0, sy = 0, sy2 = 0;
        for (int x = 0; x < img.width; ++x) {
            const double r = img.at(x, y, 0), g = img.at(x, y, 1),
                         b = img.at(x, y, 2);
            const double rg = r - g;
            const double yb = (r + g) / 2.0 - b;
            sr += rg;
            sr2 += rg * rg;
            sy += yb;
            sy2 += yb * yb;
        }
        rs[y] = sr;
        rsq[y] = sr2;
        ys[y] = sy;
        ysq[y] = sy2;
    }
    double sum_rg = 0, sq_rg = 0, sum_yb = 0, sq_yb = 0;
    for (int y = 0; y < img.height; ++y) {
        sum_rg += rs[y];
        sq_rg += rsq[y];
        sum_yb += ys[y];
        sq_yb += ysq[y];
    }
    const double mu_rg = sum_rg / n, mu_yb = sum_yb / n;
    const double var_rg = std::max(0.0, sq_rg / n - mu_rg * mu_rg);
    const double var_yb = std::max(0.0, sq_yb / n - mu_yb * mu_yb);
    return std::sqrt(var_rg + var_yb) +
           0.3 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb);
}

namespace {

double quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted[0];
    const double pos = p * (sorted.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - lo;
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

GroupStats summarize(const std::string& grouping, const std::string& group,
                     std::vector<double> values) {
    std::sort(values.begin(), values.end());
    GroupStats g;
    g.grouping = grouping;
    g.group = group;
    g.count = static_cast<long>(values.size());
    g.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    g.min = values.front();
    g.max = values.back();
    g.q1 = quantile(values, 0.25);
    g.median = quantile(values, 0.5);
    g.q3 = quantile(values, 0.75);
    g.histogram.assign(8, 0);
    for (double v : values) {
        int bin = static_cast<int>((v - 1.0) / 4.0 * 8.0);
        bin = std::clamp(bin, 0, 7);
        ++g.histogram[bin];
    }
    return g;
}

}  // namespace

std::vector<GroupStats> mos_statistics(const MosTable& table) {
    if (table.entries.empty()) throw Error("mos_statistics: empty table");
    std::map<std::string, std::vector<double>> by_kind, by_level, by_lens;
    for (const auto& e : table.entries) {
        by_kind[e.meta.kind.empty() ? "?" : e.meta.kind].push_back(e.mos);
        by_level[std::to_string(e.meta.level)].push_back(e.mos);
        by_lens[std::to_string(e.meta.lens_count)].push_back(e.mos);
    }
    std::vector<GroupStats> out;
    for (const auto& [k, v] : by_kind) out.push_back(summarize("kind", k, v));
    for (const auto& [k, v] : by_level) out.push_back(summarize("level", k, v));
    for (const auto& [k, v] : by_lens)
        out.push_back(summarize("lens_count", k, v));
    return out;
}

ScoreMatrix load_ratings_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int cs = t.require_column("subject_id");
    const int ci = t.require_column("image_id");
    const int cv = t.require_column("score");

    ScoreMatrix m;
    std::map<std::string, int> sub_idx, img_idx;
    for (const auto& row : t.rows) {
        if (!sub_idx.count(row[cs])) {
            sub_idx[row[cs]] = static_cast<int>(m.subject_ids.size());
            m.subject_ids.push_back(row[cs]);
        }
        if (!img_idx.count(row[ci])) {
            img_idx[row[ci]] = static_cast<int>(m.image_ids.size());
            m.image_ids.push_back(row[ci]);
        }
    }
    m.scores.assign(m.subject_ids.size(),
                    std::vector<std::optional<double>>(m.image_ids.size()));
    for (const auto& row : t.rows) {
        const double v = parse_num(row[cv], path);
        if (!(v >= 1.0 && v <= 5.0))
            throw Error(path + ": rating " + row[cv] + " outside [1,5]");
        m.scores[sub_idx[row[cs]]][img_idx[row[ci]]] = v;
    }
    return m;
}

std::map<std::string, ImageMeta> load_image_meta_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int ci = t.require_column("image_id");
    const int ck = t.require_column("kind");
    const int cl = t.require_column("level");
    const int cn = t.require_column("lenses");

    std::map<std::string, ImageMeta> out;
    for (const auto& row : t.rows) {
        ImageMeta m;
        m.kind = row[ck];
        m.level = static_cast<int>(parse_int(row[cl], path));
        m.lens_count = row[cn].empty()
                           ? 0
                           : 1 + static_cast<int>(std::count(row[cn].begin(),
                                                             row[cn].end(), ';'));
        out[row[ci]] = m;
    }
    return out;
}

void save_mos_csv(const MosTable& t, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : t.entries)
        rows.push_back({e.image_id, fmt_num(e.mos), std::to_string(e.n_raters),
                        fmt_num(e.variance), e.meta.kind,
                        std::to_string(e.meta.level),
                        std::to_string(e.meta.lens_count)});
    std::sort(rows.begin(), rows.end());
    write_csv(path,
              {"image_id", "mos", "n_raters", "variance", "kind", "level",
               "lens_count"},
              rows);
}

MosTable load_mos_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int ci = t.require_column("image_id");
    const int cm = t.require_column("mos");
    const int cn = t.column("n_raters");
    const int cv = t.column("variance");
    const int ck = t.column("kind");
    const int cl = t.column("level");
    const int cc = t.column("lens_count");

    MosTable out;
    for (const auto& row : t.rows) {
        MosEntry e;
        e.image_id = row[ci];
        e.mos = parse_num(row[cm], path);
        if (cn >= 0) e.n_raters = static_cast<int>(parse_int(row[cn], path));
        if (cv >= 0) e.variance = parse_num(row[cv], path);
        if (ck >= 0) e.meta.kind = row[ck];
        if (cl >= 0) e.meta.level = static_cast<int>(parse_int(row[cl], path));
        if (cc >= 0)
            e.meta.lens_count = static_cast<int>(parse_int(row[cc], path));
        out.entries.push_back(std::move(e));
    }
    return out;
}

void save_rejected_csv(const ScreeningResult& r, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& rep : r.report)
        if (rep.rejected)
            rows.push_back({rep.subject_id, std::to_string(rep.p),
                            std::to_string(rep.q), std::to_string(rep.n_img),
                            fmt_num(rep.outlier_fraction), fmt_num(rep.balance)});
    std::sort(rows.begin(), rows.end());
    write_csv(path,
              {"subject_id", "p", "q", "n_img", "outlier_fraction", "balance"},
              rows);
}

void save_group_stats_csv(const std::vector<GroupStats>& stats,
                          const std::string& path) {
    std::vector<std::string> header = {"grouping", "group", "count", "mean",
                                       "min",      "q1",    "median", "q3",
                                       "max"};
    for (int i = 0; i < 8; ++i) header.push_back("h" + std::to_string(i + 1));
    std::vector<std::vector<std::string>> rows;
    for (const auto& g : stats) {
        std::vector<std::string> row = {
            g.grouping,      g.group,      std::to_string(g.count),
            fmt_num(g.mean), fmt_num(g.min), fmt_num(g.q1),
            fmt_num(g.median), fmt_num(g.q3), fmt_num(g.max)};
        for (long hcount : g.histogram) row.push_back(std::to_string(hcount));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

}  // namespace oiqa
