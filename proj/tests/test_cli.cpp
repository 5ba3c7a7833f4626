#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oiqa/cli.hpp"
#include "oiqa/csv.hpp"
#include "oiqa/raster.hpp"
#include "test_support.hpp"

using namespace oiqa;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("unknown subcommand fails") {
    CHECK(cli::run({"frobnicate"}) != 0);
    CHECK(cli::run({}) != 0);
}

TEST_CASE("distort batch: artifacts, echo manifest, rerun safety") {
    test::TempDir tmp("clidistort");
    save_png(test::textured_raster(128, 64, 90), tmp.file("scene.png"));
    write_csv(tmp.file("man.csv"), {"src_path", "kind", "level", "lenses", "seed"},
              {{tmp.file("scene.png"), "GN", "2", "0;3", "11"}});

    const std::string out1 = tmp.file("out1");
    CHECK(cli::run({"distort", "--manifest", tmp.file("man.csv"), "--out", out1}) == 0);
    const CsvTable echo = read_csv(out1 + "/manifest.csv");
    REQUIRE(echo.rows.size() == 1);
    const std::string png1 = echo.rows[0][echo.require_column("out_path")];
    CHECK(fs::exists(png1));

    // Identical inputs and seeds give byte-identical outputs.
    const std::string out2 = tmp.file("out2");
    CHECK(cli::run({"distort", "--manifest", tmp.file("man.csv"), "--out", out2}) == 0);
    const CsvTable echo2 = read_csv(out2 + "/manifest.csv");
    const std::string png2 = echo2.rows[0][echo2.require_column("out_path")];
    CHECK(read_file(png1) == read_file(png2));

    // REF rows pass through.
    write_csv(tmp.file("ref.csv"), {"src_path", "kind", "level", "lenses", "seed"},
              {{tmp.file("scene.png"), "REF", "0", "", "0"}});
    CHECK(cli::run({"distort", "--manifest", tmp.file("ref.csv"), "--out",
                    tmp.file("out3")}) == 0);
    CHECK(fs::exists(tmp.file("out3") + "/scene_REF.png"));
}

TEST_CASE("distort rejects malformed manifests") {
    test::TempDir tmp("clibad");
    {
        std::ofstream out(tmp.file("bad.csv"));
        out << "src_path,kind,level,lenses,seed\na.png,GN,2\n";
    }
    CHECK(cli::run({"distort", "--manifest", tmp.file("bad.csv"), "--out",
                    tmp.file("o")}) != 0);

    write_csv(tmp.file("badkind.csv"),
              {"src_path", "kind", "level", "lenses", "seed"},
              {{tmp.file("missing.png"), "ZZ", "1", "0", "0"}});
    CHECK(cli::run({"distort", "--manifest", tmp.file("badkind.csv"), "--out",
                    tmp.file("o2")}) != 0);
}

TEST_CASE("viewports writes rasters and the sidecar") {
    test::TempDir tmp("clivp");
    save_png(test::textured_raster(128, 64, 91), tmp.file("scene.png"));
    CHECK(cli::run({"viewports", "--erp", tmp.file("scene.png"), "--out",
                    tmp.file("vp"), "--m", "4", "--size", "32"}) == 0);
    for (int i = 0; i < 4; ++i) {
        char name[40];
        std::snprintf(name, sizeof(name), "/viewport_%03d.png", i);
        CHECK(fs::exists(tmp.file("vp") + name));
    }
    const std::string sidecar = read_file(tmp.file("vp") + "/viewports.json");
    CHECK(sidecar.find("\"lon\"") != std::string::npos);
    CHECK(sidecar.find("\"fov\"") != std::string::npos);
}

TEST_CASE("metrics emits one row per pair") {
    test::TempDir tmp("climetrics");
    save_png(test::textured_raster(128, 64, 92), tmp.file("scene.png"));
    write_csv(tmp.file("man.csv"), {"src_path", "kind", "level", "lenses", "seed"},
              {{tmp.file("scene.png"), "GN", "1", "2", "3"},
               {tmp.file("scene.png"), "REF", "0", "", "0"}});
    REQUIRE(cli::run({"distort", "--manifest", tmp.file("man.csv"), "--out",
                      tmp.file("d")}) == 0);
    CHECK(cli::run({"metrics", "--ref", tmp.str(), "--dist",
                    tmp.file("d") + "/manifest.csv", "--out", tmp.file("m.csv"),
                    "--sphere-points", "5000"}) == 0);
    const CsvTable t = read_csv(tmp.file("m.csv"));
    REQUIRE(t.rows.size() == 2);
    // The REF row compares the image with itself: infinite PSNR sentinel.
    bool saw_inf = false;
    for (const auto& row : t.rows)
        saw_inf |= row[t.require_column("ws_psnr")] == "inf";
    CHECK(saw_inf);
}

TEST_CASE("mos pipeline over a small ratings file") {
    test::TempDir tmp("climos");
    std::vector<std::vector<std::string>> rows;
    for (int img = 0; img < 6; ++img)
        for (int s = 0; s < 4; ++s)
            rows.push_back({"s" + std::to_string(s), "i" + std::to_string(img),
                            std::to_string(2 + (img + s) % 3)});
    write_csv(tmp.file("r.csv"), {"subject_id", "image_id", "score"}, rows);
    write_csv(tmp.file("meta.csv"), {"image_id", "kind", "level", "lenses"},
              {{"i0", "GN", "1", "0"},
               {"i1", "GN", "2", "0"},
               {"i2", "GB", "1", "3"},
               {"i3", "GB", "3", "3"},
               {"i4", "ST", "2", "1;4"},
               {"i5", "BD", "1", "2"}});
    CHECK(cli::run({"mos", "--ratings", tmp.file("r.csv"), "--meta",
                    tmp.file("meta.csv"), "--out", tmp.file("mos")}) == 0);
    CHECK(fs::exists(tmp.file("mos") + "/mos.csv"));
    CHECK(fs::exists(tmp.file("mos") + "/rejected_subjects.csv"));
    CHECK(fs::exists(tmp.file("mos") + "/group_stats.csv"));
    const CsvTable t = read_csv(tmp.file("mos") + "/mos.csv");
    CHECK(t.rows.size() == 6);
}

TEST_CASE("diversity runs over a directory") {
    test::TempDir tmp("clidiv");
    save_png(test::textured_raster(64, 32, 93), tmp.file("a.png"));
    save_png(test::constant_raster(64, 32, 0.5f, 0.5f, 0.5f), tmp.file("b.png"));
    CHECK(cli::run({"diversity", "--images", tmp.str(), "--out",
                    tmp.file("div.csv")}) == 0);
    const CsvTable t = read_csv(tmp.file("div.csv"));
    REQUIRE(t.rows.size() == 2);
    // Constant image: SI and CF are both zero.
    CHECK(parse_num(t.rows[1][t.require_column("si")], "si") == 0.0);
    CHECK(parse_num(t.rows[1][t.require_column("cf")], "cf") == 0.0);
}

TEST_CASE("oiqand-forward runs and dumps summaries") {
    test::TempDir tmp("clifwd");
    save_png(test::textured_raster(128, 64, 94), tmp.file("scene.png"));
    CHECK(cli::run({"oiqand-forward", "--erp", tmp.file("scene.png"), "--m", "2",
                    "--size", "32", "--seed", "5", "--dump-summaries",
                    tmp.file("sum.json")}) == 0);
    const std::string dump = read_file(tmp.file("sum.json"));
    CHECK(dump.find("x_mff") != std::string::npos);
    CHECK(dump.find("v_hat") != std::string::npos);

    CHECK(cli::run({"oiqand-forward"}) != 0);  // needs --erp or --features
}

TEST_CASE("evaluate subcommand produces the report") {
    test::TempDir tmp("clieval");
    std::vector<std::vector<std::string>> mos_rows, pred_rows;
    Rng rng(95);
    int idx = 0;
    for (const std::string kind : {"BD", "GB", "GN", "ST"})
        for (int i = 0; i < 20; ++i) {
            const std::string id = "img" + std::to_string(idx++);
            const double m = 1.5 + 3.0 * rng.uniform();
            mos_rows.push_back({id, fmt_num(m), "5", "0.1", kind, "1", "1"});
            pred_rows.push_back({id, fmt_num(m)});
        }
    write_csv(tmp.file("mos.csv"),
              {"image_id", "mos", "n_raters", "variance", "kind", "level",
               "lens_count"},
              mos_rows);
    write_csv(tmp.file("pred.csv"), {"image_id", "score"}, pred_rows);
    CHECK(cli::run({"evaluate", "--pred", tmp.file("pred.csv"), "--mos",
                    tmp.file("mos.csv"), "--out", tmp.file("rep")}) == 0);
    const CsvTable t = read_csv(tmp.file("rep") + "/report.csv");
    REQUIRE(t.rows.size() == 5);
    for (const auto& row : t.rows)
        CHECK(parse_num(row[t.require_column("plcc")], "plcc") ==
              doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fs::exists(tmp.file("rep") + "/eta.json"));
}

TEST_CASE("config file supplies defaults, flags override") {
    test::TempDir tmp("clicfg");
    save_png(test::textured_raster(128, 64, 96), tmp.file("scene.png"));
    {
        std::ofstream cfg(tmp.file("run.cfg"));
        cfg << "m=3\nsize=16\n";
    }
    CHECK(cli::run({"viewports", "--erp", tmp.file("scene.png"), "--out",
                    tmp.file("v1"), "--config", tmp.file("run.cfg")}) == 0);
    CHECK(fs::exists(tmp.file("v1") + "/viewport_002.png"));
    CHECK_FALSE(fs::exists(tmp.file("v1") + "/viewport_003.png"));

    CHECK(cli::run({"viewports", "--erp", tmp.file("scene.png"), "--out",
                    tmp.file("v2"), "--config", tmp.file("run.cfg"), "--m",
                    "5"}) == 0);
    CHECK(fs::exists(tmp.file("v2") + "/viewport_004.png"));
}

}  // TEST_SUITE
