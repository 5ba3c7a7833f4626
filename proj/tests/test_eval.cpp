#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oiqa/csv.hpp"
#include "oiqa/eval.hpp"
#include "test_support.hpp"

using namespace oiqa;

namespace {

// Synthetic MOS table across the four kinds.
MosTable synthetic_mos(int per_kind, uint64_t seed) {
    Rng rng(seed);
    MosTable t;
    int idx = 0;
    for (const std::string kind : {"BD", "GB", "GN", "ST"})
        for (int i = 0; i < per_kind; ++i) {
            MosEntry e;
            e.image_id = "img" + std::to_string(idx++);
            e.mos = 1.2 + 3.6 * rng.uniform();
            e.n_raters = 10;
            e.meta.kind = kind;
            e.meta.level = 1 + static_cast<int>(rng.below(3));
            e.meta.lens_count = 1 + static_cast<int>(rng.below(2));
            t.entries.push_back(std::move(e));
        }
    return t;
}

std::map<std::string, double> as_predictions(const MosTable& t) {
    std::map<std::string, double> p;
    for (const auto& e : t.entries) p[e.image_id] = e.mos;
    return p;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("plcc basics") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> lin, neg;
    for (double v : x) {
        lin.push_back(2 * v + 1);
        neg.push_back(-v);
    }
    CHECK(plcc(x, lin) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(plcc(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));

    // Fixed five-point pair against the textbook formula.
    const std::vector<double> a = {1.0, 2.0, 3.5, 4.0, 5.5};
    const std::vector<double> b = {2.1, 1.9, 3.2, 4.8, 4.4};
    double ma = 0, mb = 0;
    for (size_t i = 0; i < 5; ++i) {
        ma += a[i] / 5;
        mb += b[i] / 5;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < 5; ++i) {
        sxy += (a[i] - ma) * (b[i] - mb);
        sxx += (a[i] - ma) * (a[i] - ma);
        syy += (b[i] - mb) * (b[i] - mb);
    }
    CHECK(plcc(a, b) ==
          doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-12));

    CHECK_THROWS_AS(plcc({1, 2}, {1, 2}), Error);
    CHECK_THROWS_AS(plcc({1, 1, 1}, {1, 2, 3}), Error);
    CHECK_THROWS_AS(plcc({1, 2, 3}, {1, 2}), Error);
}

TEST_CASE("srcc basics and tie handling") {
    const std::vector<double> x = {0.5, 1.2, 2.0, 3.3};
    std::vector<double> mono, dec;
    for (double v : x) {
        mono.push_back(std::exp(v));
        dec.push_back(-v * v * v);
    }
    CHECK(srcc(x, mono) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(srcc(x, dec) == doctest::Approx(-1.0).epsilon(1e-12));

    // Tie case {1,2,2,3} vs {1,3,2,4}: average ranks give 4.5/sqrt(22.5).
    CHECK(srcc({1, 2, 2, 3}, {1, 3, 2, 4}) ==
          doctest::Approx(0.9486832980505138).epsilon(1e-12));

    CHECK_THROWS_AS(srcc({2, 2, 2}, {1, 2, 3}), Error);
}

TEST_CASE("srcc is invariant under strictly increasing transforms") {
    Rng rng(71);
    std::vector<double> x, y, tx, ty;
    for (int i = 0; i < 50; ++i) {
        x.push_back(rng.uniform(-2, 2));
        y.push_back(rng.uniform(-2, 2));
    }
    for (double v : x) tx.push_back(v * v * v + 2 * v);
    for (double v : y) ty.push_back(std::exp(0.7 * v));
    CHECK(srcc(x, y) == srcc(tx, y));
    CHECK(srcc(x, y) == srcc(x, ty));
    CHECK(srcc(x, y) == srcc(tx, ty));
}

TEST_CASE("rmse basics") {
    CHECK(rmse({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(rmse({2, 3, 4}, {1.5, 2.5, 3.5}) == doctest::Approx(0.5).epsilon(1e-12));
    Rng rng(72);
    std::vector<double> a, b;
    double s = 0;
    for (int i = 0; i < 30; ++i) {
        a.push_back(rng.uniform());
        b.push_back(rng.uniform());
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    CHECK(rmse(a, b) == doctest::Approx(std::sqrt(s / 30)).epsilon(1e-12));
    CHECK_THROWS_AS(rmse({1}, {1, 2}), Error);
}

TEST_CASE("logistic evaluation") {
    const LogisticParams p{4.0, 1.0, 0.0, 1.0};
    CHECK(p(0.0) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(p(100.0) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(p(-100.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("logistic fit recovers noiseless parameters") {
    const LogisticParams truth{4.5, 1.5, 0.2, 0.6};
    std::vector<double> q, mos;
    for (int i = 0; i < 40; ++i) {
        const double v = -2.0 + 5.0 * i / 39.0;
        q.push_back(v);
        mos.push_back(truth(v));
    }
    const LogisticFit fit = fit_logistic(q, mos);
    double worst = 0;
    for (double v : q) worst = std::max(worst, std::abs(fit.params(v) - truth(v)));
    CHECK(worst < 1e-6);
    CHECK(fit.converged);
}

TEST_CASE("logistic fit handles the flipped orientation") {
    const LogisticParams truth{1.2, 4.8, -0.5, -0.9};  // decreasing in q
    std::vector<double> q, mos;
    for (int i = 0; i < 50; ++i) {
        const double v = -3.0 + 6.0 * i / 49.0;
        q.push_back(v);
        mos.push_back(truth(v));
    }
    const LogisticFit fit = fit_logistic(q, mos);
    double worst = 0;
    for (double v : q) worst = std::max(worst, std::abs(fit.params(v) - truth(v)));
    CHECK(worst < 1e-6);
}

TEST_CASE("logistic fit reproduces identity data") {
    std::vector<double> q;
    for (int i = 0; i < 30; ++i) q.push_back(1.0 + 4.0 * i / 29.0);
    const LogisticFit fit = fit_logistic(q, q);
    double worst = 0;
    for (double v : q) worst = std::max(worst, std::abs(fit.params(v) - v));
    CHECK(worst < 1e-4);

    std::vector<double> mapped;
    for (double v : q) mapped.push_back(fit.params(v));
    CHECK(plcc(mapped, q) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("logistic mapping improves linearity on saturating data") {
    std::vector<double> q, mos;
    for (int i = 0; i < 50; ++i) {
        const double v = -3.0 + 6.0 * i / 49.0;
        q.push_back(v);
        mos.push_back(1.0 + 4.0 / (1.0 + std::exp(-1.7 * v)));
    }
    const double before = plcc(q, mos);
    const LogisticFit fit = fit_logistic(q, mos);
    std::vector<double> mapped;
    for (double v : q) mapped.push_back(fit.params(v));
    const double after = plcc(mapped, mos);
    CHECK(after >= before - 1e-9);
    CHECK(after > 0.999);
    CHECK(before < 0.99);
}

TEST_CASE("logistic fit input validation") {
    CHECK_THROWS_AS(fit_logistic({1, 2, 3}, {1, 2, 3}), Error);  // too few
    CHECK_THROWS_AS(fit_logistic({2, 2, 2, 2, 2}, {1, 2, 3, 4, 5}), Error);
}

TEST_CASE("evaluate: perfect predictions give a perfect report") {
    const MosTable mos = synthetic_mos(15, 81);
    EvalOptions opts;
    opts.split_seed = 3;
    const QualityReport r = evaluate(as_predictions(mos), mos, opts);

    std::vector<std::string> labels;
    for (const auto& row : r.rows) labels.push_back(row.group);
    CHECK(labels ==
          std::vector<std::string>{"BD", "GB", "GN", "ST", "Overall"});
    for (const auto& row : r.rows) {
        CHECK(row.plcc == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(row.srcc == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(row.rmse < 1e-3);
    }
}

TEST_CASE("evaluate: permutation null correlations are near zero") {
    const MosTable mos = synthetic_mos(125, 82);  // 500 images
    auto pred = as_predictions(mos);

    // Shuffle prediction values across images (seeded).
    std::vector<double> vals;
    for (const auto& [k, v] : pred) vals.push_back(v);
    Rng rng(83);
    for (size_t i = vals.size(); i > 1; --i)
        std::swap(vals[i - 1], vals[rng.below(i)]);
    size_t j = 0;
    for (auto& [k, v] : pred) v = vals[j++];

    EvalOptions opts;
    opts.use_split = false;  // all 500 samples
    const QualityReport r = evaluate(pred, mos, opts);
    const GroupResult* overall = r.find("Overall");
    REQUIRE(overall);
    CHECK(std::abs(overall->plcc) < 0.15);
    CHECK(std::abs(overall->srcc) < 0.15);
}

TEST_CASE("evaluate is deterministic and stratified") {
    const MosTable mos = synthetic_mos(20, 84);
    auto pred = as_predictions(mos);
    for (auto& [k, v] : pred) v = 6.0 - v + 0.1 * std::sin(v);  // decreasing map

    EvalOptions opts;
    opts.split_seed = 17;
    const QualityReport a = evaluate(pred, mos, opts);
    const QualityReport b = evaluate(pred, mos, opts);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].plcc == b.rows[i].plcc);
        CHECK(a.rows[i].srcc == b.rows[i].srcc);
        CHECK(a.rows[i].rmse == b.rows[i].rmse);
        CHECK(a.rows[i].n == b.rows[i].n);
    }
    // Every kind group is populated in the test split.
    CHECK(a.rows.size() == 5);
    for (const auto& row : a.rows) {
        CHECK(row.n >= 3);
        CHECK(row.plcc >= -1.0);
        CHECK(row.plcc <= 1.0);
        CHECK(row.srcc >= -1.0);
        CHECK(row.srcc <= 1.0);
        CHECK(row.rmse >= 0.0);
    }
}

TEST_CASE("evaluate clamps infinite scores and flags missing ones") {
    MosTable mos = synthetic_mos(3, 85);
    auto pred = as_predictions(mos);
    pred[mos.entries[0].image_id] = std::numeric_limits<double>::infinity();
    EvalOptions opts;
    opts.use_split = false;
    const QualityReport r = evaluate(pred, mos, opts);
    for (const auto& row : r.rows) CHECK(std::isfinite(row.plcc));

    pred.erase(mos.entries[1].image_id);
    CHECK_THROWS_AS(evaluate(pred, mos, opts), Error);
}

TEST_CASE("global fit mode shares one mapping") {
    const MosTable mos = synthetic_mos(10, 86);
    EvalOptions opts;
    opts.fit_scope = FitScope::Global;
    opts.use_split = false;
    const QualityReport r = evaluate(as_predictions(mos), mos, opts);
    REQUIRE(r.rows.size() == 5);
    for (size_t i = 1; i < r.rows.size(); ++i) {
        CHECK(r.rows[i].eta.e1 == r.rows[0].eta.e1);
        CHECK(r.rows[i].eta.e4 == r.rows[0].eta.e4);
    }
}

TEST_CASE("report csv and eta json") {
    test::TempDir tmp("eval");
    const MosTable mos = synthetic_mos(10, 87);
    EvalOptions opts;
    const QualityReport r = evaluate(as_predictions(mos), mos, opts);
    save_report_csv(r, tmp.file("report.csv"));
    save_report_eta_json(r, tmp.file("eta.json"));
    const CsvTable t = read_csv(tmp.file("report.csv"));
    CHECK(t.rows.size() == r.rows.size());
    CHECK(t.require_column("plcc") >= 0);

    write_csv(tmp.file("p.csv"), {"image_id", "score"},
              {{"a", "1.5"}, {"b", "inf"}});
    const auto loaded = load_predictions_csv(tmp.file("p.csv"));
    CHECK(loaded.at("a") == 1.5);
    CHECK(std::isinf(loaded.at("b")));
}

}  // TEST_SUITE
