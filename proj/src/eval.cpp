#include "oiqa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "oiqa/csv.hpp"

namespace oiqa {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double sample_std(const std::vector<double>& v) {
    const double mu = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / (v.size() - 1));
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i) + j) / 2.0 + 1.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double plcc(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("plcc: length mismatch");
    if (x.size() < 3) throw Error("plcc: need at least 3 samples");
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw Error("plcc: degenerate variance, correlation undefined");
    return sxy / std::sqrt(sxx * syy);
}

double srcc(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("srcc: length mismatch");
    if (x.size() < 3) throw Error("srcc: need at least 3 samples");
    return plcc(average_ranks(x), average_ranks(y));
}

double rmse(const std::vector<double>& pred_mapped,
            const std::vector<double>& mos) {
    if (pred_mapped.size() != mos.size()) throw Error("rmse: length mismatch");
    if (pred_mapped.empty()) throw Error("rmse: empty input");
    double s = 0.0;
    for (size_t i = 0; i < pred_mapped.size(); ++i) {
        const double d = pred_mapped[i] - mos[i];
        s += d * d;
    }
    return std::sqrt(s / pred_mapped.size());
}

double LogisticParams::operator()(double q) const {
    return (e1 - e2) / (1.0 + std::exp(-(q - e3) / e4)) + e2;
}

namespace {

double sse_of(const LogisticParams& p, const std::vector<double>& q,
              const std::vector<double>& mos) {
    double s = 0.0;
    for (size_t i = 0; i < q.size(); ++i) {
        const double d = p(q[i]) - mos[i];
        s += d * d;
    }
    return s;
}

// Solve A x = b (4x4) in place; Gaussian elimination, partial pivoting.
bool solve4(double a[4][4], double b[4], double x[4]) {
    int piv[4] = {0, 1, 2, 3};
    for (int col = 0; col < 4; ++col) {
        int best = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[piv[r]][col]) > std::abs(a[piv[best]][col])) best = r;
        std::swap(piv[col], piv[best]);
        const double d = a[piv[col]][col];
        if (std::abs(d) < 1e-300) return false;
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[piv[r]][col] / d;
            for (int c = col; c < 4; ++c) a[piv[r]][c] -= f * a[piv[col]][c];
            b[piv[r]] -= f * b[piv[col]];
        }
    }
    for (int col = 3; col >= 0; --col) {
        double s = b[piv[col]];
        for (int c = col + 1; c < 4; ++c) s -= a[piv[col]][c] * x[c];
        x[col] = s / a[piv[col]][col];
    }
    return true;
}

struct LmOutcome {
    LogisticParams params;
    double sse = 0.0;
    bool converged = false;
};

LmOutcome levenberg_marquardt(LogisticParams p, const std::vector<double>& q,
                              const std::vector<double>& mos) {
    const size_t n = q.size();
    double lambda = 1e-3;
    double sse = sse_of(p, q, mos);
    bool converged = false;

    for (int iter = 0; iter < 300; ++iter) {
        // Accumulate J^T J and J^T r with the analytic Jacobian.
        double jtj[4][4] = {};
        double jtr[4] = {};
        for (size_t i = 0; i < n; ++i) {
            const double u = (q[i] - p.e3) / p.e4;
            const double s = 1.0 / (1.0 + std::exp(-u));
            const double ds = s * (1.0 - s);
            const double jac[4] = {s, 1.0 - s, -(p.e1 - p.e2) * ds / p.e4,
                                   -(p.e1 - p.e2) * ds * u / p.e4};
            const double r = mos[i] - (p.e1 - p.e2) * s - p.e2;
            for (int a = 0; a < 4; ++a) {
                jtr[a] += jac[a] * r;
                for (int b = 0; b < 4; ++b) jtj[a][b] += jac[a] * jac[b];
            }
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            double a[4][4], b[4], delta[4];
            for (int r = 0; r < 4; ++r) {
                for (int c = 0; c < 4; ++c) a[r][c] = jtj[r][c];
                a[r][r] += lambda * (jtj[r][r] > 0 ? jtj[r][r] : 1.0);
                b[r] = jtr[r];
            }
            if (!solve4(a, b, delta)) {
                lambda *= 10.0;
                continue;
            }
            LogisticParams trial = p;
            trial.e1 += delta[0];
            trial.e2 += delta[1];
            trial.e3 += delta[2];
            trial.e4 += delta[3];
            if (trial.e4 == 0.0 || !std::isfinite(trial.e4)) {
                lambda *= 10.0;
                continue;
            }
            const double trial_sse = sse_of(trial, q, mos);
            if (std::isfinite(trial_sse) && trial_sse <= sse) {
                const double improvement = sse - trial_sse;
                const double step =
                    std::max({std::abs(delta[0]), std::abs(delta[1]),
                              std::abs(delta[2]), std::abs(delta[3])});
                p = trial;
                sse = trial_sse;
                lambda = std::max(lambda * 0.1, 1e-12);
                stepped = true;
                if (improvement <= 1e-14 * (1.0 + sse) && step <= 1e-10)
                    converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            converged = true;  // no descent direction left
            break;
        }
        if (converged) break;
    }
    return {p, sse, converged};
}

}  // namespace

LogisticFit fit_logistic(const std::vector<double>& q,
                         const std::vector<double>& mos) {
    if (q.size() != mos.size()) throw Error("fit_logistic: length mismatch");
    if (q.size() < 5) throw Error("fit_logistic: need at least 5 samples");
    const double q_std = sample_std(q);
    if (q_std == 0.0) throw Error("fit_logistic: constant predictor");

    const double mos_min = *std::min_element(mos.begin(), mos.end());
    const double mos_max = *std::max_element(mos.begin(), mos.end());
    const double q_med = median_of(q);
    const double q_mean = mean_of(q);

    std::vector<LogisticParams> starts;
    for (double e4 : {q_std / 4.0, -q_std / 4.0}) {
        starts.push_back({mos_max, mos_min, q_med, e4});
        starts.push_back({mos_min, mos_max, q_med, e4});
    }
    // Linear-matched wide start: slope of the OLS line at the center of a
    // nearly-straight logistic segment. Keeps the family's identity-like
    // curves reachable.
    {
        const double mos_mean = mean_of(mos);
        double sxy = 0, sxx = 0;
        for (size_t i = 0; i < q.size(); ++i) {
            sxy += (q[i] - q_mean) * (mos[i] - mos_mean);
            sxx += (q[i] - q_mean) * (q[i] - q_mean);
        }
        const double slope = sxy / sxx;
        const double e4 = 4.0 * q_std;
        const double span = 4.0 * slope * e4;
        starts.push_back({mos_mean + span / 2.0, mos_mean - span / 2.0, q_mean,
                          e4});
    }

    LogisticFit best;
    bool first = true;
    for (const auto& start : starts) {
        if (start.e4 == 0.0) continue;
        const LmOutcome out = levenberg_marquardt(start, q, mos);
        if (first || out.sse < best.sse) {
            best.params = out.params;
            best.sse = out.sse;
            best.converged = out.converged;
            first = false;
        }
    }
    return best;
}

const GroupResult* QualityReport::find(const std::string& group) const {
    for (const auto& r : rows)
        if (r.group == group) return &r;
    return nullptr;
}

namespace {

struct EvalSample {
    std::string image_id;
    std::string kind;
    double pred = 0, mos = 0;
};

// Deterministic Fisher-Yates on indices.
void seeded_shuffle(std::vector<size_t>& idx, Rng& rng) {
    for (size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
}

GroupResult eval_group(const std::string& name,
                       const std::vector<const EvalSample*>& samples,
                       const LogisticFit* shared_fit) {
    GroupResult g;
    g.group = name;
    g.n = static_cast<long>(samples.size());
    std::vector<double> pred, mos;
    for (const auto* s : samples) {
        pred.push_back(s->pred);
        mos.push_back(s->mos);
    }

    LogisticFit fit;
    bool have_fit = false;
    if (shared_fit) {
        fit = *shared_fit;
        have_fit = true;
    } else if (pred.size() >= 5 &&
               *std::max_element(pred.begin(), pred.end()) !=
                   *std::min_element(pred.begin(), pred.end())) {
        fit = fit_logistic(pred, mos);
        have_fit = true;
    }

    std::vector<double> mapped = pred;
    if (have_fit)
        for (double& v : mapped) v = fit.params(v);
    g.mapped = have_fit;
    if (have_fit) g.eta = fit.params;
    g.plcc = plcc(mapped, mos);
    g.srcc = srcc(pred, mos);
    g.rmse = rmse(mapped, mos);
    return g;
}

}  // namespace

QualityReport evaluate(const std::map<std::string, double>& predictions,
                       const MosTable& mos, const EvalOptions& opts) {
    std::vector<EvalSample> all;
    for (const auto& e : mos.entries) {
        auto it = predictions.find(e.image_id);
        if (it == predictions.end())
            throw Error("missing prediction for image '" + e.image_id + "'");
        EvalSample s;
        s.image_id = e.image_id;
        s.kind = e.meta.kind;
        // Infinite metric scores (identical image pairs) clamp to the cap.
        s.pred = std::isinf(it->second)
                     ? (it->second > 0 ? opts.psnr_cap_db : -opts.psnr_cap_db)
                     : it->second;
        s.mos = e.mos;
        all.push_back(std::move(s));
    }
    std::sort(all.begin(), all.end(),
              [](const EvalSample& a, const EvalSample& b) {
                  return a.image_id < b.image_id;
              });

    // Stratified split: every distortion kind contributes to the test set.
    std::vector<const EvalSample*> test;
    if (opts.use_split) {
        std::map<std::string, std::vector<size_t>> by_kind;
        for (size_t i = 0; i < all.size(); ++i)
            by_kind[all[i].kind].push_back(i);
        Rng rng(opts.split_seed);
        for (auto& [kind, idx] : by_kind) {
            seeded_shuffle(idx, rng);
            const size_t n_test = std::max<size_t>(
                1, static_cast<size_t>(
                       std::lround((1.0 - opts.train_frac) * idx.size())));
            for (size_t i = 0; i < n_test && i < idx.size(); ++i)
                test.push_back(&all[idx[i]]);
        }
        std::sort(test.begin(), test.end(),
                  [](const EvalSample* a, const EvalSample* b) {
                      return a->image_id < b->image_id;
                  });
    } else {
        for (const auto& s : all) test.push_back(&s);
    }

    LogisticFit global_fit;
    bool have_global = false;
    if (opts.fit_scope == FitScope::Global) {
        std::vector<double> pred, target;
        for (const auto* s : test) {
            pred.push_back(s->pred);
            target.push_back(s->mos);
        }
        if (pred.size() >= 5 &&
            *std::max_element(pred.begin(), pred.end()) !=
                *std::min_element(pred.begin(), pred.end())) {
            global_fit = fit_logistic(pred, target);
            have_global = true;
        }
    }

    QualityReport report;
    for (const std::string& kind : {"BD", "GB", "GN", "ST"}) {
        std::vector<const EvalSample*> group;
        for (const auto* s : test)
            if (s->kind == kind) group.push_back(s);
        if (group.size() < 3) continue;  // too small for correlations
        report.rows.push_back(
            eval_group(kind, group, have_global ? &global_fit : nullptr));
    }
    report.rows.push_back(
        eval_group("Overall", test, have_global ? &global_fit : nullptr));
    return report;
}

void save_report_csv(const QualityReport& r, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& g : r.rows)
        rows.push_back({g.group, std::to_string(g.n), fmt_num(g.plcc),
                        fmt_num(g.srcc), fmt_num(g.rmse),
                        g.mapped ? "logistic" : "raw"});
    write_csv(path, {"group", "n", "plcc", "srcc", "rmse", "mapping"}, rows);
}

void save_report_eta_json(const QualityReport& r, const std::string& path) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& g : r.rows) {
        if (!g.mapped) continue;
        j[g.group] = {{"eta1", g.eta.e1},
                      {"eta2", g.eta.e2},
                      {"eta3", g.eta.e3},
                      {"eta4", g.eta.e4}};
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::map<std::string, double> load_predictions_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int ci = t.require_column("image_id");
    const int cs = t.require_column("score");
    std::map<std::string, double> out;
    for (const auto& row : t.rows) out[row[ci]] = parse_num(row[cs], path);
    return out;
}

}  // namespace oiqa
