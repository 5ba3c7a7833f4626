#pragma once

#include <map>
#include <string>
#include <vector>

#include "oiqa/subjective.hpp"

namespace oiqa {

double plcc(const std::vector<double>& x, const std::vector<double>& y);
// Spearman: Pearson on ranks, ties get average ranks.
double srcc(const std::vector<double>& x, const std::vector<double>& y);
double rmse(const std::vector<double>& pred_mapped,
            const std::vector<double>& mos);

// Four-parameter logistic f(q) = (e1 - e2) / (1 + exp(-(q - e3)/e4)) + e2.
struct LogisticParams {
    double e1 = 0, e2 = 0, e3 = 0, e4 = 1;

    double operator()(double q) const;
};

struct LogisticFit {
    LogisticParams params;
    bool converged = false;
    double sse = 0.0;
};

// Damped Gauss-Newton (Levenberg-Marquardt) with deterministic multi-start:
// the (max,min)/(min,max) orientations with e4 = +-std(q)/4, plus a
// linear-matched wide start. Returns the best-residual fit.
LogisticFit fit_logistic(const std::vector<double>& q,
                         const std::vector<double>& mos);

struct GroupResult {
    std::string group;
    long n = 0;
    double plcc = 0, srcc = 0, rmse = 0;
    LogisticParams eta;
    bool mapped = true;  // false when n was too small to fit the logistic
};

struct QualityReport {
    std::vector<GroupResult> rows;  // BD/GB/GN/ST as populated, then Overall

    const GroupResult* find(const std::string& group) const;
};

enum class FitScope { PerGroup, Global };

struct EvalOptions {
    uint64_t split_seed = 1;
    double train_frac = 0.8;
    FitScope fit_scope = FitScope::PerGroup;
    double psnr_cap_db = 100.0;  // applied to infinite predictor scores
    // When false the report covers every image instead of the test split.
    bool use_split = true;
};

// The standard protocol: deterministic stratified 80/20 split, logistic
// mapping fitted on the evaluation set, PLCC/SRCC/RMSE per distortion kind
// and overall. Groups with fewer than 3 test images are omitted; groups
// with fewer than 5 fall back to unmapped scores.
QualityReport evaluate(const std::map<std::string, double>& predictions,
                       const MosTable& mos, const EvalOptions& opts = {});

void save_report_csv(const QualityReport& r, const std::string& path);
void save_report_eta_json(const QualityReport& r, const std::string& path);
std::map<std::string, double> load_predictions_csv(const std::string& path);

}  // namespace oiqa
