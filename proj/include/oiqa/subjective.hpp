#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oiqa/raster.hpp"

namespace oiqa {

// Raw subject x image ratings in [1,5]; missing entries allowed (the
// two-stage protocol gives unequal coverage).
struct ScoreMatrix {
    std::vector<std::string> subject_ids;
    std::vector<std::string> image_ids;
    // scores[s][i]: rating of image i by subject s, or nullopt
    std::vector<std::vector<std::optional<double>>> scores;

    int subject_index(const std::string& id) const;
    int image_index(const std::string& id) const;
    std::vector<double> ratings_of_image(int image) const;
    // Every rating in [1,5]; every image has >= 2 ratings.
    void validate() const;
};

struct ImageMeta {
    std::string kind;  // GN/GB/BD/ST, or anything else for references
    int level = 0;
    int lens_count = 0;
};

struct MosEntry {
    std::string image_id;
    double mos = 0.0;
    int n_raters = 0;
    double variance = 0.0;  // sample variance of retained ratings
    ImageMeta meta;
};

struct MosTable {
    std::vector<MosEntry> entries;
    std::vector<std::string> flagged;  // images left with no raters
};

// BT.500 kurtosis test: beta2 = m4 / m2^2 on population central moments.
// Returns 2 when 2 <= beta2 <= 4 (treated as normal), sqrt(20) otherwise.
// Zero variance returns 2 by convention.
double beta2_normality(const std::vector<double>& scores);

enum class ScreeningMode {
    PerSubject,  // BT.500: accumulate P/Q per subject across images
    PerImage,    // comparison mode: drop individual out-of-interval ratings
};

struct SubjectReport {
    std::string subject_id;
    long p = 0;                  // ratings above mu + n*sigma
    long q = 0;                  // ratings below mu - n*sigma
    long n_img = 0;              // images this subject rated
    double outlier_fraction = 0; // (P+Q)/N_img
    double balance = 0;          // |P-Q|/(P+Q), 0 when P+Q == 0
    bool rejected = false;
};

struct ScreeningResult {
    ScoreMatrix retained;
    std::vector<std::string> rejected_subjects;
    std::vector<SubjectReport> report;
};

// Reject a subject iff (P+Q)/N_img > 0.05 and |P-Q|/(P+Q) < 0.3, with the
// per-image interval [mu - n*sigma, mu + n*sigma] (sample sigma, n from
// beta2_normality).
ScreeningResult screen_subjects(const ScoreMatrix& m,
                                ScreeningMode mode = ScreeningMode::PerSubject);

// MOS_i = mean of retained ratings of image i. Images with no raters are
// flagged and excluded.
MosTable compute_mos(const ScoreMatrix& retained,
                     const std::map<std::string, ImageMeta>& meta = {});

// Merge of the two-stage rating protocol: by default both stages' ratings
// are pooled; Replace drops stage-1 ratings of every image present in
// stage 2.
enum class StageMerge { Pool, Replace };
ScoreMatrix merge_stages(const ScoreMatrix& stage1, const ScoreMatrix& stage2,
                         StageMerge mode = StageMerge::Pool);

// Content diversity descriptors.
// SI: std of the Sobel gradient magnitude of the luma plane (interior pixels).
double spatial_information(const Raster& img);
// CF: with rg = R-G and yb = (R+G)/2 - B,
//     CF = sqrt(var_rg + var_yb) + 0.3 * sqrt(mean_rg^2 + mean_yb^2)
double colorfulness(const Raster& img);

struct GroupStats {
    std::string grouping;  // "kind" / "level" / "lens_count"
    std::string group;
    long count = 0;
    double mean = 0, min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    std::vector<long> histogram;  // 8 uniform bins over [1,5]
};

// Five-number summaries and histograms of MOS grouped by distortion kind,
// level and lens count. Empty groups are omitted.
std::vector<GroupStats> mos_statistics(const MosTable& table);

// CSV bridges used by the CLI.
ScoreMatrix load_ratings_csv(const std::string& path);
std::map<std::string, ImageMeta> load_image_meta_csv(const std::string& path);
void save_mos_csv(const MosTable& t, const std::string& path);
MosTable load_mos_csv(const std::string& path);
void save_rejected_csv(const ScreeningResult& r, const std::string& path);
void save_group_stats_csv(const std::vector<GroupStats>& stats,
                          const std::string& path);

}  // namespace oiqa
