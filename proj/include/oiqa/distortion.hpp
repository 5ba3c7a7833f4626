#pragma once

#include <string>
#include <vector>

#include "oiqa/raster.hpp"

namespace oiqa {

enum class DistortionKind { GN, GB, BD, ST };

std::string to_string(DistortionKind k);
DistortionKind distortion_kind_from_string(const std::string& s);

// One distortion event: a kind at one of three levels applied to the
// sector(s) of one or two non-adjacent lenses of the 6-lens ring.
struct DistortionSpec {
    DistortionKind kind = DistortionKind::GN;
    int level = 1;               // 1..3
    std::vector<int> lenses;     // 1 or 2 indices in 0..5, non-adjacent
    double feather_deg = 4.0;    // blend width at sector boundaries

    void validate() const;
};

// Per-level strengths. The ST strengths are fixed by the protocol; the
// others are configuration (and overridable).
struct DistortionParams {
    double gn_sigma[3] = {0.02, 0.05, 0.10};   // noise std, full scale 1.0
    double gb_sigma[3] = {2.0, 4.0, 8.0};      // blur std in px at width 1024
    double bd_gain[3] = {0.6, 1.45, 1.9};      // luminance gain
    double st_strength[3] = {0.5, 0.75, 1.0};  // radial warp strength
};

// Feathered weight field of the selected lens sectors. Constant along
// image rows, so it is stored per column.
struct LensMask {
    int width = 0;
    int height = 0;
    std::vector<float> col_weight;  // size = width

    float weight(int x, int /*y*/) const { return col_weight[x]; }
};

// Union of 60-degree longitudinal sectors centered at
// lon = -180 + 60k + 30 degrees, with a raised-cosine ramp of feather_deg
// width at the boundaries. The six single-lens masks sum to 1 everywhere.
LensMask lens_mask(int width, int height, const std::vector<int>& lenses,
                   double feather_deg);

// out = mask * distort(src) + (1 - mask) * src, per channel.
// Deterministic given (src, spec, seed); output clamped to [0,1].
ErpImage apply_distortion(const ErpImage& src, const DistortionSpec& spec,
                          uint64_t seed,
                          const DistortionParams& params = DistortionParams{});

}  // namespace oiqa
