#include "oiqa/distortion.hpp"

#include <algorithm>
#include <cmath>

namespace oiqa {

std::string to_string(DistortionKind k) {
    switch (k) {
        case DistortionKind::GN: return "GN";
        case DistortionKind::GB: return "GB";
        case DistortionKind::BD: return "BD";
        case DistortionKind::ST: return "ST";
    }
    return "?";
}

DistortionKind distortion_kind_from_string(const std::string& s) {
    if (s == "GN") return DistortionKind::GN;
    if (s == "GB") return DistortionKind::GB;
    if (s == "BD") return DistortionKind::BD;
    if (s == "ST") return DistortionKind::ST;
    throw Error("unknown distortion kind '" + s + "' (expected GN/GB/BD/ST)");
}

void DistortionSpec::validate() const {
    if (level < 1 || level > 3) throw Error("distortion level must be 1..3");
    if (lenses.empty() || lenses.size() > 2)
        throw Error("distortion must target 1 or 2 lenses");
    for (int l : lenses)
        if (l < 0 || l > 5) throw Error("lens index must be in 0..5");
    if (lenses.size() == 2) {
        if (lenses[0] == lenses[1]) throw Error("duplicate lens index");
        const int d = std::abs(lenses[0] - lenses[1]);
        if (std::min(d, 6 - d) < 2)
            throw Error("selected lenses must be non-adjacent on the ring");
    }
    if (feather_deg < 0.0 || feather_deg > 60.0)
        throw Error("feather must be in [0, 60] degrees");
}

namespace {

constexpr double kSectorHalfDeg = 30.0;

double sector_center_deg(int lens) { return -180.0 + 60.0 * lens + 30.0; }

double wrap_deg(double a) {
    a = std::fmod(a + 180.0, 360.0);
    if (a < 0) a += 360.0;
    return a - 180.0;
}

// Raised-cosine ramp on the signed distance (degrees) inside the sector
// boundary. Complementary across a shared boundary, so the six lens masks
// form a partition of unity for any feather width.
double ramp(double inside_deg, double feather_deg) {
    if (feather_deg <= 0.0)
        return inside_deg > 0.0 ? 1.0 : (inside_deg < 0.0 ? 0.0 : 0.5);
    if (inside_deg >= feather_deg / 2.0) return 1.0;
    if (inside_deg <= -feather_deg / 2.0) return 0.0;
    return 0.5 * (1.0 + std::sin(kPi * inside_deg / feather_deg));
}

double single_lens_weight(double lon_deg, int lens, double feather_deg) {
    const double off = wrap_deg(lon_deg - sector_center_deg(lens));
    return ramp(kSectorHalfDeg - std::abs(off), feather_deg);
}

}  // namespace

LensMask lens_mask(int width, int height, const std::vector<int>& lenses,
                   double feather_deg) {
    DistortionSpec check;
    check.lenses = lenses;
    check.feather_deg = feather_deg;
    check.validate();

    LensMask m;
    m.width = width;
    m.height = height;
    m.col_weight.resize(width);
    for (int x = 0; x < width; ++x) {
        const double lon_deg = (x + 0.5) / width * 360.0 - 180.0;
        double w = 0.0;
        for (int l : lenses) w += single_lens_weight(lon_deg, l, feather_deg);
        m.col_weight[x] = static_cast<float>(std::min(1.0, w));
    }
    return m;
}

namespace {

Raster distort_gn(const Raster& src, double sigma, uint64_t seed) {
    Raster out(src.width, src.height);
    const int w = src.width, h = src.height;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                const uint64_t idx =
                    (static_cast<uint64_t>(y) * w + x) * 3 + c;
                const double n = sigma * hashed_normal(seed, idx);
                out.at(x, y, c) = clamp01(src.at(x, y, c) + static_cast<float>(n));
            }
    return out;
}

Raster distort_gb(const Raster& src, double sigma) {
    const int w = src.width, h = src.height;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        taps[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += taps[i + radius];
    }
    for (double& t : taps) t /= sum;

    Raster tmp(w, h), out(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    int xx = (x + k) % w;
                    if (xx < 0) xx += w;
                    s += taps[k + radius] * src.at(xx, y, c);
                }
                tmp.at(x, y, c) = static_cast<float>(s);
            }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int yy = std::clamp(y + k, 0, h - 1);
                    s += taps[k + radius] * tmp.at(x, yy, c);
                }
                out.at(x, y, c) = clamp01(static_cast<float>(s));
            }
    return out;
}

Raster distort_bd(const Raster& src, double gain) {
    Raster out(src.width, src.height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x)
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) =
                    clamp01(static_cast<float>(gain * src.at(x, y, c)));
    return out;
}

// Barrel warp (displacement ~ d * r^2) around each selected sector center,
// plus a 3 px vertical shear band at the sector boundaries to mimic a
// visible stitch seam.
Raster distort_st(const Raster& src, double strength,
                  const std::vector<int>& lenses) {
    const int w = src.width, h = src.height;
    constexpr double kBarrel = 0.15;
    const double band_px = 3.0;
    const double shear_px = 3.0 * strength;

    Raster out(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const double lat_deg = 90.0 - (y + 0.5) / h * 180.0;
        for (int x = 0; x < w; ++x) {
            const double lon_deg = (x + 0.5) / w * 360.0 - 180.0;
            double src_x = x + 0.5, src_y = y + 0.5;
            for (int l : lenses) {
                const double off = wrap_deg(lon_deg - sector_center_deg(l));
                if (std::abs(off) > kSectorHalfDeg) continue;
                const double dx = off / kSectorHalfDeg;
                const double dy = lat_deg / 90.0;
                const double scale =
                    1.0 + kBarrel * strength * (dx * dx + dy * dy);
                const double lon_s =
                    sector_center_deg(l) + dx * scale * kSectorHalfDeg;
                const double lat_s = std::clamp(dy * scale * 90.0, -90.0, 90.0);
                src_x = (lon_s + 180.0) / 360.0 * w;
                src_y = (90.0 - lat_s) / 180.0 * h;
                // Seam band: distance to a sector edge in pixels.
                const double edge_deg = kSectorHalfDeg - std::abs(off);
                if (edge_deg * w / 360.0 < band_px) src_y += shear_px;
                break;
            }
            float rgb[3];
            bilinear_sample_wrap(src, src_x, src_y, rgb);
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = clamp01(rgb[c]);
        }
    }
    return out;
}

}  // namespace

ErpImage apply_distortion(const ErpImage& src, const DistortionSpec& spec,
                          uint64_t seed, const DistortionParams& params) {
    spec.validate();
    const int w = src.width(), h = src.height();
    const int li = spec.level - 1;

    Raster distorted;
    switch (spec.kind) {
        case DistortionKind::GN:
            distorted = distort_gn(src.raster, params.gn_sigma[li], seed);
            break;
        case DistortionKind::GB:
            distorted = distort_gb(src.raster, params.gb_sigma[li] * w / 1024.0);
            break;
        case DistortionKind::BD:
            distorted = distort_bd(src.raster, params.bd_gain[li]);
            break;
        case DistortionKind::ST:
            distorted = distort_st(src.raster, params.st_strength[li], spec.lenses);
            break;
    }

    const LensMask mask = lens_mask(w, h, spec.lenses, spec.feather_deg);
    Raster out(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float m = mask.col_weight[x];
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = clamp01(m * distorted.at(x, y, c) +
                                          (1.0f - m) * src.raster.at(x, y, c));
        }
    return ErpImage::wrap(std::move(out));
}

}  // namespace oiqa
