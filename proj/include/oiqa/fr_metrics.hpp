#pragma once

#include <vector>

#include "oiqa/raster.hpp"
#include "oiqa/sphere_geometry.hpp"

namespace oiqa {

// Per-row cosine weights for WS-PSNR / WS-SSIM:
//   w(j) = cos((j + 0.5 - height/2) * pi / height)
struct WeightField {
    int width = 0;
    int height = 0;
    std::vector<double> row_weight;  // size = height

    double at(int /*x*/, int y) const { return row_weight[y]; }
};

WeightField ws_weights(int width, int height);

struct SpherePointSet {
    std::vector<SphereDirection> points;
};

// Deterministic near-uniform point set (Fibonacci lattice).
SpherePointSet fibonacci_sphere_points(int n);

inline constexpr int kDefaultSpherePoints = 655362;

// All PSNR variants: MAX = 1.0, MSE averaged over channels before the log.
// Identical inputs return +infinity (serialized as "inf" downstream).
double psnr(const Raster& ref, const Raster& dist);
double ws_psnr(const ErpImage& ref, const ErpImage& dist);
double s_psnr(const ErpImage& ref, const ErpImage& dist, const SpherePointSet& pts);

struct CppProjection {
    Raster image;
    std::vector<uint8_t> valid;  // 1 where inside the parabolic footprint
};

// Craster parabolic projection:
//   x = sqrt(3/pi) * lon * (2*cos(2*lat/3) - 1),  y = sqrt(3*pi) * sin(lat/3)
CppProjection cpp_project(const ErpImage& src, int out_width, int out_height);

double cpp_psnr(const ErpImage& ref, const ErpImage& dist);
double cpp_psnr(const ErpImage& ref, const ErpImage& dist, int out_width,
                int out_height);

// SSIM on Rec.601 luma (11x11 Gaussian window, sigma 1.5, k1 0.01, k2 0.03),
// aggregated with the WS-PSNR row weights.
double ws_ssim(const ErpImage& ref, const ErpImage& dist);

// Cap used when feeding PSNR scores to correlation code.
inline constexpr double kPsnrCapDb = 100.0;
inline double clamp_psnr(double v, double cap = kPsnrCapDb) {
    return v > cap ? cap : v;
}

}  // namespace oiqa
