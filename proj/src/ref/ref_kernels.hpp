#pragma once

// Serial reference implementations, written straight from the formulas with
// plain loops and double accumulation. They are deliberately independent of
// the kernels in oiqa_core: the test suites compare the two and the benchmark
// times them against each other. Not part of the shipped library.

#include <vector>

#include "oiqa/distortion.hpp"
#include "oiqa/fr_metrics.hpp"
#include "oiqa/oiqand.hpp"
#include "oiqa/raster.hpp"

namespace oiqa::ref {

double psnr_ref(const Raster& a, const Raster& b);
double ws_psnr_ref(const Raster& a, const Raster& b);
double s_psnr_ref(const Raster& a, const Raster& b,
                  const std::vector<SphereDirection>& pts);
double ws_ssim_ref(const Raster& a, const Raster& b);

struct CppRef {
    Raster image;
    std::vector<uint8_t> valid;
};
CppRef cpp_project_ref(const Raster& src, int out_w, int out_h);
double cpp_psnr_ref(const Raster& a, const Raster& b, int out_w, int out_h);

Raster extract_viewport_ref(const Raster& erp, const ViewportSpec& spec);
Raster gaussian_blur_ref(const Raster& src, double sigma);

double spatial_information_ref(const Raster& img);
double colorfulness_ref(const Raster& img);

// C = A[m x k] * B[k x n], doubles.
std::vector<double> matmul_ref(const std::vector<double>& a,
                               const std::vector<double>& b, int m, int k, int n);

std::vector<double> upsample_bilinear_ref(const std::vector<double>& src,
                                          int ih, int iw, int ch, int oh, int ow);

// Double-precision model-equation oracles. Inputs/weights are the float
// tensors of the implementation; every intermediate here is double.
std::vector<double> vac_ref(const Tensor& psi, const ModelWeights& w);
std::vector<double> acac_ref(const Tensor& v_hat, const ModelWeights& w);
std::vector<double> vv_attention_ref(const Tensor& upsilon,
                                     const ModelWeights& w);

}  // namespace oiqa::ref
