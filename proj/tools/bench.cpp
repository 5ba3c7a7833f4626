// Benchmark comparing the OpenMP kernels against the serial reference
// implementations. Run with OMP_NUM_THREADS to pick the thread count.

#include <chrono>
#include <cstdio>
#include <functional>

#include <omp.h>

#include "oiqa/fr_metrics.hpp"
#include "oiqa/oiqand.hpp"
#include "oiqa/sphere_geometry.hpp"
#include "oiqa/subjective.hpp"
#include "oiqa/tensor.hpp"
#include "ref/ref_kernels.hpp"

using namespace oiqa;

namespace {

Raster random_raster(int w, int h, uint64_t seed) {
    Raster img(w, h);
    for (size_t i = 0; i < img.data.size(); ++i)
        img.data[i] = static_cast<float>(u64_to_unit(hash_mix(seed, i)));
    return img;
}

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double par_ms, double ser_ms, double max_diff) {
    std::printf("%-22s %10.2f ms %10.2f ms %8.2fx   max|diff| %.3g\n", name,
                par_ms, ser_ms, ser_ms / par_ms, max_diff);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-22s %13s %13s %9s\n", "kernel", "parallel", "serial",
                "speedup");

    const int reps = 3;
    const Raster a = random_raster(1024, 512, 11);
    const Raster b = random_raster(1024, 512, 22);
    const ErpImage ea = ErpImage::wrap(a);
    const ErpImage eb = ErpImage::wrap(b);

    {
        double par = 0, ser = 0;
        const double pm = time_ms([&] { par = ws_psnr(ea, eb); }, reps);
        const double sm = time_ms([&] { ser = ref::ws_psnr_ref(a, b); }, reps);
        report("ws_psnr", pm, sm, std::abs(par - ser));
    }
    {
        double par = 0, ser = 0;
        const double pm = time_ms([&] { par = ws_ssim(ea, eb); }, reps);
        const double sm = time_ms([&] { ser = ref::ws_ssim_ref(a, b); }, reps);
        report("ws_ssim", pm, sm, std::abs(par - ser));
    }
    {
        const SpherePointSet pts = fibonacci_sphere_points(100000);
        double par = 0, ser = 0;
        const double pm = time_ms([&] { par = s_psnr(ea, eb, pts); }, reps);
        const double sm =
            time_ms([&] { ser = ref::s_psnr_ref(a, b, pts.points); }, reps);
        report("s_psnr (100k pts)", pm, sm, std::abs(par - ser));
    }
    {
        ViewportSpec spec;
        spec.center = {0.3, 1.1};
        Viewport par;
        Raster ser;
        const double pm = time_ms([&] { par = extract_viewport(ea, spec); }, reps);
        const double sm =
            time_ms([&] { ser = ref::extract_viewport_ref(a, spec); }, reps);
        double mx = 0;
        for (size_t i = 0; i < ser.data.size(); ++i)
            mx = std::max(mx,
                          std::abs(double(par.image.data[i]) - ser.data[i]));
        report("extract_viewport", pm, sm, mx);
    }
    {
        const int m = 512, k = 512, n = 512;
        const Tensor ta = Tensor::gaussian({m, k}, 1, 1.0);
        const Tensor tb = Tensor::gaussian({k, n}, 2, 1.0);
        Tensor tc({m, n});
        std::vector<double> da(ta.data(), ta.data() + ta.numel());
        std::vector<double> db(tb.data(), tb.data() + tb.numel());
        std::vector<double> dc;
        const double pm = time_ms(
            [&] { matmul(ta.data(), tb.data(), tc.data(), m, k, n); }, reps);
        const double sm =
            time_ms([&] { dc = ref::matmul_ref(da, db, m, k, n); }, reps);
        double mx = 0;
        for (int64_t i = 0; i < tc.numel(); ++i)
            mx = std::max(mx, std::abs(tc.flat(i) - dc[i]));
        report("matmul 512^3", pm, sm, mx);
    }
    {
        double par = 0, ser = 0;
        const double pm = time_ms([&] { par = spatial_information(a); }, reps);
        const double sm =
            time_ms([&] { ser = ref::spatial_information_ref(a); }, reps);
        report("spatial_information", pm, sm, std::abs(par - ser));
    }
    return 0;
}
