#include "oiqa/fr_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oiqa {

namespace {

void require_same_dims(const Raster& a, const Raster& b) {
    if (!a.same_dims(b))
        throw Error("metric inputs must share dimensions, got " +
                    std::to_string(a.width) + "x" + std::to_string(a.height) +
                    " vs " + std::to_string(b.width) + "x" +
                    std::to_string(b.height));
}

double mse_to_db(double mse) {
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

}  // namespace

WeightField ws_weights(int width, int height) {
    if (width <= 0 || height <= 0) throw Error("ws_weights: bad dims");
    WeightField f;
    f.width = width;
    f.height = height;
    f.row_weight.resize(height);
    for (int j = 0; j < height; ++j)
        f.row_weight[j] = std::cos((j + 0.5 - height / 2.0) * kPi / height);
    return f;
}

SpherePointSet fibonacci_sphere_points(int n) {
    if (n < 1) throw Error("sphere point count must be >= 1");
    SpherePointSet s;
    s.points.resize(n);
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        double lon = std::fmod(i / golden, 1.0) * 2.0 * kPi - kPi;
        if (lon >= kPi) lon -= 2.0 * kPi;
        s.points[i].lat = std::asin(z);
        s.points[i].lon = lon;
    }
    return s;
}

double psnr(const Raster& ref, const Raster& dist) {
    require_same_dims(ref, dist);
    const int w = ref.width, h = ref.height;
    std::vector<double> row_sum(h, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double s = 0.0;
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(ref.at(x, y, c)) -
                                 dist.at(x, y, c);
                s += d * d;
            }
        row_sum[y] = s;
    }
    double total = 0.0;
    for (double s : row_sum) total += s;
    return mse_to_db(total / (ref.pixel_count() * 3.0));
}

double ws_psnr(const ErpImage& ref, const ErpImage& dist) {
    require_same_dims(ref.raster, dist.raster);
    const int w = ref.width(), h = ref.height();
    const WeightField wf = ws_weights(w, h);

    std::vector<double> row_err(h, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double s = 0.0;
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(ref.raster.at(x, y, c)) -
                                 dist.raster.at(x, y, c);
                s += d * d;
            }
        row_err[y] = s * wf.row_weight[y];
    }
    double num = 0.0, den = 0.0;
    for (int y = 0; y < h; ++y) {
        num += row_err[y];
        den += wf.row_weight[y] * w * 3.0;
    }
    return mse_to_db(num / den);
}

double s_psnr(const ErpImage& ref, const ErpImage& dist, const SpherePointSet& pts) {
    require_same_dims(ref.raster, dist.raster);
    const int n = static_cast<int>(pts.points.size());
    if (n < 1) throw Error("s_psnr: empty point set");
    const int w = ref.width(), h = ref.height();

    const int chunk = 4096;
    const int n_chunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(n_chunks, 0.0);
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < n_chunks; ++ci) {
        double s = 0.0;
        const int end = std::min(n, (ci + 1) * chunk);
        for (int i = ci * chunk; i < end; ++i) {
            const PixelCoord p = dir_to_erp(pts.points[i], w, h);
            float a[3], b[3];
            bilinear_sample_wrap(ref.raster, p.x, p.y, a);
            bilinear_sample_wrap(dist.raster, p.x, p.y, b);
            for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(a[c]) - b[c];
                s += d * d;
            }
        }
        partial[ci] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return mse_to_db(total / (n * 3.0));
}

CppProjection cpp_project(const ErpImage& src, int out_width, int out_height) {
    if (out_width < 2 || out_height < 2) throw Error("cpp_project: bad dims");
    const double sx = std::sqrt(3.0 * kPi);      // max |x|
    const double sy = std::sqrt(3.0 * kPi) / 2;  // max |y|
    const int w = src.width(), h = src.height();

    CppProjection out;
    out.image = Raster(out_width, out_height);
    out.valid.assign(static_cast<size_t>(out_width) * out_height, 0);

#pragma omp parallel for schedule(static)
    for (int v = 0; v < out_height; ++v) {
        const double y = sy - (v + 0.5) / out_height * 2.0 * sy;
        const double sin_lat3 = y / std::sqrt(3.0 * kPi);
        if (std::abs(sin_lat3) > std::sin(kPi / 6.0)) continue;  // |lat| > pi/2
        const double lat = 3.0 * std::asin(sin_lat3);
        const double denom =
            std::sqrt(3.0 / kPi) * (2.0 * std::cos(2.0 * lat / 3.0) - 1.0);
        for (int u = 0; u < out_width; ++u) {
            const double x = (u + 0.5) / out_width * 2.0 * sx - sx;
            if (denom <= 0.0) continue;
            const double lon = x / denom;
            if (lon < -kPi || lon >= kPi) continue;
            const PixelCoord p = dir_to_erp({lat, lon}, w, h);
            float rgb[3];
            bilinear_sample_wrap(src.raster, p.x, p.y, rgb);
            for (int c = 0; c < 3; ++c) out.image.at(u, v, c) = rgb[c];
            out.valid[static_cast<size_t>(v) * out_width + u] = 1;
        }
    }
    return out;
}

double cpp_psnr(const ErpImage& ref, const ErpImage& dist, int out_width,
                int out_height) {
    require_same_dims(ref.raster, dist.raster);
    const CppProjection a = cpp_project(ref, out_width, out_height);
    const CppProjection b = cpp_project(dist, out_width, out_height);

    std::vector<double> row_sum(out_height, 0.0);
    std::vector<long> row_cnt(out_height, 0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < out_height; ++y) {
        double s = 0.0;
        long cnt = 0;
        for (int x = 0; x < out_width; ++x) {
            const size_t idx = static_cast<size_t>(y) * out_width + x;
            if (!a.valid[idx] || !b.valid[idx]) continue;
            for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(a.image.at(x, y, c)) -
                                 b.image.at(x, y, c);
                s += d * d;
            }
            ++cnt;
        }
        row_sum[y] = s;
        row_cnt[y] = cnt;
    }
    double total = 0.0;
    long n = 0;
    for (int y = 0; y < out_height; ++y) {
        total += row_sum[y];
        n += row_cnt[y];
    }
    if (n == 0) throw Error("cpp_psnr: empty valid mask");
    return mse_to_db(total / (n * 3.0));
}

double cpp_psnr(const ErpImage& ref, const ErpImage& dist) {
    return cpp_psnr(ref, dist, ref.width(), ref.height());
}

namespace {

constexpr int kSsimRadius = 5;  // 11x11 window
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;  // (k1 * L)^2, L = 1
constexpr double kSsimC2 = 0.03 * 0.03;

std::vector<double> gaussian_taps() {
    std::vector<double> taps(2 * kSsimRadius + 1);
    double sum = 0.0;
    for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
        taps[i + kSsimRadius] = std::exp(-(i * i) / (2.0 * kSsimSigma * kSsimSigma));
        sum += taps[i + kSsimRadius];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// Separable Gaussian filter with ERP border semantics (wrap-x, clamp-y).
void gaussian_filter(const std::vector<double>& src, int w, int h,
                     const std::vector<double>& taps, std::vector<double>& tmp,
                     std::vector<double>& dst) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -kSsimRadius; k <= kSsimRadius; ++k) {
                int xx = (x + k) % w;
                if (xx < 0) xx += w;
                s += taps[k + kSsimRadius] * src[static_cast<size_t>(y) * w + xx];
            }
            tmp[static_cast<size_t>(y) * w + x] = s;
        }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -kSsimRadius; k <= kSsimRadius; ++k) {
                int yy = y + k;
                yy = yy < 0 ? 0 : (yy >= h ? h - 1 : yy);
                s += taps[k + kSsimRadius] * tmp[static_cast<size_t>(yy) * w + x];
            }
            dst[static_cast<size_t>(y) * w + x] = s;
        }
}

}  // namespace

double ws_ssim(const ErpImage& ref, const ErpImage& dist) {
    require_same_dims(ref.raster, dist.raster);
    const int w = ref.width(), h = ref.height();
    const size_t n = static_cast<size_t>(w) * h;

    std::vector<double> ya(n), yb(n);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            ya[static_cast<size_t>(y) * w + x] = luma601(ref.raster, x, y);
            yb[static_cast<size_t>(y) * w + x] = luma601(dist.raster, x, y);
        }

    std::vector<double> aa(n), bb(n), ab(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(n); ++i) {
        aa[i] = ya[i] * ya[i];
        bb[i] = yb[i] * yb[i];
        ab[i] = ya[i] * yb[i];
    }

    const std::vector<double> taps = gaussian_taps();
    std::vector<double> tmp(n), mu_a(n), mu_b(n), m_aa(n), m_bb(n), m_ab(n);
    gaussian_filter(ya, w, h, taps, tmp, mu_a);
    gaussian_filter(yb, w, h, taps, tmp, mu_b);
    gaussian_filter(aa, w, h, taps, tmp, m_aa);
    gaussian_filter(bb, w, h, taps, tmp, m_bb);
    gaussian_filter(ab, w, h, taps, tmp, m_ab);

    const WeightField wf = ws_weights(w, h);
    std::vector<double> row_num(h, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double s = 0.0;
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            // Variances are nonnegative; truncate the floating dust so the
            // Cauchy-Schwarz bound (and with it ssim <= 1) survives rounding.
            const double va = std::max(0.0, m_aa[i] - mu_a[i] * mu_a[i]);
            const double vb = std::max(0.0, m_bb[i] - mu_b[i] * mu_b[i]);
            double cov = m_ab[i] - mu_a[i] * mu_b[i];
            if (cov * cov > va * vb)
                cov = (cov > 0 ? 1.0 : -1.0) * std::sqrt(va * vb);
            const double ssim =
                ((2.0 * mu_a[i] * mu_b[i] + kSsimC1) * (2.0 * cov + kSsimC2)) /
                ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kSsimC1) *
                 (va + vb + kSsimC2));
            s += ssim;
        }
        row_num[y] = s * wf.row_weight[y];
    }
    double num = 0.0, den = 0.0;
    for (int y = 0; y < h; ++y) {
        num += row_num[y];
        den += wf.row_weight[y] * w;
    }
    return num / den;
}

}  // namespace oiqa
