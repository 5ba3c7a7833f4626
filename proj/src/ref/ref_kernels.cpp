#include "ref/ref_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oiqa::ref {

namespace {

double to_db(double mse) {
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double row_weight(int j, int height) {
    return std::cos((j + 0.5 - height / 2.0) * kPi / height);
}

// Bilinear tap with wrap-x / clamp-y, recomputed here from first principles.
double sample_ref(const Raster& img, double x, double y, int c) {
    const int w = img.width, h = img.height;
    const double fx = x - 0.5, fy = y - 0.5;
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double ax = fx - x0, ay = fy - y0;
    auto wrap = [&](int xx) { return ((xx % w) + w) % w; };
    auto clampy = [&](int yy) { return std::clamp(yy, 0, h - 1); };
    const double v00 = img.at(wrap(x0), clampy(y0), c);
    const double v10 = img.at(wrap(x0 + 1), clampy(y0), c);
    const double v01 = img.at(wrap(x0), clampy(y0 + 1), c);
    const double v11 = img.at(wrap(x0 + 1), clampy(y0 + 1), c);
    return (1 - ax) * (1 - ay) * v00 + ax * (1 - ay) * v10 +
           (1 - ax) * ay * v01 + ax * ay * v11;
}

double luma_ref(const Raster& img, int x, int y) {
    return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
           0.114 * img.at(x, y, 2);
}

}  // namespace

double psnr_ref(const Raster& a, const Raster& b) {
    double s = 0.0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const double d =
                    static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
                s += d * d;
            }
    return to_db(s / (static_cast<double>(a.width) * a.height * 3.0));
}

double ws_psnr_ref(const Raster& a, const Raster& b) {
    double num = 0.0, den = 0.0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            const double w = row_weight(y, a.height);
            for (int c = 0; c < 3; ++c) {
                const double d =
                    static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
                num += w * d * d;
                den += w;
            }
        }
    return to_db(num / den);
}

double s_psnr_ref(const Raster& a, const Raster& b,
                  const std::vector<SphereDirection>& pts) {
    double s = 0.0;
    for (const auto& d : pts) {
        const double x =
            std::fmod((d.lon + kPi) / (2.0 * kPi) * a.width,
                      static_cast<double>(a.width));
        const double y = (kPi / 2.0 - d.lat) / kPi * a.height;
        for (int c = 0; c < 3; ++c) {
            const double diff = sample_ref(a, x, y, c) - sample_ref(b, x, y, c);
            s += diff * diff;
        }
    }
    return to_db(s / (pts.size() * 3.0));
}

double ws_ssim_ref(const Raster& a, const Raster& b) {
    const int w = a.width, h = a.height;
    constexpr int radius = 5;
    constexpr double sigma = 1.5;
    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

    // 2D window weights.
    double win[11][11];
    double wsum = 0.0;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            win[dy + radius][dx + radius] =
                std::exp(-(dx * dx) / (2 * sigma * sigma)) *
                std::exp(-(dy * dy) / (2 * sigma * sigma));
            wsum += win[dy + radius][dx + radius];
        }
    for (auto& row : win)
        for (double& v : row) v /= wsum;

    double num = 0.0, den = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double mu1 = 0, mu2 = 0, m11 = 0, m22 = 0, m12 = 0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    int xx = (x + dx) % w;
                    if (xx < 0) xx += w;
                    const int yy = std::clamp(y + dy, 0, h - 1);
                    const double wv = win[dy + radius][dx + radius];
                    const double va = luma_ref(a, xx, yy);
                    const double vb = luma_ref(b, xx, yy);
                    mu1 += wv * va;
                    mu2 += wv * vb;
                    m11 += wv * va * va;
                    m22 += wv * vb * vb;
                    m12 += wv * va * vb;
                }
            const double v1 = std::max(0.0, m11 - mu1 * mu1);
            const double v2 = std::max(0.0, m22 - mu2 * mu2);
            double cov = m12 - mu1 * mu2;
            if (cov * cov > v1 * v2)
                cov = (cov > 0 ? 1.0 : -1.0) * std::sqrt(v1 * v2);
            const double ssim = ((2 * mu1 * mu2 + c1) * (2 * cov + c2)) /
                                ((mu1 * mu1 + mu2 * mu2 + c1) * (v1 + v2 + c2));
            const double wv = row_weight(y, h);
            num += wv * ssim;
            den += wv;
        }
    return num / den;
}

CppRef cpp_project_ref(const Raster& src, int out_w, int out_h) {
    CppRef out;
    out.image = Raster(out_w, out_h);
    out.valid.assign(static_cast<size_t>(out_w) * out_h, 0);
    const double sx = std::sqrt(3.0 * kPi);
    const double sy = sx / 2.0;
    for (int v = 0; v < out_h; ++v)
        for (int u = 0; u < out_w; ++u) {
            const double px = (u + 0.5) / out_w * 2.0 * sx - sx;
            const double py = sy - (v + 0.5) / out_h * 2.0 * sy;
            const double s = py / std::sqrt(3.0 * kPi);
            if (std::abs(s) > std::sin(kPi / 6.0)) continue;
            const double lat = 3.0 * std::asin(s);
            const double denom =
                std::sqrt(3.0 / kPi) * (2.0 * std::cos(2.0 * lat / 3.0) - 1.0);
            if (denom <= 0.0) continue;
            const double lon = px / denom;
            if (lon < -kPi || lon >= kPi) continue;
            const double ex = std::fmod((lon + kPi) / (2.0 * kPi) * src.width,
                                        static_cast<double>(src.width));
            const double ey = (kPi / 2.0 - lat) / kPi * src.height;
            for (int c = 0; c < 3; ++c)
                out.image.at(u, v, c) =
                    static_cast<float>(sample_ref(src, ex, ey, c));
            out.valid[static_cast<size_t>(v) * out_w + u] = 1;
        }
    return out;
}

double cpp_psnr_ref(const Raster& a, const Raster& b, int out_w, int out_h) {
    const CppRef pa = cpp_project_ref(a, out_w, out_h);
    const CppRef pb = cpp_project_ref(b, out_w, out_h);
    double s = 0.0;
    long n = 0;
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) {
            const size_t i = static_cast<size_t>(y) * out_w + x;
            if (!pa.valid[i] || !pb.valid[i]) continue;
            for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(pa.image.at(x, y, c)) -
                                 pb.image.at(x, y, c);
                s += d * d;
            }
            ++n;
        }
    return to_db(s / (n * 3.0));
}

Raster extract_viewport_ref(const Raster& erp, const ViewportSpec& spec) {
    Raster out(spec.out_width, spec.out_height);
    const double tan_x = std::tan(deg_to_rad(spec.fov_deg) / 2.0);
    const double tan_y = tan_x * spec.out_height / spec.out_width;

    const double cy = std::cos(spec.center.lon), sy = std::sin(spec.center.lon);
    const double cp = std::cos(spec.center.lat), sp = std::sin(spec.center.lat);
    const double fwd[3] = {cp * cy, cp * sy, sp};
    const double rgt[3] = {-sy, cy, 0.0};
    const double up[3] = {-sp * cy, -sp * sy, cp};

    for (int v = 0; v < spec.out_height; ++v)
        for (int u = 0; u < spec.out_width; ++u) {
            const double xt = (2.0 * (u + 0.5) / spec.out_width - 1.0) * tan_x;
            const double yt = (1.0 - 2.0 * (v + 0.5) / spec.out_height) * tan_y;
            double d[3];
            for (int i = 0; i < 3; ++i) d[i] = fwd[i] + xt * rgt[i] + yt * up[i];
            const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
            for (double& x : d) x /= n;
            const double lat = std::asin(std::clamp(d[2], -1.0, 1.0));
            const double lon = std::atan2(d[1], d[0]);
            double ex = std::fmod((lon + kPi) / (2.0 * kPi) * erp.width,
                                  static_cast<double>(erp.width));
            if (ex < 0) ex += erp.width;
            const double ey = (kPi / 2.0 - lat) / kPi * erp.height;
            for (int c = 0; c < 3; ++c)
                out.at(u, v, c) = static_cast<float>(sample_ref(erp, ex, ey, c));
        }
    return out;
}

Raster gaussian_blur_ref(const Raster& src, double sigma) {
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

double spatial_information_ref(const Raster& img) {
    const int w = img.width, h = img.height;
    if (w < 3 || h < 3) return 0.0;
    double sum = 0.0, sq = 0.0;
    long n = 0;
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
            const double gx = -luma_ref(img, x - 1, y - 1) +
                              luma_ref(img, x + 1, y - 1) -
                              2 * luma_ref(img, x - 1, y) +
                              2 * luma_ref(img, x + 1, y) -
                              luma_ref(img, x - 1, y + 1) +
                              luma_ref(img, x + 1, y + 1);
            const double gy = -luma_ref(img, x - 1, y - 1) -
                              2 * luma_ref(img, x, y - 1) -
                              luma_ref(img, x + 1, y - 1) +
                              luma_ref(img, x - 1, y + 1) +
                              2 * luma_ref(img, x, y + 1) +
                              luma_ref(img, x + 1, y + 1);
            const double mag = std::sqrt(gx * gx + gy * gy);
            sum += mag;
            sq += mag * mag;
            ++n;
        }
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, sq / n - mean * mean));
}

double colorfulness_ref(const Raster& img) {
    double s_rg = 0, s2_rg = 0, s_yb = 0, s2_yb = 0;
    const long n = static_cast<long>(img.pixel_count());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double rg = static_cast<double>(img.at(x, y, 0)) - img.at(x, y, 1);
            const double yb =
                (static_cast<double>(img.at(x, y, 0)) + img.at(x, y, 1)) / 2.0 -
                img.at(x, y, 2);
            s_rg += rg;
            s2_rg += rg * rg;
            s_yb += yb;
            s2_yb += yb * yb;
        }
    const double mu_rg = s_rg / n, mu_yb = s_yb / n;
    const double var_rg = std::max(0.0, s2_rg / n - mu_rg * mu_rg);
    const double var_yb = std::max(0.0, s2_yb / n - mu_yb * mu_yb);
    return std::sqrt(var_rg + var_yb) +
           0.3 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb);
}

std::vector<double> matmul_ref(const std::vector<double>& a,
                               const std::vector<double>& b, int m, int k,
                               int n) {
    std::vector<double> c(static_cast<size_t>(m) * n, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int kk = 0; kk < k; ++kk)
                s += a[static_cast<size_t>(i) * k + kk] *
                     b[static_cast<size_t>(kk) * n + j];
            c[static_cast<size_t>(i) * n + j] = s;
        }
    return c;
}

std::vector<double> upsample_bilinear_ref(const std::vector<double>& src,
                                          int ih, int iw, int ch, int oh,
                                          int ow) {
    std::vector<double> out(static_cast<size_t>(oh) * ow * ch, 0.0);
    const double sy = static_cast<double>(ih) / oh;
    const double sx = static_cast<double>(iw) / ow;
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            const double fy = (y + 0.5) * sy - 0.5;
            const double fx = (x + 0.5) * sx - 0.5;
            const int y0 = static_cast<int>(std::floor(fy));
            const int x0 = static_cast<int>(std::floor(fx));
            const double ay = fy - y0, ax = fx - x0;
            const int y0c = std::clamp(y0, 0, ih - 1);
            const int y1c = std::clamp(y0 + 1, 0, ih - 1);
            const int x0c = std::clamp(x0, 0, iw - 1);
            const int x1c = std::clamp(x0 + 1, 0, iw - 1);
            for (int c = 0; c < ch; ++c) {
                auto v = [&](int yy, int xx) {
                    return src[(static_cast<size_t>(yy) * iw + xx) * ch + c];
                };
                out[(static_cast<size_t>(y) * ow + x) * ch + c] =
                    (1 - ay) * ((1 - ax) * v(y0c, x0c) + ax * v(y0c, x1c)) +
                    ay * ((1 - ax) * v(y1c, x0c) + ax * v(y1c, x1c));
            }
        }
    return out;
}

namespace {

std::vector<double> gap_ref(const Tensor& t) {
    const int64_t m = t.dim(0), hw = t.dim(1) * t.dim(2), ch = t.dim(3);
    std::vector<double> out(static_cast<size_t>(m) * ch, 0.0);
    for (int64_t v = 0; v < m; ++v) {
        for (int64_t p = 0; p < hw; ++p)
            for (int64_t c = 0; c < ch; ++c)
                out[v * ch + c] += t.flat((v * hw + p) * ch + c);
        for (int64_t c = 0; c < ch; ++c) out[v * ch + c] /= hw;
    }
    return out;
}

}  // namespace

std::vector<double> vac_ref(const Tensor& psi, const ModelWeights& w) {
    const int64_t m = psi.dim(0), ch = psi.dim(3);
    const int64_t per_vp = psi.numel() / m;
    const auto pooled = gap_ref(psi);

    std::vector<double> q(m), k(m);
    for (int64_t i = 0; i < m; ++i) {
        double sq = w.vac_q_b.flat(0), sk = w.vac_k_b.flat(0);
        for (int64_t c = 0; c < ch; ++c) {
            sq += pooled[i * ch + c] * w.vac_q_w.flat(c);
            sk += pooled[i * ch + c] * w.vac_k_w.flat(c);
        }
        q[i] = sq;
        k[i] = sk;
    }

    std::vector<double> vam(static_cast<size_t>(m) * m);
    for (int64_t i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int64_t j = 0; j < m; ++j) mx = std::max(mx, q[i] * k[j]);
        double sum = 0.0;
        for (int64_t j = 0; j < m; ++j) {
            vam[i * m + j] = std::exp(q[i] * k[j] - mx);
            sum += vam[i * m + j];
        }
        for (int64_t j = 0; j < m; ++j) vam[i * m + j] /= sum;
    }

    std::vector<double> out(psi.numel());
    const double omega = w.vac_omega.flat(0);
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < per_vp; ++j) {
            double s = 0.0;
            for (int64_t mm = 0; mm < m; ++mm)
                s += vam[i * m + mm] * psi.flat(mm * per_vp + j);
            out[i * per_vp + j] = s * omega + psi.flat(i * per_vp + j);
        }
    return out;
}

std::vector<double> acac_ref(const Tensor& v_hat, const ModelWeights& w) {
    const int64_t m = v_hat.dim(0), ch = v_hat.dim(3);
    const int64_t spatial = v_hat.dim(1) * v_hat.dim(2);
    const int64_t cols = m * spatial;
    const auto pooled = gap_ref(v_hat);

    std::vector<double> logits(static_cast<size_t>(ch) * ch, 0.0);
    for (int64_t i = 0; i < ch; ++i)
        for (int64_t j = 0; j < ch; ++j)
            for (int64_t v = 0; v < m; ++v)
                logits[i * ch + j] += pooled[v * ch + i] * pooled[v * ch + j];

    std::vector<double> cam(static_cast<size_t>(ch) * ch, 0.0);
    if (w.config.cam_axis == CamAxis::Column) {
        for (int64_t j = 0; j < ch; ++j) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int64_t i = 0; i < ch; ++i) mx = std::max(mx, logits[i * ch + j]);
            double sum = 0.0;
            for (int64_t i = 0; i < ch; ++i) {
                cam[i * ch + j] = std::exp(logits[i * ch + j] - mx);
                sum += cam[i * ch + j];
            }
            for (int64_t i = 0; i < ch; ++i) cam[i * ch + j] /= sum;
        }
    } else {
        for (int64_t i = 0; i < ch; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int64_t j = 0; j < ch; ++j) mx = std::max(mx, logits[i * ch + j]);
            double sum = 0.0;
            for (int64_t j = 0; j < ch; ++j) {
                cam[i * ch + j] = std::exp(logits[i * ch + j] - mx);
                sum += cam[i * ch + j];
            }
            for (int64_t j = 0; j < ch; ++j) cam[i * ch + j] /= sum;
        }
    }

    // V_v[c][(m,y,x)] = v_hat[m,y,x,c]
    std::vector<double> out(v_hat.numel());
    for (int64_t p = 0; p < cols; ++p)
        for (int64_t c = 0; c < ch; ++c) {
            double s = 0.0;
            for (int64_t cc = 0; cc < ch; ++cc)
                s += cam[c * ch + cc] * w.acac_w.flat(c * ch + cc) *
                     v_hat.flat(p * ch + cc);
            out[p * ch + c] = s + v_hat.flat(p * ch + c);
        }
    return out;
}

std::vector<double> vv_attention_ref(const Tensor& upsilon,
                                     const ModelWeights& w) {
    const int64_t tokens = upsilon.dim(0) * upsilon.dim(1);
    const int64_t ch = upsilon.dim(2);
    const int heads = w.config.heads;
    const int64_t dk = ch / heads;

    std::vector<double> cat(static_cast<size_t>(tokens) * ch, 0.0);
    for (int hd = 0; hd < heads; ++hd) {
        std::vector<double> q(static_cast<size_t>(tokens) * dk, 0.0);
        std::vector<double> k(q.size(), 0.0), v(q.size(), 0.0);
        for (int64_t t = 0; t < tokens; ++t)
            for (int64_t d = 0; d < dk; ++d) {
                double sq = 0, sk = 0, sv = 0;
                for (int64_t c = 0; c < ch; ++c) {
                    const double f = upsilon.flat(t * ch + c);
                    sq += f * w.vv_wq[hd].at(c, d);
                    sk += f * w.vv_wk[hd].at(c, d);
                    sv += f * w.vv_wv[hd].at(c, d);
                }
                q[t * dk + d] = sq;
                k[t * dk + d] = sk;
                v[t * dk + d] = sv;
            }
        for (int64_t i = 0; i < tokens; ++i) {
            std::vector<double> row(tokens);
            double mx = -std::numeric_limits<double>::infinity();
            for (int64_t j = 0; j < tokens; ++j) {
                double s = 0.0;
                for (int64_t d = 0; d < dk; ++d) s += q[i * dk + d] * k[j * dk + d];
                row[j] = s / std::sqrt(static_cast<double>(dk));
                mx = std::max(mx, row[j]);
            }
            double sum = 0.0;
            for (double& r : row) {
                r = std::exp(r - mx);
                sum += r;
            }
            for (double& r : row) r /= sum;
            for (int64_t d = 0; d < dk; ++d) {
                double s = 0.0;
                for (int64_t j = 0; j < tokens; ++j) s += row[j] * v[j * dk + d];
                cat[i * ch + hd * dk + d] = s;
            }
        }
    }

    std::vector<double> out(static_cast<size_t>(tokens) * ch, 0.0);
    for (int64_t t = 0; t < tokens; ++t)
        for (int64_t c = 0; c < ch; ++c) {
            double s = 0.0;
            for (int64_t cc = 0; cc < ch; ++cc)
                s += cat[t * ch + cc] * w.vv_wo.at(cc, c);
            out[t * ch + c] = s;
        }
    return out;
}

}  // namespace oiqa::ref
