#include "oiqa/oiqand.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace oiqa {

void ModelConfig::validate() const {
    if (viewports < 1) throw Error("model config: viewports must be >= 1");
    if (input_size < 8 || input_size % 8 != 0)
        throw Error("model config: input_size must be a positive multiple of 8");
    if (c_hat < 1 || heads < 1 || c_hat % heads != 0)
        throw Error("model config: c_hat must be a positive multiple of heads");
    if (mlp_hidden < 1) throw Error("model config: mlp_hidden must be >= 1");
    for (int c : {c1, c2, c3, c4})
        if (c < 1) throw Error("model config: stage channels must be >= 1");
}

namespace {

// Distinct seed streams per weight tensor.
uint64_t salt(uint64_t seed, uint64_t tag) { return hash_mix(seed, tag); }

constexpr double kInitStd = 0.02;

}  // namespace

ModelWeights ModelWeights::init(const ModelConfig& cfg, uint64_t seed) {
    cfg.validate();
    ModelWeights w;
    w.config = cfg;
    const int64_t ch = cfg.c_hat;
    const int64_t dk = cfg.c_hat / cfg.heads;

    const int64_t stage_c[4] = {cfg.c1, cfg.c2, cfg.c3, cfg.c4};
    for (int s = 0; s < 4; ++s)
        w.unify_w[s] = Tensor::gaussian({stage_c[s], ch}, salt(seed, 10 + s),
                                        kInitStd);
    w.mff_w = Tensor::gaussian({cfg.tokens_stage1(), cfg.tokens_concat()},
                               salt(seed, 20), kInitStd);
    w.mff_b = Tensor({cfg.tokens_stage1()});
    w.dap_w = Tensor::gaussian({4 * ch, ch}, salt(seed, 21), kInitStd);
    w.vac_q_w = Tensor::gaussian({ch}, salt(seed, 30), kInitStd);
    w.vac_k_w = Tensor::gaussian({ch}, salt(seed, 31), kInitStd);
    w.vac_q_b = Tensor({1});
    w.vac_k_b = Tensor({1});
    w.vac_omega = Tensor({1});  // residual identity at initialization
    w.acac_w = Tensor::gaussian({ch, ch}, salt(seed, 40), kInitStd);
    w.fuse_w = Tensor::gaussian({2 * ch, ch}, salt(seed, 50), kInitStd);
    for (int head = 0; head < cfg.heads; ++head) {
        w.vv_wq.push_back(
            Tensor::gaussian({ch, dk}, salt(seed, 100 + head), kInitStd));
        w.vv_wk.push_back(
            Tensor::gaussian({ch, dk}, salt(seed, 200 + head), kInitStd));
        w.vv_wv.push_back(
            Tensor::gaussian({ch, dk}, salt(seed, 300 + head), kInitStd));
    }
    w.vv_wo = Tensor::gaussian({ch, ch}, salt(seed, 60), kInitStd);
    w.mlp_w1 = Tensor::gaussian({ch, cfg.mlp_hidden}, salt(seed, 70), kInitStd);
    w.mlp_b1 = Tensor({cfg.mlp_hidden});
    w.mlp_w2 = Tensor::gaussian({cfg.mlp_hidden, 1}, salt(seed, 71), kInitStd);
    w.mlp_b2 = Tensor({1});
    w.head_w = Tensor::gaussian({cfg.total_tokens()}, salt(seed, 80), kInitStd);
    w.head_b = Tensor({1});
    return w;
}

namespace {

nlohmann::json config_to_json(const ModelConfig& c) {
    return {{"viewports", c.viewports},
            {"input_size", c.input_size},
            {"c1", c.c1},
            {"c2", c.c2},
            {"c3", c.c3},
            {"c4", c.c4},
            {"c_hat", c.c_hat},
            {"heads", c.heads},
            {"mlp_hidden", c.mlp_hidden},
            {"upsample", c.upsample == UpsampleMode::Bilinear ? "bilinear"
                                                              : "nearest"},
            {"cam_axis", c.cam_axis == CamAxis::Column ? "column" : "row"}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.viewports = j.at("viewports").get<int>();
    c.input_size = j.at("input_size").get<int>();
    c.c1 = j.at("c1").get<int>();
    c.c2 = j.at("c2").get<int>();
    c.c3 = j.at("c3").get<int>();
    c.c4 = j.at("c4").get<int>();
    c.c_hat = j.at("c_hat").get<int>();
    c.heads = j.at("heads").get<int>();
    c.mlp_hidden = j.at("mlp_hidden").get<int>();
    c.upsample = j.at("upsample").get<std::string>() == "nearest"
                     ? UpsampleMode::Nearest
                     : UpsampleMode::Bilinear;
    c.cam_axis = j.at("cam_axis").get<std::string>() == "row" ? CamAxis::Row
                                                              : CamAxis::Column;
    return c;
}

}  // namespace

void ModelWeights::save(const std::string& path) const {
    std::vector<NamedTensor> ts;
    for (int s = 0; s < 4; ++s)
        ts.push_back({"unify_w" + std::to_string(s + 1), unify_w[s]});
    ts.push_back({"mff_w", mff_w});
    ts.push_back({"mff_b", mff_b});
    ts.push_back({"dap_w", dap_w});
    ts.push_back({"vac_q_w", vac_q_w});
    ts.push_back({"vac_q_b", vac_q_b});
    ts.push_back({"vac_k_w", vac_k_w});
    ts.push_back({"vac_k_b", vac_k_b});
    ts.push_back({"vac_omega", vac_omega});
    ts.push_back({"acac_w", acac_w});
    ts.push_back({"fuse_w", fuse_w});
    for (int i = 0; i < config.heads; ++i) {
        ts.push_back({"vv_wq" + std::to_string(i), vv_wq[i]});
        ts.push_back({"vv_wk" + std::to_string(i), vv_wk[i]});
        ts.push_back({"vv_wv" + std::to_string(i), vv_wv[i]});
    }
    ts.push_back({"vv_wo", vv_wo});
    ts.push_back({"mlp_w1", mlp_w1});
    ts.push_back({"mlp_b1", mlp_b1});
    ts.push_back({"mlp_w2", mlp_w2});
    ts.push_back({"mlp_b2", mlp_b2});
    ts.push_back({"head_w", head_w});
    ts.push_back({"head_b", head_b});
    save_tensor_container(path, ts, config_to_json(config).dump());
}

ModelWeights ModelWeights::load(const std::string& path) {
    const TensorContainer c = load_tensor_container(path);
    ModelWeights w;
    w.config = config_from_json(nlohmann::json::parse(c.meta_json));
    w.config.validate();
    for (int s = 0; s < 4; ++s)
        w.unify_w[s] = c.get("unify_w" + std::to_string(s + 1));
    w.mff_w = c.get("mff_w");
    w.mff_b = c.get("mff_b");
    w.dap_w = c.get("dap_w");
    w.vac_q_w = c.get("vac_q_w");
    w.vac_q_b = c.get("vac_q_b");
    w.vac_k_w = c.get("vac_k_w");
    w.vac_k_b = c.get("vac_k_b");
    w.vac_omega = c.get("vac_omega");
    w.acac_w = c.get("acac_w");
    w.fuse_w = c.get("fuse_w");
    for (int i = 0; i < w.config.heads; ++i) {
        w.vv_wq.push_back(c.get("vv_wq" + std::to_string(i)));
        w.vv_wk.push_back(c.get("vv_wk" + std::to_string(i)));
        w.vv_wv.push_back(c.get("vv_wv" + std::to_string(i)));
    }
    w.vv_wo = c.get("vv_wo");
    w.mlp_w1 = c.get("mlp_w1");
    w.mlp_b1 = c.get("mlp_b1");
    w.mlp_w2 = c.get("mlp_w2");
    w.mlp_b2 = c.get("mlp_b2");
    w.head_w = c.get("head_w");
    w.head_b = c.get("head_b");
    return w;
}

namespace {

// Strided "patchify" conv: non-overlapping kernel = stride patches, edge
// replication when a patch reaches past the input (tiny smoke configs only).
Tensor patch_conv(const Tensor& in, int stride, int out_c, uint64_t seed,
                  bool pre_gelu) {
    const int64_t m = in.dim(0), ih = in.dim(1), iw = in.dim(2), ic = in.dim(3);
    const int64_t oh = std::max<int64_t>(1, ih / stride);
    const int64_t ow = std::max<int64_t>(1, iw / stride);
    const int64_t patch = static_cast<int64_t>(stride) * stride * ic;

    // He-style scale keeps feature magnitudes stable across stages.
    const double stddev = std::sqrt(2.0 / static_cast<double>(patch));
    const Tensor kernel = Tensor::gaussian({patch, out_c}, seed, stddev);

    Tensor rows({m * oh * ow, patch});
#pragma omp parallel for schedule(static) collapse(2)
    for (int64_t v = 0; v < m; ++v)
        for (int64_t y = 0; y < oh; ++y)
            for (int64_t x = 0; x < ow; ++x) {
                float* dst = rows.data() + ((v * oh + y) * ow + x) * patch;
                int64_t p = 0;
                for (int dy = 0; dy < stride; ++dy)
                    for (int dx = 0; dx < stride; ++dx) {
                        const int64_t sy = std::min(y * stride + dy, ih - 1);
                        const int64_t sx = std::min(x * stride + dx, iw - 1);
                        for (int64_t c = 0; c < ic; ++c) {
                            float val = in.at(v, sy, sx, c);
                            dst[p++] = pre_gelu ? gelu(val) : val;
                        }
                    }
            }

    Tensor out({m, oh, ow, out_c});
    matmul(rows.data(), kernel.data(), out.data(), m * oh * ow, patch, out_c);
    return out;
}

}  // namespace

FeatureStack backbone_stub(const std::vector<Viewport>& viewports,
                           uint64_t seed, const ModelConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(viewports.size()) != cfg.viewports)
        throw Error("backbone_stub: expected " + std::to_string(cfg.viewports) +
                    " viewports, got " + std::to_string(viewports.size()));
    for (const auto& vp : viewports)
        if (vp.image.width != cfg.input_size || vp.image.height != cfg.input_size)
            throw Error("backbone_stub: viewport dims must be " +
                        std::to_string(cfg.input_size) + "x" +
                        std::to_string(cfg.input_size));

    const int64_t m = cfg.viewports, s = cfg.input_size;
    Tensor input({m, s, s, 3});
#pragma omp parallel for schedule(static)
    for (int64_t v = 0; v < m; ++v)
        for (int64_t y = 0; y < s; ++y)
            for (int64_t x = 0; x < s; ++x)
                for (int c = 0; c < 3; ++c)
                    input.at(v, y, x, c) =
                        viewports[static_cast<size_t>(v)].image.at(
                            static_cast<int>(x), static_cast<int>(y), c);

    FeatureStack fs;
    fs.f1 = patch_conv(input, 8, cfg.c1, salt(seed, 1), false);
    fs.f2 = patch_conv(fs.f1, 2, cfg.c2, salt(seed, 2), true);
    fs.f3 = patch_conv(fs.f2, 2, cfg.c3, salt(seed, 3), true);
    fs.f4 = patch_conv(fs.f3, 1, cfg.c4, salt(seed, 4), true);
    return fs;
}

FeatureStack load_feature_stack(const std::string& path) {
    const TensorContainer c = load_tensor_container(path);
    FeatureStack fs;
    fs.f1 = c.get("f1");
    fs.f2 = c.get("f2");
    fs.f3 = c.get("f3");
    fs.f4 = c.get("f4");
    for (const Tensor* t : {&fs.f1, &fs.f2, &fs.f3, &fs.f4})
        if (t->rank() != 4) throw Error(path + ": feature stages must be rank 4");
    return fs;
}

void save_feature_stack(const FeatureStack& fs, const std::string& path) {
    save_tensor_container(
        path, {{"f1", fs.f1}, {"f2", fs.f2}, {"f3", fs.f3}, {"f4", fs.f4}}, "");
}

std::array<Tensor, 4> channel_unify(const FeatureStack& fs,
                                    const ModelWeights& w) {
    const Tensor* stages[4] = {&fs.f1, &fs.f2, &fs.f3, &fs.f4};
    std::array<Tensor, 4> out;
    for (int s = 0; s < 4; ++s) {
        const Tensor& f = *stages[s];
        const Tensor& k = w.unify_w[s];
        if (f.dim(3) != k.dim(0))
            throw Error("channel_unify: stage " + std::to_string(s + 1) +
                        " has " + std::to_string(f.dim(3)) +
                        " channels, weights expect " + std::to_string(k.dim(0)));
        out[s] = Tensor({f.dim(0), f.dim(1), f.dim(2), k.dim(1)});
        matmul(f.data(), k.data(), out[s].data(),
               f.dim(0) * f.dim(1) * f.dim(2), k.dim(0), k.dim(1));
    }
    return out;
}

Tensor mff(const std::array<Tensor, 4>& unified, const ModelWeights& w) {
    const int64_t m = unified[0].dim(0);
    const int64_t ch = unified[0].dim(3);
    int64_t n_concat = 0;
    for (const Tensor& t : unified) {
        if (t.dim(0) != m || t.dim(3) != ch)
            throw Error("mff: inconsistent stage shapes");
        n_concat += t.dim(1) * t.dim(2);
    }
    if (w.mff_w.dim(1) != n_concat)
        throw Error("mff: weights expect " + std::to_string(w.mff_w.dim(1)) +
                    " concatenated tokens, got " + std::to_string(n_concat));
    const int64_t t1 = w.mff_w.dim(0);

    // Spatial flatten is the identity on the row-major storage, so the
    // concatenation is a per-viewport copy of the four stage blocks.
    Tensor x_mf({m, n_concat, ch});
#pragma omp parallel for schedule(static)
    for (int64_t v = 0; v < m; ++v) {
        float* dst = x_mf.data() + v * n_concat * ch;
        for (const Tensor& t : unified) {
            const int64_t block = t.dim(1) * t.dim(2) * ch;
            const float* src = t.data() + v * block;
            std::copy(src, src + block, dst);
            dst += block;
        }
    }

    Tensor out({m, t1, ch});
    for (int64_t v = 0; v < m; ++v)
        matmul(w.mff_w.data(), x_mf.data() + v * n_concat * ch,
               out.data() + v * t1 * ch, t1, n_concat, ch);
#pragma omp parallel for schedule(static)
    for (int64_t v = 0; v < m; ++v)
        for (int64_t t = 0; t < t1; ++t) {
            const float b = w.mff_b.flat(t);
            float* row = out.data() + (v * t1 + t) * ch;
            for (int64_t c = 0; c < ch; ++c) row[c] += b;
        }
    return out;
}

namespace {

// Upsample one stage to (oh, ow). Half-pixel centers, edge clamp.
Tensor upsample_to(const Tensor& t, int64_t oh, int64_t ow, UpsampleMode mode) {
    const int64_t m = t.dim(0), ih = t.dim(1), iw = t.dim(2), ch = t.dim(3);
    Tensor out({m, oh, ow, ch});
    const double sy = static_cast<double>(ih) / oh;
    const double sx = static_cast<double>(iw) / ow;
#pragma omp parallel for schedule(static)
    for (int64_t v = 0; v < m; ++v)
        for (int64_t y = 0; y < oh; ++y)
            for (int64_t x = 0; x < ow; ++x) {
                if (mode == UpsampleMode::Nearest) {
                    const int64_t iy =
                        std::min<int64_t>(ih - 1, static_cast<int64_t>(
                                                      (y + 0.5) * sy));
                    const int64_t ix =
                        std::min<int64_t>(iw - 1, static_cast<int64_t>(
                                                      (x + 0.5) * sx));
                    for (int64_t c = 0; c < ch; ++c)
                        out.at(v, y, x, c) = t.at(v, iy, ix, c);
                    continue;
                }
                const double fy = (y + 0.5) * sy - 0.5;
                const double fx = (x + 0.5) * sx - 0.5;
                int64_t y0 = static_cast<int64_t>(std::floor(fy));
                int64_t x0 = static_cast<int64_t>(std::floor(fx));
                const double ay = fy - y0, ax = fx - x0;
                const int64_t y0c = std::clamp<int64_t>(y0, 0, ih - 1);
                const int64_t y1c = std::clamp<int64_t>(y0 + 1, 0, ih - 1);
                const int64_t x0c = std::clamp<int64_t>(x0, 0, iw - 1);
                const int64_t x1c = std::clamp<int64_t>(x0 + 1, 0, iw - 1);
                for (int64_t c = 0; c < ch; ++c) {
                    const double v00 = t.at(v, y0c, x0c, c);
                    const double v01 = t.at(v, y0c, x1c, c);
                    const double v10 = t.at(v, y1c, x0c, c);
                    const double v11 = t.at(v, y1c, x1c, c);
                    out.at(v, y, x, c) = static_cast<float>(
                        (1 - ay) * ((1 - ax) * v00 + ax * v01) +
                        ay * ((1 - ax) * v10 + ax * v11));
                }
            }
    return out;
}

// Spatial global average pool: M x H x W x C -> M x C.
Tensor gap_spatial(const Tensor& t) {
    const int64_t m = t.dim(0), hw = t.dim(1) * t.dim(2), ch = t.dim(3);
    Tensor out({m, ch});
#pragma omp parallel for schedule(static)
    for (int64_t v = 0; v < m; ++v) {
        for (int64_t p = 0; p < hw; ++p) {
            const float* src = t.data() + (v * hw + p) * ch;
            for (int64_t c = 0; c < ch; ++c) out.at(v, c) += src[c];
        }
        for (int64_t c = 0; c < ch; ++c) out.at(v, c) /= static_cast<float>(hw);
    }
    return out;
}

}  // namespace

Tensor dap_guidance(const std::array<Tensor, 4>& unified, const ModelWeights& w) {
    const Tensor& theta = unified[0];
    const int64_t m = theta.dim(0), oh = theta.dim(1), ow = theta.dim(2);
    const int64_t ch = theta.dim(3);
    if (w.dap_w.dim(0) != 4 * ch)
        throw Error("dap_guidance: weight shape mismatch");

    const Tensor up2 = upsample_to(unified[1], oh, ow, w.config.upsample);
    const Tensor up3 = upsample_to(unified[2], oh, ow, w.config.upsample);
    const Tensor up4 = upsample_to(unified[3], oh, ow, w.config.upsample);

    Tensor cat({m, oh, ow, 4 * ch});
#pragma omp parallel for schedule(static)
    for (int64_t v = 0; v < m; ++v)
        for (int64_t y = 0; y < oh; ++y)
            for (int64_t x = 0; x < ow; ++x) {
                float* dst = &cat.at(v, y, x, 0);
                const Tensor* parts[4] = {&theta, &up2, &up3, &up4};
                int64_t o = 0;
                for (const Tensor* part : parts)
                    for (int64_t c = 0; c < ch; ++c)
                        dst[o++] = part->at(v, y, x, c);
            }

    Tensor out({m, oh, ow, ch});
    matmul(cat.data(), w.dap_w.data(), out.data(), m * oh * ow, 4 * ch, ch);
    return out;
}

Tensor vac(const Tensor& psi, const ModelWeights& w, Tensor* vam_out) {
    const int64_t m = psi.dim(0);
    const int64_t per_vp = psi.numel() / m;
    const int64_t ch = psi.dim(3);

    const Tensor pooled = gap_spatial(psi);  // M x c_hat
    std::vector<float> q(m), k(m);
    for (int64_t i = 0; i < m; ++i) {
        float sq = w.vac_q_b.flat(0), sk = w.vac_k_b.flat(0);
        for (int64_t c = 0; c < ch; ++c) {
            sq += pooled.at(i, c) * w.vac_q_w.flat(c);
            sk += pooled.at(i, c) * w.vac_k_w.flat(c);
        }
        q[i] = sq;
        k[i] = sk;
    }

    Tensor vam({m, m});
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < m; ++j) vam.at(i, j) = q[i] * k[j];
    softmax_rows(vam.data(), m, m);
    if (vam_out) *vam_out = vam;

    // V = VAM * Psi_v with Psi_v the per-viewport flattening of Psi.
    Tensor out({psi.dim(0), psi.dim(1), psi.dim(2), psi.dim(3)});
    matmul(vam.data(), psi.data(), out.data(), m, m, per_vp);
    const float omega = w.vac_omega.flat(0);
    const int64_t n = psi.numel();
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i)
        out.flat(i) = out.flat(i) * omega + psi.flat(i);
    return out;
}

Tensor acac(const Tensor& v_hat, const ModelWeights& w, Tensor* cam_out) {
    const int64_t m = v_hat.dim(0), ch = v_hat.dim(3);
    const int64_t spatial = v_hat.dim(1) * v_hat.dim(2);
    const int64_t cols = m * spatial;

    const Tensor pooled = gap_spatial(v_hat);  // M x c_hat, rows of V_q

    // logits[i][j] = sum_m V_k[i][m] * V_q[m][j] = sum_m pooled[m][i] * pooled[m][j]
    Tensor logits({ch, ch});
    for (int64_t i = 0; i < ch; ++i)
        for (int64_t j = 0; j < ch; ++j) {
            float s = 0.0f;
            for (int64_t v = 0; v < m; ++v)
                s += pooled.at(v, i) * pooled.at(v, j);
            logits.at(i, j) = s;
        }

    Tensor cam({ch, ch});
    if (w.config.cam_axis == CamAxis::Row) {
        cam = logits;
        softmax_rows(cam.data(), ch, ch);
    } else {
        // Column softmax: normalize over the first index.
        for (int64_t j = 0; j < ch; ++j) {
            float mx = logits.at(0, j);
            for (int64_t i = 1; i < ch; ++i) mx = std::max(mx, logits.at(i, j));
            float sum = 0.0f;
            for (int64_t i = 0; i < ch; ++i) {
                cam.at(i, j) = std::exp(logits.at(i, j) - mx);
                sum += cam.at(i, j);
            }
            for (int64_t i = 0; i < ch; ++i) cam.at(i, j) /= sum;
        }
    }
    if (cam_out) *cam_out = cam;

    // gated[i][j] = CAM[i][j] * W[i][j]
    Tensor gated({ch, ch});
    for (int64_t i = 0; i < ch * ch; ++i)
        gated.flat(i) = cam.flat(i) * w.acac_w.flat(i);

    // V_v[c][(m,y,x)] = v_hat[m,y,x,c]
    Tensor v_v({ch, cols});
#pragma omp parallel for schedule(static)
    for (int64_t p = 0; p < cols; ++p) {
        const float* src = v_hat.data() + p * ch;
        for (int64_t c = 0; c < ch; ++c) v_v.at(c, p) = src[c];
    }

    Tensor mixed({ch, cols});
    matmul(gated.data(), v_v.data(), mixed.data(), ch, ch, cols);

    Tensor out({v_hat.dim(0), v_hat.dim(1), v_hat.dim(2), v_hat.dim(3)});
#pragma omp parallel for schedule(static)
    for (int64_t p = 0; p < cols; ++p) {
        const float* res = v_hat.data() + p * ch;
        float* dst = out.data() + p * ch;
        for (int64_t c = 0; c < ch; ++c) dst[c] = mixed.at(c, p) + res[c];
    }
    return out;
}

Tensor fuse(const Tensor& x_mff, const Tensor& f_cam, const ModelWeights& w) {
    const int64_t m = x_mff.dim(0), t1 = x_mff.dim(1), ch = x_mff.dim(2);
    if (f_cam.dim(0) != m || f_cam.dim(1) * f_cam.dim(2) != t1 ||
        f_cam.dim(3) != ch)
        throw Error("fuse: token counts do not match");
    if (w.fuse_w.dim(0) != 2 * ch) throw Error("fuse: weight shape mismatch");

    Tensor cat({m, t1, 2 * ch});
#pragma omp parallel for schedule(static)
    for (int64_t v = 0; v < m; ++v)
        for (int64_t t = 0; t < t1; ++t) {
            float* dst = &cat.at(v, t, 0);
            const float* dap = f_cam.data() + (v * t1 + t) * ch;
            const float* mf = x_mff.data() + (v * t1 + t) * ch;
            for (int64_t c = 0; c < ch; ++c) dst[c] = dap[c];
            for (int64_t c = 0; c < ch; ++c) dst[ch + c] = mf[c];
        }

    Tensor out({m, t1, ch});
    matmul(cat.data(), w.fuse_w.data(), out.data(), m * t1, 2 * ch, ch);
    return out;
}

Tensor vv_attention(const Tensor& upsilon, const ModelWeights& w,
                    std::vector<Tensor>* attn_out) {
    const int64_t tokens = upsilon.dim(0) * upsilon.dim(1);
    const int64_t ch = upsilon.dim(2);
    const int heads = w.config.heads;
    const int64_t dk = ch / heads;
    const float inv_sqrt_dk = 1.0f / std::sqrt(static_cast<float>(dk));
    const Tensor f = upsilon.reshaped({tokens, ch});

    if (attn_out) attn_out->clear();
    Tensor heads_cat({tokens, ch});
    Tensor q({tokens, dk}), kmat({tokens, dk}), v({tokens, dk});
    for (int hd = 0; hd < heads; ++hd) {
        matmul(f.data(), w.vv_wq[hd].data(), q.data(), tokens, ch, dk);
        matmul(f.data(), w.vv_wk[hd].data(), kmat.data(), tokens, ch, dk);
        matmul(f.data(), w.vv_wv[hd].data(), v.data(), tokens, ch, dk);

        Tensor full_attn;
        if (attn_out) full_attn = Tensor({tokens, tokens});

        // Row blocks keep the logits buffer small at full size.
        const int64_t block = std::min<int64_t>(tokens, 512);
#pragma omp parallel for schedule(dynamic)
        for (int64_t r0 = 0; r0 < tokens; r0 += block) {
            const int64_t rows = std::min(block, tokens - r0);
            Tensor logits({rows, tokens});
            matmul_nt(q.data() + r0 * dk, kmat.data(), logits.data(), rows, dk,
                      tokens);
            for (int64_t i = 0; i < rows * tokens; ++i)
                logits.flat(i) *= inv_sqrt_dk;
            softmax_rows(logits.data(), rows, tokens);
            if (attn_out)
                std::copy(logits.data(), logits.data() + rows * tokens,
                          full_attn.data() + r0 * tokens);
            Tensor blk({rows, dk});
            matmul(logits.data(), v.data(), blk.data(), rows, tokens, dk);
            for (int64_t i = 0; i < rows; ++i)
                for (int64_t d = 0; d < dk; ++d)
                    heads_cat.at(r0 + i, hd * dk + d) = blk.at(i, d);
        }
        if (attn_out) attn_out->push_back(std::move(full_attn));
    }

    Tensor out({tokens, ch});
    matmul(heads_cat.data(), w.vv_wo.data(), out.data(), tokens, ch, ch);
    return out;
}

double predict_quality(const Tensor& vf, const ModelWeights& w) {
    const int64_t tokens = vf.dim(0), ch = vf.dim(1);
    const int64_t hidden = w.mlp_w1.dim(1);
    if (w.head_w.dim(0) != tokens)
        throw Error("predict_quality: head expects " +
                    std::to_string(w.head_w.dim(0)) + " tokens, got " +
                    std::to_string(tokens));

    std::vector<double> o(tokens, 0.0);
#pragma omp parallel for schedule(static)
    for (int64_t t = 0; t < tokens; ++t) {
        double acc = 0.0;
        for (int64_t hid = 0; hid < hidden; ++hid) {
            float pre = w.mlp_b1.flat(hid);
            for (int64_t c = 0; c < ch; ++c)
                pre += vf.at(t, c) * w.mlp_w1.at(c, hid);
            acc += static_cast<double>(gelu(pre)) * w.mlp_w2.at(hid, 0);
        }
        o[t] = acc + w.mlp_b2.flat(0);
    }
    double q = w.head_b.flat(0);
    for (int64_t t = 0; t < tokens; ++t) q += w.head_w.flat(t) * o[t];
    return q;
}

double l2_loss(const std::vector<double>& predicted,
               const std::vector<double>& target) {
    if (predicted.empty()) throw Error("l2_loss: empty input");
    if (predicted.size() != target.size())
        throw Error("l2_loss: length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - target[i];
        s += d * d;
    }
    return s / predicted.size();
}

namespace {

StageSummary summarize_tensor(const std::string& name, const Tensor& t) {
    StageSummary s;
    s.name = name;
    s.shape = t.shape();
    double mn = t.flat(0), mx = t.flat(0), sum = 0.0;
    for (int64_t i = 0; i < t.numel(); ++i) {
        const double v = t.flat(i);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        sum += v;
    }
    s.min = mn;
    s.max = mx;
    s.mean = sum / t.numel();
    return s;
}

}  // namespace

ForwardResult forward(const FeatureStack& features, const ModelWeights& w,
                      bool collect_summaries) {
    ForwardResult res;
    auto note = [&](const std::string& name, const Tensor& t) {
        if (collect_summaries) res.summaries.push_back(summarize_tensor(name, t));
    };

    const auto unified = channel_unify(features, w);
    note("theta1", unified[0]);
    const Tensor x_mff = mff(unified, w);
    note("x_mff", x_mff);
    const Tensor psi = dap_guidance(unified, w);
    note("psi", psi);
    const Tensor v_hat = vac(psi, w);
    note("v_hat", v_hat);
    const Tensor f_cam = acac(v_hat, w);
    note("f_cam", f_cam);
    const Tensor upsilon = fuse(x_mff, f_cam, w);
    note("upsilon", upsilon);
    const Tensor vf = vv_attention(upsilon, w);
    note("vf", vf);
    res.q = predict_quality(vf, w);
    return res;
}

ForwardResult forward(const std::vector<Viewport>& viewports,
                      const ModelWeights& w, uint64_t backbone_seed,
                      bool collect_summaries) {
    const FeatureStack fs = backbone_stub(viewports, backbone_seed, w.config);
    return forward(fs, w, collect_summaries);
}

}  // namespace oiqa
