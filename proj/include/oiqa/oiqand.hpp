#pragma once

#include <array>
#include <vector>

#include "oiqa/raster.hpp"
#include "oiqa/tensor.hpp"

namespace oiqa {

enum class UpsampleMode { Bilinear, Nearest };

// Softmax normalization axis of the channel attention matrix. Column makes
// every CAM column sum to 1 (the default reading); Row is the alternative.
enum class CamAxis { Column, Row };

struct ModelConfig {
    int viewports = 8;    // M
    int input_size = 224; // square viewport edge
    int c1 = 256, c2 = 512, c3 = 1024, c4 = 1024;
    int c_hat = 128;
    int heads = 4;
    int mlp_hidden = 64;
    UpsampleMode upsample = UpsampleMode::Bilinear;
    CamAxis cam_axis = CamAxis::Column;

    // Stage raster edges. Floor division, clamped to 1 so tiny smoke
    // configurations stay well-formed.
    int stage_edge(int divisor) const {
        return std::max(1, input_size / divisor);
    }
    int64_t tokens_stage1() const {
        return static_cast<int64_t>(stage_edge(8)) * stage_edge(8);
    }
    int64_t tokens_concat() const {
        auto sq = [](int64_t e) { return e * e; };
        return sq(stage_edge(8)) + sq(stage_edge(16)) + 2 * sq(stage_edge(32));
    }
    int64_t total_tokens() const { return viewports * tokens_stage1(); }

    void validate() const;
};

// Multi-scale backbone features, each stage M x He x We x Cs.
struct FeatureStack {
    Tensor f1, f2, f3, f4;
};

struct ModelWeights {
    ModelConfig config;

    std::array<Tensor, 4> unify_w;  // [Cs, c_hat] per stage
    Tensor mff_w;                   // [tokens_stage1, tokens_concat]
    Tensor mff_b;                   // [tokens_stage1]
    Tensor dap_w;                   // [4*c_hat, c_hat]
    Tensor vac_q_w, vac_k_w;        // [c_hat]
    Tensor vac_q_b, vac_k_b;        // [1]
    Tensor vac_omega;               // [1], initialized to 0
    Tensor acac_w;                  // [c_hat, c_hat] elementwise gate
    Tensor fuse_w;                  // [2*c_hat, c_hat]
    std::vector<Tensor> vv_wq, vv_wk, vv_wv;  // per head, [c_hat, d_k]
    Tensor vv_wo;                   // [c_hat, c_hat]
    Tensor mlp_w1, mlp_b1;          // [c_hat, hidden], [hidden]
    Tensor mlp_w2, mlp_b2;          // [hidden, 1], [1]
    Tensor head_w, head_b;          // [total_tokens], [1]

    // Gaussian(0, 0.02) matrices, zero biases, omega = 0.
    static ModelWeights init(const ModelConfig& cfg, uint64_t seed);
    void save(const std::string& path) const;
    static ModelWeights load(const std::string& path);
};

// Deterministic stand-in for the transformer backbone: a seeded
// random-projection conv pyramid with the four-stage output shapes.
FeatureStack backbone_stub(const std::vector<Viewport>& viewports,
                           uint64_t seed, const ModelConfig& cfg);

// Alternate path for externally computed features (tensor container with
// entries f1..f4).
FeatureStack load_feature_stack(const std::string& path);
void save_feature_stack(const FeatureStack& fs, const std::string& path);

// 1x1 convs unifying every stage to c_hat channels.
std::array<Tensor, 4> channel_unify(const FeatureStack& fs,
                                    const ModelWeights& w);

// Flatten stages over space, concatenate along the token axis, shared
// linear down to tokens_stage1 tokens. Returns M x tokens_stage1 x c_hat.
Tensor mff(const std::array<Tensor, 4>& unified, const ModelWeights& w);

// Upsample stages 2-4 to the stage-1 raster, concatenate channels (4*c_hat),
// 1x1 conv to c_hat. Returns M x He x We x c_hat.
Tensor dap_guidance(const std::array<Tensor, 4>& unified, const ModelWeights& w);

// Viewport attention. vam_out, when given, receives the M x M attention.
Tensor vac(const Tensor& psi, const ModelWeights& w, Tensor* vam_out = nullptr);

// Adaptive channel attention. cam_out receives the c_hat x c_hat matrix.
Tensor acac(const Tensor& v_hat, const ModelWeights& w, Tensor* cam_out = nullptr);

// Concatenate flattened DAP features with the MFF features channel-wise and
// project back to c_hat.
Tensor fuse(const Tensor& x_mff, const Tensor& f_cam, const ModelWeights& w);

// Multi-head self-attention over all viewport tokens. attn_out, when given,
// receives one T x T attention matrix per head.
Tensor vv_attention(const Tensor& upsilon, const ModelWeights& w,
                    std::vector<Tensor>* attn_out = nullptr);

// Two-layer GELU MLP to one value per token, then a linear over tokens.
double predict_quality(const Tensor& vf, const ModelWeights& w);

double l2_loss(const std::vector<double>& predicted,
               const std::vector<double>& target);

struct StageSummary {
    std::string name;
    std::vector<int64_t> shape;
    double min = 0, mean = 0, max = 0;
};

struct ForwardResult {
    double q = 0.0;
    std::vector<StageSummary> summaries;
};

// Full forward pass; pure function of (viewports, weights, backbone seed).
ForwardResult forward(const std::vector<Viewport>& viewports,
                      const ModelWeights& w, uint64_t backbone_seed,
                      bool collect_summaries = false);
ForwardResult forward(const FeatureStack& features, const ModelWeights& w,
                      bool collect_summaries = false);

}  // namespace oiqa
