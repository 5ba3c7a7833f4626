#include "oiqa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace oiqa {

namespace {

int64_t shape_numel(const std::vector<int64_t>& shape) {
    if (shape.empty()) throw Error("tensor shape must have rank >= 1");
    int64_t n = 1;
    for (int64_t d : shape) {
        if (d <= 0) throw Error("tensor dims must be positive");
        n *= d;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape, float fill) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(shape_numel(shape_)), fill);
}

Tensor Tensor::gaussian(std::vector<int64_t> shape, uint64_t seed,
                        double stddev) {
    Tensor t(std::move(shape));
    const int64_t n = t.numel();
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i)
        t.flat(i) = static_cast<float>(stddev * hashed_normal(seed, i));
    return t;
}

Tensor Tensor::reshaped(std::vector<int64_t> new_shape) const {
    if (shape_numel(new_shape) != numel())
        throw Error("reshape changes element count");
    Tensor t = *this;
    t.shape_ = std::move(new_shape);
    return t;
}

void matmul(const float* a, const float* b, float* c, int64_t m, int64_t k,
            int64_t n) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
        float* ci = c + i * n;
        std::fill(ci, ci + n, 0.0f);
        const float* ai = a + i * k;
        for (int64_t kk = 0; kk < k; ++kk) {
            const float av = ai[kk];
            const float* bk = b + kk * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += av * bk[j];
        }
    }
}

void matmul_nt(const float* a, const float* b, float* c, int64_t m, int64_t k,
               int64_t n) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
        const float* ai = a + i * k;
        for (int64_t j = 0; j < n; ++j) {
            const float* bj = b + j * k;
            float s = 0.0f;
            for (int64_t kk = 0; kk < k; ++kk) s += ai[kk] * bj[kk];
            c[i * n + j] = s;
        }
    }
}

void softmax_rows(float* x, int64_t rows, int64_t cols) {
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < rows; ++r) {
        float* row = x + r * cols;
        float mx = row[0];
        for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, row[j]);
        float sum = 0.0f;
        for (int64_t j = 0; j < cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        const float inv = 1.0f / sum;
        for (int64_t j = 0; j < cols; ++j) row[j] *= inv;
    }
}

float gelu(float x) {
    return 0.5f * x * (1.0f + std::erf(x * 0.70710678118654752440f));
}

const Tensor& TensorContainer::get(const std::string& name) const {
    for (const auto& nt : tensors)
        if (nt.name == name) return nt.tensor;
    throw Error("tensor '" + name + "' not found in container");
}

namespace {

constexpr char kMagic[8] = {'O', 'I', 'Q', 'W', '0', '0', '0', '1'};

}  // namespace

void save_tensor_container(const std::string& path,
                           const std::vector<NamedTensor>& tensors,
                           const std::string& meta_json) {
    nlohmann::json header;
    header["dtype"] = "f32";
    header["meta"] =
        meta_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(meta_json);
    uint64_t offset = 0;
    for (const auto& nt : tensors) {
        nlohmann::json entry;
        entry["name"] = nt.name;
        entry["shape"] = nt.tensor.shape();
        entry["offset"] = offset;
        header["tensors"].push_back(entry);
        offset += static_cast<uint64_t>(nt.tensor.numel()) * sizeof(float);
    }
    const std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    const uint64_t hlen = hs.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& nt : tensors)
        out.write(reinterpret_cast<const char*>(nt.tensor.data()),
                  static_cast<std::streamsize>(nt.tensor.numel() * sizeof(float)));
    if (!out) throw Error("write failed: " + path);
}

TensorContainer load_tensor_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error(path + ": not a tensor container");
    uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw Error(path + ": truncated header");

    nlohmann::json header = nlohmann::json::parse(hs);
    TensorContainer c;
    c.meta_json = header.value("meta", nlohmann::json::object()).dump();
    for (const auto& entry : header["tensors"]) {
        NamedTensor nt;
        nt.name = entry["name"].get<std::string>();
        nt.tensor = Tensor(entry["shape"].get<std::vector<int64_t>>());
        in.read(reinterpret_cast<char*>(nt.tensor.data()),
                static_cast<std::streamsize>(nt.tensor.numel() * sizeof(float)));
        if (!in) throw Error(path + ": truncated payload for " + nt.name);
        c.tensors.push_back(std::move(nt));
    }
    return c;
}

}  // namespace oiqa
