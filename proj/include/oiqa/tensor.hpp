#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oiqa/common.hpp"

namespace oiqa {

// Dense row-major float32 tensor. Just enough substrate for the forward
// model: flat storage, shape metadata, rank 2-4 accessors.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int64_t> shape, float fill = 0.0f);
    static Tensor gaussian(std::vector<int64_t> shape, uint64_t seed,
                           double stddev);

    const std::vector<int64_t>& shape() const { return shape_; }
    int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    float& flat(int64_t i) { return data_[static_cast<size_t>(i)]; }
    float flat(int64_t i) const { return data_[static_cast<size_t>(i)]; }

    float& at(int64_t a, int64_t b) { return data_[a * shape_[1] + b]; }
    float at(int64_t a, int64_t b) const { return data_[a * shape_[1] + b]; }
    float& at(int64_t a, int64_t b, int64_t c) {
        return data_[(a * shape_[1] + b) * shape_[2] + c];
    }
    float at(int64_t a, int64_t b, int64_t c) const {
        return data_[(a * shape_[1] + b) * shape_[2] + c];
    }
    float& at(int64_t a, int64_t b, int64_t c, int64_t d) {
        return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }
    float at(int64_t a, int64_t b, int64_t c, int64_t d) const {
        return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }

    // Same storage, new shape (numel must match).
    Tensor reshaped(std::vector<int64_t> new_shape) const;
    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

private:
    std::vector<int64_t> shape_;
    std::vector<float> data_;
};

// c[m x n] = a[m x k] * b[k x n]
void matmul(const float* a, const float* b, float* c, int64_t m, int64_t k,
            int64_t n);
// c[m x n] = a[m x k] * b[n x k]^T
void matmul_nt(const float* a, const float* b, float* c, int64_t m, int64_t k,
               int64_t n);

// In-place row softmax.
void softmax_rows(float* x, int64_t rows, int64_t cols);

// Exact GELU, 0.5 * x * (1 + erf(x / sqrt(2))).
float gelu(float x);

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

struct TensorContainer {
    std::string meta_json;
    std::vector<NamedTensor> tensors;
    const Tensor& get(const std::string& name) const;
};

// Flat binary tensor file: magic, a JSON header carrying names, shapes,
// dtype and byte offsets, then raw little-endian float32 payload.
void save_tensor_container(const std::string& path,
                           const std::vector<NamedTensor>& tensors,
                           const std::string& meta_json);
TensorContainer load_tensor_container(const std::string& path);

}  // namespace oiqa
