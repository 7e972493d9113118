#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "edgebin/errors.hpp"

namespace edgebin {

enum class DType { F32, F16, I8 };

const char* dtype_name(DType d);
DType dtype_from_name(const std::string& name);
size_t dtype_bytes(DType d);

// IEEE 754 binary16 conversions, round-to-nearest-even on the way down.
uint16_t f32_to_f16(float v);
float f16_to_f32(uint16_t h);

// Affine map between real values and stored int8:  real = scale * (q - zero_point).
struct QuantParams {
    float scale = 1.0f;       // > 0
    int zero_point = 0;       // in [-128, 127]

    float dequant(int q) const { return scale * static_cast<float>(q - zero_point); }
    int8_t quant(float r) const;

    bool operator==(const QuantParams&) const = default;
};

// N-dimensional array, row-major. Activations are HWC, conv weights HWIO.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<int> shape, DType dtype,
           std::optional<QuantParams> quant = std::nullopt);

    static Tensor f32(std::vector<int> shape);
    static Tensor f32(std::vector<int> shape, std::vector<float> values);
    static Tensor f16(std::vector<int> shape, const std::vector<float>& values);
    static Tensor i8(std::vector<int> shape, std::vector<int8_t> values, QuantParams qp);
    static Tensor scalar(float v) { return f32({1}, {v}); }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    DType dtype() const { return dtype_; }
    const std::optional<QuantParams>& quant() const { return quant_; }
    void set_quant(std::optional<QuantParams> qp);

    int64_t elem_count() const;
    size_t byte_size() const { return data_.size(); }

    float* f32_data();
    const float* f32_data() const;
    uint16_t* f16_data();
    const uint16_t* f16_data() const;
    int8_t* i8_data();
    const int8_t* i8_data() const;

    const uint8_t* raw() const { return data_.data(); }
    uint8_t* raw() { return data_.data(); }

    // Element read as a real value regardless of storage type
    // (i8 goes through its quant params, f16 through widening).
    float value_at(int64_t flat_index) const;

    // Copy converted to f32 storage (dequantizes i8, widens f16).
    Tensor to_f32() const;

    bool operator==(const Tensor& other) const;

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    DType dtype_ = DType::F32;
    std::vector<uint8_t> data_;
    std::optional<QuantParams> quant_;

    void check_dtype(DType expect) const;
};

int64_t shape_elem_count(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

}  // namespace edgebin
