#include "edgebin/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace edgebin {

const char* dtype_name(DType d) {
    switch (d) {
        case DType::F32: return "f32";
        case DType::F16: return "f16";
        case DType::I8: return "i8";
    }
    return "?";
}

DType dtype_from_name(const std::string& name) {
    if (name == "f32") return DType::F32;
    if (name == "f16") return DType::F16;
    if (name == "i8") return DType::I8;
    throw Error(ErrorCode::DTypeMismatch, "unknown dtype '" + name + "'");
}

size_t dtype_bytes(DType d) {
    switch (d) {
        case DType::F32: return 4;
        case DType::F16: return 2;
        case DType::I8: return 1;
    }
    return 0;
}

uint16_t f32_to_f16(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    uint32_t sign = (bits >> 16) & 0x8000u;
    uint32_t exp = (bits >> 23) & 0xffu;
    uint32_t mant = bits & 0x7fffffu;

    if (exp == 0xffu) {  // inf / nan
        return static_cast<uint16_t>(sign | 0x7c00u | (mant ? 0x200u : 0u));
    }
    int new_exp = static_cast<int>(exp) - 127 + 15;
    if (new_exp >= 0x1f) {  // overflow -> inf
        return static_cast<uint16_t>(sign | 0x7c00u);
    }
    if (new_exp <= 0) {  // subnormal or zero, round to nearest even
        if (new_exp < -10) return static_cast<uint16_t>(sign);
        mant |= 0x800000u;
        int shift = 14 - new_exp;
        uint32_t half = mant >> shift;
        uint32_t rem = mant & ((1u << shift) - 1);
        uint32_t halfway = 1u << (shift - 1);
        if (rem > halfway || (rem == halfway && (half & 1u))) half++;
        return static_cast<uint16_t>(sign | half);
    }
    // normal, round mantissa to 10 bits, nearest even
    uint32_t half_mant = mant >> 13;
    uint32_t rem = mant & 0x1fffu;
    if (rem > 0x1000u || (rem == 0x1000u && (half_mant & 1u))) {
        half_mant++;
        if (half_mant == 0x400u) {  // mantissa overflow bumps exponent
            half_mant = 0;
            new_exp++;
            if (new_exp >= 0x1f) return static_cast<uint16_t>(sign | 0x7c00u);
        }
    }
    return static_cast<uint16_t>(sign | (static_cast<uint32_t>(new_exp) << 10) | half_mant);
}

float f16_to_f32(uint16_t h) {
    uint32_t sign = (static_cast<uint32_t>(h) & 0x8000u) << 16;
    uint32_t exp = (h >> 10) & 0x1fu;
    uint32_t mant = h & 0x3ffu;
    uint32_t bits;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;
        } else {  // subnormal: normalize
            int e = -1;
            uint32_t m = mant;
            do {
                e++;
                m <<= 1;
            } while ((m & 0x400u) == 0);
            bits = sign | (static_cast<uint32_t>(127 - 15 - e) << 23) | ((m & 0x3ffu) << 13);
        }
    } else if (exp == 0x1fu) {
        bits = sign | 0x7f800000u | (mant << 13);
    } else {
        bits = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    float out;
    std::memcpy(&out, &bits, 4);
    return out;
}

int8_t QuantParams::quant(float r) const {
    // round half away from zero, then clamp to the int8 range
    long q = std::lround(static_cast<double>(r) / static_cast<double>(scale)) + zero_point;
    q = std::clamp(q, -128L, 127L);
    return static_cast<int8_t>(q);
}

int64_t shape_elem_count(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<int> shape, DType dtype, std::optional<QuantParams> quant)
    : shape_(std::move(shape)), dtype_(dtype), quant_(quant) {
    if (shape_.empty()) throw Error(ErrorCode::ShapeMismatch, "tensor shape must be non-empty");
    for (int d : shape_) {
        if (d <= 0)
            throw Error(ErrorCode::ShapeMismatch,
                        "tensor extents must be positive, got " + shape_to_string(shape_));
    }
    if ((dtype_ == DType::I8) != quant_.has_value())
        throw Error(ErrorCode::DTypeMismatch, "quant params present iff dtype is i8");
    if (quant_ && quant_->scale <= 0.0f)
        throw Error(ErrorCode::InvalidArgument, "quant scale must be positive");
    if (quant_ && (quant_->zero_point < -128 || quant_->zero_point > 127))
        throw Error(ErrorCode::InvalidArgument, "zero_point out of [-128,127]");
    data_.assign(static_cast<size_t>(elem_count()) * dtype_bytes(dtype_), 0);
}

Tensor Tensor::f32(std::vector<int> shape) { return Tensor(std::move(shape), DType::F32); }

Tensor Tensor::f32(std::vector<int> shape, std::vector<float> values) {
    Tensor t(std::move(shape), DType::F32);
    if (static_cast<int64_t>(values.size()) != t.elem_count())
        throw Error(ErrorCode::ShapeMismatch, "value count does not match shape " + t.shape_str());
    std::memcpy(t.data_.data(), values.data(), values.size() * 4);
    return t;
}

Tensor Tensor::f16(std::vector<int> shape, const std::vector<float>& values) {
    Tensor t(std::move(shape), DType::F16);
    if (static_cast<int64_t>(values.size()) != t.elem_count())
        throw Error(ErrorCode::ShapeMismatch, "value count does not match shape " + t.shape_str());
    uint16_t* out = t.f16_data();
    for (size_t i = 0; i < values.size(); ++i) out[i] = f32_to_f16(values[i]);
    return t;
}

Tensor Tensor::i8(std::vector<int> shape, std::vector<int8_t> values, QuantParams qp) {
    Tensor t(std::move(shape), DType::I8, qp);
    if (static_cast<int64_t>(values.size()) != t.elem_count())
        throw Error(ErrorCode::ShapeMismatch, "value count does not match shape " + t.shape_str());
    std::memcpy(t.data_.data(), values.data(), values.size());
    return t;
}

void Tensor::set_quant(std::optional<QuantParams> qp) {
    if ((dtype_ == DType::I8) != qp.has_value())
        throw Error(ErrorCode::DTypeMismatch, "quant params present iff dtype is i8");
    quant_ = qp;
}

int64_t Tensor::elem_count() const { return shape_elem_count(shape_); }

void Tensor::check_dtype(DType expect) const {
    if (dtype_ != expect)
        throw Error(ErrorCode::DTypeMismatch,
                    std::string("expected ") + dtype_name(expect) + " tensor, have " +
                        dtype_name(dtype_));
}

float* Tensor::f32_data() {
    check_dtype(DType::F32);
    return reinterpret_cast<float*>(data_.data());
}
const float* Tensor::f32_data() const {
    check_dtype(DType::F32);
    return reinterpret_cast<const float*>(data_.data());
}
uint16_t* Tensor::f16_data() {
    check_dtype(DType::F16);
    return reinterpret_cast<uint16_t*>(data_.data());
}
const uint16_t* Tensor::f16_data() const {
    check_dtype(DType::F16);
    return reinterpret_cast<const uint16_t*>(data_.data());
}
int8_t* Tensor::i8_data() {
    check_dtype(DType::I8);
    return reinterpret_cast<int8_t*>(data_.data());
}
const int8_t* Tensor::i8_data() const {
    check_dtype(DType::I8);
    return reinterpret_cast<const int8_t*>(data_.data());
}

float Tensor::value_at(int64_t i) const {
    switch (dtype_) {
        case DType::F32: return reinterpret_cast<const float*>(data_.data())[i];
        case DType::F16: return f16_to_f32(reinterpret_cast<const uint16_t*>(data_.data())[i]);
        case DType::I8: return quant_->dequant(reinterpret_cast<const int8_t*>(data_.data())[i]);
    }
    return 0.0f;
}

Tensor Tensor::to_f32() const {
    if (dtype_ == DType::F32) return *this;
    Tensor out(shape_, DType::F32);
    float* dst = out.f32_data();
    const int64_t n = elem_count();
    for (int64_t i = 0; i < n; ++i) dst[i] = value_at(i);
    return out;
}

bool Tensor::operator==(const Tensor& other) const {
    return shape_ == other.shape_ && dtype_ == other.dtype_ && quant_ == other.quant_ &&
           data_ == other.data_;
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

}  // namespace edgebin
