#pragma once

// Low-level kernels behind the executor. Reference kernels are literal
// definition loops; optimized kernels use im2col + blocked GEMM and
// channel-contiguous depthwise. All float kernels accumulate in double so
// the two paths agree far inside the 1e-5 contract, and i8 kernels share
// one integer accumulation + requantization so the paths match bit-exactly.

#include <cstdint>
#include <functional>

#include "edgebin/graph.hpp"

namespace edgebin::kernels {

inline double apply_act(double v, FusedAct act) {
    switch (act) {
        case FusedAct::None: return v;
        case FusedAct::Relu: return v > 0.0 ? v : 0.0;
        case FusedAct::Relu6: return v < 0.0 ? 0.0 : (v > 6.0 ? 6.0 : v);
        case FusedAct::HSwish: {
            double r = v + 3.0;
            r = r < 0.0 ? 0.0 : (r > 6.0 ? 6.0 : r);
            return v * r / 6.0;
        }
    }
    return v;
}

struct ConvArgs {
    const float* in;  // HWC
    int ih, iw, ic;
    const float* w;  // HWIO
    int kh, kw, oc;
    const float* bias;  // [oc] or nullptr
    int stride;
    bool same_pad;  // false = valid
    FusedAct act;
    float* out;  // HWC
    int oh, ow;
    int threads = 1;
};

void conv2d_ref(const ConvArgs& a);
void conv2d_opt(const ConvArgs& a);

struct DepthwiseArgs {
    const float* in;
    int ih, iw, c;
    const float* w;  // [kh,kw,c,1]
    int kh, kw;
    const float* bias;  // [c] or nullptr
    int stride;
    bool same_pad;
    FusedAct act;
    float* out;
    int oh, ow;
    int threads = 1;
};

void depthwise_ref(const DepthwiseArgs& a);
void depthwise_opt(const DepthwiseArgs& a);

struct DenseArgs {
    const float* in;  // [k]
    int k;
    const float* w;  // [k, n]
    int n;
    const float* bias;  // [n] or nullptr
    FusedAct act;
    float* out;  // [n]
};

void dense_ref(const DenseArgs& a);
void dense_opt(const DenseArgs& a);

// C[M,N] (+)= A[M,K] * B[K,N], double accumulation, C zeroed inside.
void gemm_blocked(const float* A, const float* B, double* C, int M, int K, int N, int threads);

// ---- int8 ----

struct QuantInfo {
    float in_scale;
    int in_zp;
    float w_scale;  // symmetric weights, zero point 0
    float out_scale;
    int out_zp;
};

// Requantization epilogue shared by every i8 kernel: bias and activation
// applied in the real domain, round-half-away-from-zero back to int8.
int8_t requantize(int64_t acc, double bias_real, FusedAct act, const QuantInfo& q);

struct QConvArgs {
    const int8_t* in;
    int ih, iw, ic;
    const int8_t* w;  // HWIO
    int kh, kw, oc;
    const float* bias;  // real-valued, [oc] or nullptr
    int stride;
    bool same_pad;
    FusedAct act;
    QuantInfo quant;
    int8_t* out;
    int oh, ow;
    int threads = 1;
};

void qconv2d_ref(const QConvArgs& a);
void qconv2d_opt(const QConvArgs& a);

struct QDepthwiseArgs {
    const int8_t* in;
    int ih, iw, c;
    const int8_t* w;
    int kh, kw;
    const float* bias;
    int stride;
    bool same_pad;
    FusedAct act;
    QuantInfo quant;
    int8_t* out;
    int oh, ow;
    int threads = 1;
};

void qdepthwise_ref(const QDepthwiseArgs& a);
void qdepthwise_opt(const QDepthwiseArgs& a);

struct QDenseArgs {
    const int8_t* in;
    int k;
    const int8_t* w;  // [k, n]
    int n;
    const float* bias;
    FusedAct act;
    QuantInfo quant;
    int8_t* out;
};

void qdense_ref(const QDenseArgs& a);
void qdense_opt(const QDenseArgs& a);

// Runs fn(begin, end) over [0, total) split across `threads` std::threads.
// Each index is handled by exactly one worker, so results do not depend on
// the thread count.
void parallel_for(int total, int threads, const std::function<void(int, int)>& fn);

}  // namespace edgebin::kernels
