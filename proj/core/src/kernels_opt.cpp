#include <algorithm>
#include <vector>

#include "kernels.hpp"
#include "edgebin/shape_infer.hpp"

namespace edgebin::kernels {

namespace {
constexpr int kRowBlock = 32;
constexpr int kDepthBlock = 128;
}  // namespace

void gemm_blocked(const float* A, const float* B, double* C, int M, int K, int N, int threads) {
    parallel_for(M, threads, [&](int row_begin, int row_end) {
        std::fill(C + static_cast<int64_t>(row_begin) * N, C + static_cast<int64_t>(row_end) * N,
                  0.0);
        for (int i0 = row_begin; i0 < row_end; i0 += kRowBlock) {
            int i1 = std::min(row_end, i0 + kRowBlock);
            for (int k0 = 0; k0 < K; k0 += kDepthBlock) {
                int k1 = std::min(K, k0 + kDepthBlock);
                for (int i = i0; i < i1; ++i) {
                    const float* arow = A + static_cast<int64_t>(i) * K;
                    double* crow = C + static_cast<int64_t>(i) * N;
                    for (int k = k0; k < k1; ++k) {
                        double av = arow[k];
                        if (av == 0.0) continue;
                        const float* brow = B + static_cast<int64_t>(k) * N;
                        for (int j = 0; j < N; ++j) crow[j] += av * static_cast<double>(brow[j]);
                    }
                }
            }
        }
    });
}

namespace {

// im2col patch matrix: row per output pixel, columns ordered [ky][kx][c]
// to match the HWIO weight layout viewed as a [kh*kw*ic, oc] matrix.
void im2col(const ConvArgs& a, int pad_top, int pad_left, std::vector<float>& patches) {
    const int K = a.kh * a.kw * a.ic;
    patches.assign(static_cast<size_t>(a.oh) * a.ow * K, 0.0f);
    for (int oy = 0; oy < a.oh; ++oy) {
        for (int ox = 0; ox < a.ow; ++ox) {
            float* row = patches.data() + (static_cast<int64_t>(oy) * a.ow + ox) * K;
            for (int ky = 0; ky < a.kh; ++ky) {
                int iy = oy * a.stride + ky - pad_top;
                if (iy < 0 || iy >= a.ih) continue;
                for (int kx = 0; kx < a.kw; ++kx) {
                    int ix = ox * a.stride + kx - pad_left;
                    if (ix < 0 || ix >= a.iw) continue;
                    const float* src = a.in + (static_cast<int64_t>(iy) * a.iw + ix) * a.ic;
                    std::copy(src, src + a.ic, row + (static_cast<int64_t>(ky) * a.kw + kx) * a.ic);
                }
            }
        }
    }
}

void conv_epilogue(const double* acc, const float* bias, FusedAct act, float* out, int m, int n,
                   int threads) {
    parallel_for(m, threads, [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            const double* arow = acc + static_cast<int64_t>(i) * n;
            float* orow = out + static_cast<int64_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                double v = arow[j];
                if (bias) v += bias[j];
                orow[j] = static_cast<float>(apply_act(v, act));
            }
        }
    });
}

}  // namespace

void conv2d_opt(const ConvArgs& a) {
    const int M = a.oh * a.ow;
    const int K = a.kh * a.kw * a.ic;
    const int N = a.oc;
    std::vector<double> acc(static_cast<size_t>(M) * N);

    const bool pointwise = a.kh == 1 && a.kw == 1 && a.stride == 1;
    if (pointwise) {
        // 1x1 stride-1 conv is a plain GEMM on the activation buffer
        gemm_blocked(a.in, a.w, acc.data(), M, K, N, a.threads);
    } else {
        int pad_top = 0, pad_left = 0;
        if (a.same_pad) {
            pad_top = same_pad_amount(a.ih, a.kh, a.stride).before;
            pad_left = same_pad_amount(a.iw, a.kw, a.stride).before;
        }
        thread_local std::vector<float> patches;
        im2col(a, pad_top, pad_left, patches);
        gemm_blocked(patches.data(), a.w, acc.data(), M, K, N, a.threads);
    }
    conv_epilogue(acc.data(), a.bias, a.act, a.out, M, N, a.threads);
}

void depthwise_opt(const DepthwiseArgs& a) {
    int pad_top = 0, pad_left = 0;
    if (a.same_pad) {
        pad_top = same_pad_amount(a.ih, a.kh, a.stride).before;
        pad_left = same_pad_amount(a.iw, a.kw, a.stride).before;
    }
    parallel_for(a.oh, a.threads, [&](int oy_begin, int oy_end) {
        std::vector<double> acc(static_cast<size_t>(a.c));
        for (int oy = oy_begin; oy < oy_end; ++oy) {
            for (int ox = 0; ox < a.ow; ++ox) {
                std::fill(acc.begin(), acc.end(), 0.0);
                // channels are innermost in both the activation and the
                // HWC1 weight layout, so the c loop is contiguous
                for (int ky = 0; ky < a.kh; ++ky) {
                    int iy = oy * a.stride + ky - pad_top;
                    if (iy < 0 || iy >= a.ih) continue;
                    for (int kx = 0; kx < a.kw; ++kx) {
                        int ix = ox * a.stride + kx - pad_left;
                        if (ix < 0 || ix >= a.iw) continue;
                        const float* in_px = a.in + (static_cast<int64_t>(iy) * a.iw + ix) * a.c;
                        const float* w_px = a.w + (static_cast<int64_t>(ky) * a.kw + kx) * a.c;
                        for (int c = 0; c < a.c; ++c)
                            acc[static_cast<size_t>(c)] +=
                                static_cast<double>(in_px[c]) * static_cast<double>(w_px[c]);
                    }
                }
                float* out_px = a.out + (static_cast<int64_t>(oy) * a.ow + ox) * a.c;
                for (int c = 0; c < a.c; ++c) {
                    double v = acc[static_cast<size_t>(c)];
                    if (a.bias) v += a.bias[c];
                    out_px[c] = static_cast<float>(apply_act(v, a.act));
                }
            }
        }
    });
}

void dense_opt(const DenseArgs& a) {
    std::vector<double> acc(static_cast<size_t>(a.n));
    gemm_blocked(a.in, a.w, acc.data(), 1, a.k, a.n, 1);
    for (int j = 0; j < a.n; ++j) {
        double v = acc[static_cast<size_t>(j)];
        if (a.bias) v += a.bias[j];
        a.out[j] = static_cast<float>(apply_act(v, a.act));
    }
}

}  // namespace edgebin::kernels
