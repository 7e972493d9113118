#include <algorithm>
#include <cmath>
#include <vector>

#include "kernels.hpp"
#include "edgebin/shape_infer.hpp"

namespace edgebin::kernels {

int8_t requantize(int64_t acc, double bias_real, FusedAct act, const QuantInfo& q) {
    double real = static_cast<double>(q.in_scale) * static_cast<double>(q.w_scale) *
                      static_cast<double>(acc) +
                  bias_real;
    real = apply_act(real, act);
    long v = std::lround(real / static_cast<double>(q.out_scale)) + q.out_zp;
    v = std::clamp(v, -128L, 127L);
    return static_cast<int8_t>(v);
}

namespace {
struct Pad2 {
    int top = 0, left = 0;
};
Pad2 pad_of(bool same_pad, int ih, int iw, int kh, int kw, int stride) {
    Pad2 p;
    if (same_pad) {
        p.top = same_pad_amount(ih, kh, stride).before;
        p.left = same_pad_amount(iw, kw, stride).before;
    }
    return p;
}
}  // namespace

void qconv2d_ref(const QConvArgs& a) {
    const Pad2 p = pad_of(a.same_pad, a.ih, a.iw, a.kh, a.kw, a.stride);
    const int in_zp = a.quant.in_zp;
    for (int oy = 0; oy < a.oh; ++oy) {
        for (int ox = 0; ox < a.ow; ++ox) {
            for (int oc = 0; oc < a.oc; ++oc) {
                int64_t acc = 0;
                for (int ky = 0; ky < a.kh; ++ky) {
                    int iy = oy * a.stride + ky - p.top;
                    if (iy < 0 || iy >= a.ih) continue;
                    for (int kx = 0; kx < a.kw; ++kx) {
                        int ix = ox * a.stride + kx - p.left;
                        if (ix < 0 || ix >= a.iw) continue;
                        const int8_t* in_px =
                            a.in + (static_cast<int64_t>(iy) * a.iw + ix) * a.ic;
                        const int8_t* w_px =
                            a.w + ((static_cast<int64_t>(ky) * a.kw + kx) * a.ic) * a.oc + oc;
                        for (int c = 0; c < a.ic; ++c)
                            acc += static_cast<int64_t>(in_px[c] - in_zp) *
                                   static_cast<int64_t>(w_px[static_cast<int64_t>(c) * a.oc]);
                    }
                }
                a.out[(static_cast<int64_t>(oy) * a.ow + ox) * a.oc + oc] =
                    requantize(acc, a.bias ? a.bias[oc] : 0.0, a.act, a.quant);
            }
        }
    }
}

void qconv2d_opt(const QConvArgs& a) {
    const Pad2 p = pad_of(a.same_pad, a.ih, a.iw, a.kh, a.kw, a.stride);
    const int M = a.oh * a.ow;
    const int K = a.kh * a.kw * a.ic;
    const int N = a.oc;

    // im2col with (q - zp) precomputed as int16; padding contributes zero
    std::vector<int16_t> patches(static_cast<size_t>(M) * K, 0);
    for (int oy = 0; oy < a.oh; ++oy) {
        for (int ox = 0; ox < a.ow; ++ox) {
            int16_t* row = patches.data() + (static_cast<int64_t>(oy) * a.ow + ox) * K;
            for (int ky = 0; ky < a.kh; ++ky) {
                int iy = oy * a.stride + ky - p.top;
                if (iy < 0 || iy >= a.ih) continue;
                for (int kx = 0; kx < a.kw; ++kx) {
                    int ix = ox * a.stride + kx - p.left;
                    if (ix < 0 || ix >= a.iw) continue;
                    const int8_t* src = a.in + (static_cast<int64_t>(iy) * a.iw + ix) * a.ic;
                    int16_t* dst = row + (static_cast<int64_t>(ky) * a.kw + kx) * a.ic;
                    for (int c = 0; c < a.ic; ++c)
                        dst[c] = static_cast<int16_t>(src[c] - a.quant.in_zp);
                }
            }
        }
    }

    parallel_for(M, a.threads, [&](int row_begin, int row_end) {
        std::vector<int32_t> acc(static_cast<size_t>(N));
        for (int i = row_begin; i < row_end; ++i) {
            std::fill(acc.begin(), acc.end(), 0);
            const int16_t* arow = patches.data() + static_cast<int64_t>(i) * K;
            for (int k = 0; k < K; ++k) {
                int32_t av = arow[k];
                if (av == 0) continue;
                const int8_t* brow = a.w + static_cast<int64_t>(k) * N;
                for (int j = 0; j < N; ++j) acc[static_cast<size_t>(j)] += av * brow[j];
            }
            int8_t* orow = a.out + static_cast<int64_t>(i) * N;
            for (int j = 0; j < N; ++j)
                orow[j] = requantize(acc[static_cast<size_t>(j)], a.bias ? a.bias[j] : 0.0,
                                     a.act, a.quant);
        }
    });
}

void qdepthwise_ref(const QDepthwiseArgs& a) {
    const Pad2 p = pad_of(a.same_pad, a.ih, a.iw, a.kh, a.kw, a.stride);
    for (int c = 0; c < a.c; ++c) {
        for (int oy = 0; oy < a.oh; ++oy) {
            for (int ox = 0; ox < a.ow; ++ox) {
                int64_t acc = 0;
                for (int ky = 0; ky < a.kh; ++ky) {
                    int iy = oy * a.stride + ky - p.top;
                    if (iy < 0 || iy >= a.ih) continue;
                    for (int kx = 0; kx < a.kw; ++kx) {
                        int ix = ox * a.stride + kx - p.left;
                        if (ix < 0 || ix >= a.iw) continue;
                        acc += static_cast<int64_t>(
                                   a.in[(static_cast<int64_t>(iy) * a.iw + ix) * a.c + c] -
                                   a.quant.in_zp) *
                               static_cast<int64_t>(
                                   a.w[(static_cast<int64_t>(ky) * a.kw + kx) * a.c + c]);
                    }
                }
                a.out[(static_cast<int64_t>(oy) * a.ow + ox) * a.c + c] =
                    requantize(acc, a.bias ? a.bias[c] : 0.0, a.act, a.quant);
            }
        }
    }
}

void qdepthwise_opt(const QDepthwiseArgs& a) {
    const Pad2 p = pad_of(a.same_pad, a.ih, a.iw, a.kh, a.kw, a.stride);
    parallel_for(a.oh, a.threads, [&](int oy_begin, int oy_end) {
        std::vector<int32_t> acc(static_cast<size_t>(a.c));
        for (int oy = oy_begin; oy < oy_end; ++oy) {
            for (int ox = 0; ox < a.ow; ++ox) {
                std::fill(acc.begin(), acc.end(), 0);
                for (int ky = 0; ky < a.kh; ++ky) {
                    int iy = oy * a.stride + ky - p.top;
                    if (iy < 0 || iy >= a.ih) continue;
                    for (int kx = 0; kx < a.kw; ++kx) {
                        int ix = ox * a.stride + kx - p.left;
                        if (ix < 0 || ix >= a.iw) continue;
                        const int8_t* in_px = a.in + (static_cast<int64_t>(iy) * a.iw + ix) * a.c;
                        const int8_t* w_px = a.w + (static_cast<int64_t>(ky) * a.kw + kx) * a.c;
                        for (int c = 0; c < a.c; ++c)
                            acc[static_cast<size_t>(c)] +=
                                (static_cast<int32_t>(in_px[c]) - a.quant.in_zp) *
                                static_cast<int32_t>(w_px[c]);
                    }
                }
                int8_t* out_px = a.out + (static_cast<int64_t>(oy) * a.ow + ox) * a.c;
                for (int c = 0; c < a.c; ++c)
                    out_px[c] = requantize(acc[static_cast<size_t>(c)],
                                           a.bias ? a.bias[c] : 0.0, a.act, a.quant);
            }
        }
    });
}

void qdense_ref(const QDenseArgs& a) {
    for (int j = 0; j < a.n; ++j) {
        int64_t acc = 0;
        for (int i = 0; i < a.k; ++i)
            acc += static_cast<int64_t>(a.in[i] - a.quant.in_zp) *
                   static_cast<int64_t>(a.w[static_cast<int64_t>(i) * a.n + j]);
        a.out[j] = requantize(acc, a.bias ? a.bias[j] : 0.0, a.act, a.quant);
    }
}

void qdense_opt(const QDenseArgs& a) {
    std::vector<int32_t> acc(static_cast<size_t>(a.n), 0);
    for (int i = 0; i < a.k; ++i) {
        int32_t av = a.in[i] - a.quant.in_zp;
        if (av == 0) continue;
        const int8_t* brow = a.w + static_cast<int64_t>(i) * a.n;
        for (int j = 0; j < a.n; ++j) acc[static_cast<size_t>(j)] += av * brow[j];
    }
    for (int j = 0; j < a.n; ++j)
        a.out[j] = requantize(acc[static_cast<size_t>(j)], a.bias ? a.bias[j] : 0.0, a.act,
                              a.quant);
}

}  // namespace edgebin::kernels
