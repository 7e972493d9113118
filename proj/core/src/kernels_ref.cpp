#include <thread>
#include <vector>

#include "kernels.hpp"
#include "edgebin/shape_infer.hpp"

namespace edgebin::kernels {

void parallel_for(int total, int threads, const std::function<void(int, int)>& fn) {
    if (threads <= 1 || total <= 1) {
        fn(0, total);
        return;
    }
    int workers = std::min(threads, total);
    int chunk = (total + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        int begin = t * chunk;
        int end = std::min(total, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
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

// Literal sliding-window definition. Deliberately unblocked; this is the
// oracle the optimized kernels are checked against.
void conv2d_ref(const ConvArgs& a) {
    const Pad2 p = pad_of(a.same_pad, a.ih, a.iw, a.kh, a.kw, a.stride);
    for (int oy = 0; oy < a.oh; ++oy) {
        for (int ox = 0; ox < a.ow; ++ox) {
            for (int oc = 0; oc < a.oc; ++oc) {
                double acc = 0.0;
                for (int ky = 0; ky < a.kh; ++ky) {
                    int iy = oy * a.stride + ky - p.top;
                    if (iy < 0 || iy >= a.ih) continue;
                    for (int kx = 0; kx < a.kw; ++kx) {
                        int ix = ox * a.stride + kx - p.left;
                        if (ix < 0 || ix >= a.iw) continue;
                        const float* in_px = a.in + (static_cast<int64_t>(iy) * a.iw + ix) * a.ic;
                        const float* w_px =
                            a.w + ((static_cast<int64_t>(ky) * a.kw + kx) * a.ic) * a.oc + oc;
                        for (int c = 0; c < a.ic; ++c)
                            acc += static_cast<double>(in_px[c]) *
                                   static_cast<double>(w_px[static_cast<int64_t>(c) * a.oc]);
                    }
                }
                if (a.bias) acc += a.bias[oc];
                a.out[(static_cast<int64_t>(oy) * a.ow + ox) * a.oc + oc] =
                    static_cast<float>(apply_act(acc, a.act));
            }
        }
    }
}

void depthwise_ref(const DepthwiseArgs& a) {
    const Pad2 p = pad_of(a.same_pad, a.ih, a.iw, a.kh, a.kw, a.stride);
    for (int c = 0; c < a.c; ++c) {
        for (int oy = 0; oy < a.oh; ++oy) {
            for (int ox = 0; ox < a.ow; ++ox) {
                double acc = 0.0;
                for (int ky = 0; ky < a.kh; ++ky) {
                    int iy = oy * a.stride + ky - p.top;
                    if (iy < 0 || iy >= a.ih) continue;
                    for (int kx = 0; kx < a.kw; ++kx) {
                        int ix = ox * a.stride + kx - p.left;
                        if (ix < 0 || ix >= a.iw) continue;
                        acc += static_cast<double>(
                                   a.in[(static_cast<int64_t>(iy) * a.iw + ix) * a.c + c]) *
                               static_cast<double>(
                                   a.w[(static_cast<int64_t>(ky) * a.kw + kx) * a.c + c]);
                    }
                }
                if (a.bias) acc += a.bias[c];
                a.out[(static_cast<int64_t>(oy) * a.ow + ox) * a.c + c] =
                    static_cast<float>(apply_act(acc, a.act));
            }
        }
    }
}

void dense_ref(const DenseArgs& a) {
    for (int j = 0; j < a.n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < a.k; ++i)
            acc += static_cast<double>(a.in[i]) *
                   static_cast<double>(a.w[static_cast<int64_t>(i) * a.n + j]);
        if (a.bias) acc += a.bias[j];
        a.out[j] = static_cast<float>(apply_act(acc, a.act));
    }
}

}  // namespace edgebin::kernels
