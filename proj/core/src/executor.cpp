#include "edgebin/executor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "edgebin/datapipe.hpp"
#include "edgebin/shape_infer.hpp"
#include "kernels.hpp"

namespace edgebin {

const char* exec_path_name(ExecPath p) {
    return p == ExecPath::Reference ? "ref" : "opt";
}

ExecPath exec_path_from_name(const std::string& name) {
    if (name == "ref" || name == "reference") return ExecPath::Reference;
    if (name == "opt" || name == "optimized") return ExecPath::Optimized;
    throw Error(ErrorCode::InvalidArgument, "unknown execution path '" + name + "'");
}

namespace {

using kernels::QuantInfo;

FusedAct node_act(const Node& n) { return fused_act_from_name(attr_str_or(n, "act", "none")); }

Tensor as_f32(const Tensor& t) { return t.to_f32(); }

Tensor maybe_quantize_output(Tensor value, const Node& n) {
    if (!n.out_quant || n.kind == OpKind::Softmax) return value;
    if (value.dtype() == DType::I8) return value;
    const QuantParams qp = *n.out_quant;
    Tensor out(value.shape(), DType::I8, qp);
    int8_t* dst = out.i8_data();
    const float* src = value.f32_data();
    const int64_t count = value.elem_count();
    for (int64_t i = 0; i < count; ++i) dst[i] = qp.quant(src[i]);
    return out;
}

QuantInfo quant_info(const Node& n, const Tensor& x, const Tensor& w) {
    if (x.dtype() != DType::I8 || !x.quant())
        throw Error(ErrorCode::ExecFailure,
                    "quantized node " + std::to_string(n.id) + " requires an i8 input tensor");
    QuantInfo q;
    q.in_scale = x.quant()->scale;
    q.in_zp = x.quant()->zero_point;
    q.w_scale = w.quant()->scale;
    q.out_scale = n.out_quant->scale;
    q.out_zp = n.out_quant->zero_point;
    return q;
}

struct ConvShape {
    int oh, ow, oc;
};

ConvShape conv_shape(const Node& n, const std::vector<int>& x_shape, int oc) {
    auto kernel = attr_ints(n, "kernel");
    int stride = static_cast<int>(attr_int(n, "stride"));
    std::string padding = attr_str(n, "padding");
    return {conv_out_extent(x_shape[0], static_cast<int>(kernel[0]), stride, padding),
            conv_out_extent(x_shape[1], static_cast<int>(kernel[1]), stride, padding), oc};
}

Tensor exec_conv2d(const Node& n, const std::vector<const Tensor*>& ins, ExecPath path,
                   int threads) {
    const Tensor& x = *ins[0];
    const Tensor& w = *ins[1];
    const Tensor* bias = ins.size() > 2 ? ins[2] : nullptr;
    const int stride = static_cast<int>(attr_int(n, "stride"));
    const bool same_pad = attr_str(n, "padding") == "same";
    const FusedAct act = node_act(n);

    if (w.dtype() == DType::I8 && n.out_quant) {
        ConvShape os = conv_shape(n, x.shape(), w.dim(3));
        Tensor out({os.oh, os.ow, os.oc}, DType::I8, *n.out_quant);
        Tensor bias_f = bias ? bias->to_f32() : Tensor();
        kernels::QConvArgs a{x.i8_data(), x.dim(0), x.dim(1), x.dim(2),
                             w.i8_data(), w.dim(0), w.dim(1), w.dim(3),
                             bias ? bias_f.f32_data() : nullptr,
                             stride,      same_pad,  act,      quant_info(n, x, w),
                             out.i8_data(), os.oh,   os.ow,    threads};
        path == ExecPath::Reference ? kernels::qconv2d_ref(a) : kernels::qconv2d_opt(a);
        return out;
    }

    Tensor xf = as_f32(x);
    Tensor wf = as_f32(w);
    Tensor bf = bias ? bias->to_f32() : Tensor();
    ConvShape os = conv_shape(n, xf.shape(), wf.dim(3));
    Tensor out = Tensor::f32({os.oh, os.ow, os.oc});
    kernels::ConvArgs a{xf.f32_data(), xf.dim(0), xf.dim(1), xf.dim(2),
                        wf.f32_data(), wf.dim(0), wf.dim(1), wf.dim(3),
                        bias ? bf.f32_data() : nullptr,
                        stride,        same_pad,  act,
                        out.f32_data(), os.oh,    os.ow,     threads};
    path == ExecPath::Reference ? kernels::conv2d_ref(a) : kernels::conv2d_opt(a);
    return maybe_quantize_output(std::move(out), n);
}

Tensor exec_depthwise(const Node& n, const std::vector<const Tensor*>& ins, ExecPath path,
                      int threads) {
    const Tensor& x = *ins[0];
    const Tensor& w = *ins[1];
    const Tensor* bias = ins.size() > 2 ? ins[2] : nullptr;
    const int stride = static_cast<int>(attr_int(n, "stride"));
    const bool same_pad = attr_str(n, "padding") == "same";
    const FusedAct act = node_act(n);

    if (w.dtype() == DType::I8 && n.out_quant) {
        ConvShape os = conv_shape(n, x.shape(), x.dim(2));
        Tensor out({os.oh, os.ow, os.oc}, DType::I8, *n.out_quant);
        Tensor bias_f = bias ? bias->to_f32() : Tensor();
        kernels::QDepthwiseArgs a{x.i8_data(), x.dim(0), x.dim(1), x.dim(2),
                                  w.i8_data(), w.dim(0), w.dim(1),
                                  bias ? bias_f.f32_data() : nullptr,
                                  stride,      same_pad,  act,     quant_info(n, x, w),
                                  out.i8_data(), os.oh,   os.ow,   threads};
        path == ExecPath::Reference ? kernels::qdepthwise_ref(a) : kernels::qdepthwise_opt(a);
        return out;
    }

    Tensor xf = as_f32(x);
    Tensor wf = as_f32(w);
    Tensor bf = bias ? bias->to_f32() : Tensor();
    ConvShape os = conv_shape(n, xf.shape(), xf.dim(2));
    Tensor out = Tensor::f32({os.oh, os.ow, os.oc});
    kernels::DepthwiseArgs a{xf.f32_data(), xf.dim(0), xf.dim(1), xf.dim(2),
                             wf.f32_data(), wf.dim(0), wf.dim(1),
                             bias ? bf.f32_data() : nullptr,
                             stride,        same_pad,  act,
                             out.f32_data(), os.oh,    os.ow,    threads};
    path == ExecPath::Reference ? kernels::depthwise_ref(a) : kernels::depthwise_opt(a);
    return maybe_quantize_output(std::move(out), n);
}

Tensor exec_dense(const Node& n, const std::vector<const Tensor*>& ins, ExecPath path) {
    const Tensor& x = *ins[0];
    const Tensor& w = *ins[1];
    const Tensor* bias = ins.size() > 2 ? ins[2] : nullptr;
    const FusedAct act = node_act(n);
    const int units = static_cast<int>(attr_int(n, "units"));
    const int k = static_cast<int>(x.elem_count());
    if (w.dim(0) != k)
        throw Error(ErrorCode::ShapeMismatch,
                    "dense input " + x.shape_str() + " does not flatten to " +
                        std::to_string(w.dim(0)));

    if (w.dtype() == DType::I8 && n.out_quant) {
        Tensor out({units}, DType::I8, *n.out_quant);
        Tensor bias_f = bias ? bias->to_f32() : Tensor();
        kernels::QDenseArgs a{x.i8_data(), k,   w.i8_data(),
                              units,       bias ? bias_f.f32_data() : nullptr,
                              act,         quant_info(n, x, w), out.i8_data()};
        path == ExecPath::Reference ? kernels::qdense_ref(a) : kernels::qdense_opt(a);
        return out;
    }

    Tensor xf = as_f32(x);
    Tensor wf = as_f32(w);
    Tensor bf = bias ? bias->to_f32() : Tensor();
    Tensor out = Tensor::f32({units});
    kernels::DenseArgs a{xf.f32_data(), k,   wf.f32_data(),
                         units,         bias ? bf.f32_data() : nullptr,
                         act,           out.f32_data()};
    path == ExecPath::Reference ? kernels::dense_ref(a) : kernels::dense_opt(a);
    return maybe_quantize_output(std::move(out), n);
}

Tensor exec_batch_norm(const Node& n, const std::vector<const Tensor*>& ins) {
    Tensor x = as_f32(*ins[0]);
    Tensor gamma = as_f32(*ins[1]);
    Tensor beta = as_f32(*ins[2]);
    Tensor mean = as_f32(*ins[3]);
    Tensor var = as_f32(*ins[4]);
    const double eps = attr_double_or(n, "epsilon", 1e-3);
    const int c = x.dim(2);
    if (gamma.elem_count() != c || beta.elem_count() != c || mean.elem_count() != c ||
        var.elem_count() != c)
        throw Error(ErrorCode::ShapeMismatch, "batch-norm parameters must be [channels]");

    std::vector<double> scale(static_cast<size_t>(c)), shift(static_cast<size_t>(c));
    for (int i = 0; i < c; ++i) {
        double s = static_cast<double>(gamma.f32_data()[i]) /
                   std::sqrt(static_cast<double>(var.f32_data()[i]) + eps);
        scale[static_cast<size_t>(i)] = s;
        shift[static_cast<size_t>(i)] = static_cast<double>(beta.f32_data()[i]) -
                                        static_cast<double>(mean.f32_data()[i]) * s;
    }
    Tensor out = Tensor::f32(x.shape());
    const float* src = x.f32_data();
    float* dst = out.f32_data();
    const int64_t pixels = x.elem_count() / c;
    for (int64_t p = 0; p < pixels; ++p)
        for (int i = 0; i < c; ++i)
            dst[p * c + i] = static_cast<float>(src[p * c + i] * scale[static_cast<size_t>(i)] +
                                                shift[static_cast<size_t>(i)]);
    return maybe_quantize_output(std::move(out), n);
}

Tensor exec_elementwise_act(const Node& n, const Tensor& in) {
    Tensor x = as_f32(in);
    Tensor out = Tensor::f32(x.shape());
    const float* src = x.f32_data();
    float* dst = out.f32_data();
    const int64_t count = x.elem_count();
    for (int64_t i = 0; i < count; ++i) {
        double v = src[i];
        switch (n.kind) {
            case OpKind::ReLU: v = v > 0.0 ? v : 0.0; break;
            case OpKind::ReLU6: v = kernels::apply_act(v, FusedAct::Relu6); break;
            case OpKind::HardSwish: v = kernels::apply_act(v, FusedAct::HSwish); break;
            case OpKind::HardSigmoid: {
                double r = v + 3.0;
                r = r < 0.0 ? 0.0 : (r > 6.0 ? 6.0 : r);
                v = r / 6.0;
                break;
            }
            default: break;
        }
        dst[i] = static_cast<float>(v);
    }
    return maybe_quantize_output(std::move(out), n);
}

Tensor exec_pool(const Node& n, const Tensor& in) {
    Tensor x = as_f32(in);
    const int ih = x.dim(0), iw = x.dim(1), c = x.dim(2);
    int window, stride;
    std::string padding;
    if (n.kind == OpKind::GlobalAvgPool) {
        window = std::max(ih, iw);  // unused
        stride = 1;
        padding = "valid";
    } else {
        window = static_cast<int>(attr_int(n, "window"));
        stride = static_cast<int>(attr_int(n, "stride"));
        padding = attr_str(n, "padding");
    }

    int oh, ow;
    if (n.kind == OpKind::GlobalAvgPool) {
        oh = ow = 1;
    } else {
        oh = conv_out_extent(ih, window, stride, padding);
        ow = conv_out_extent(iw, window, stride, padding);
    }
    Tensor out = Tensor::f32({oh, ow, c});
    const float* src = x.f32_data();
    float* dst = out.f32_data();

    if (n.kind == OpKind::GlobalAvgPool) {
        for (int ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (int y = 0; y < ih; ++y)
                for (int xply = 0; xply < iw; ++xply)
                    acc += src[(static_cast<int64_t>(y) * iw + xply) * c + ch];
            dst[ch] = static_cast<float>(acc / (static_cast<double>(ih) * iw));
        }
        return maybe_quantize_output(std::move(out), n);
    }

    int pad_top = 0, pad_left = 0;
    if (padding == "same") {
        pad_top = same_pad_amount(ih, window, stride).before;
        pad_left = same_pad_amount(iw, window, stride).before;
    }
    const bool is_avg = n.kind == OpKind::AvgPool;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int ch = 0; ch < c; ++ch) {
                double acc = is_avg ? 0.0 : -std::numeric_limits<double>::infinity();
                int valid = 0;  // average excludes padding cells
                for (int ky = 0; ky < window; ++ky) {
                    int iy = oy * stride + ky - pad_top;
                    if (iy < 0 || iy >= ih) continue;
                    for (int kx = 0; kx < window; ++kx) {
                        int ix = ox * stride + kx - pad_left;
                        if (ix < 0 || ix >= iw) continue;
                        double v = src[(static_cast<int64_t>(iy) * iw + ix) * c + ch];
                        if (is_avg) {
                            acc += v;
                            valid++;
                        } else {
                            acc = std::max(acc, v);
                        }
                    }
                }
                dst[(static_cast<int64_t>(oy) * ow + ox) * c + ch] =
                    static_cast<float>(is_avg ? acc / std::max(valid, 1) : acc);
            }
        }
    }
    return maybe_quantize_output(std::move(out), n);
}

Tensor exec_softmax(const Tensor& in) {
    Tensor x = as_f32(in);
    Tensor out = Tensor::f32(x.shape());
    const int last = x.dim(x.rank() - 1);
    const int64_t rows = x.elem_count() / last;
    const float* src = x.f32_data();
    float* dst = out.f32_data();
    for (int64_t r = 0; r < rows; ++r) {
        const float* row = src + r * last;
        float* orow = dst + r * last;
        double mx = row[0];
        for (int i = 1; i < last; ++i) mx = std::max(mx, static_cast<double>(row[i]));
        double sum = 0.0;
        std::vector<double> e(static_cast<size_t>(last));
        for (int i = 0; i < last; ++i) {
            e[static_cast<size_t>(i)] = std::exp(static_cast<double>(row[i]) - mx);
            sum += e[static_cast<size_t>(i)];
        }
        for (int i = 0; i < last; ++i)
            orow[i] = static_cast<float>(e[static_cast<size_t>(i)] / sum);
    }
    return out;  // softmax output stays f32 (host-side op)
}

Tensor exec_binary(const Node& n, const Tensor& lhs, const Tensor& rhs) {
    Tensor a = as_f32(lhs);
    Tensor b = as_f32(rhs);
    std::vector<std::vector<int>> in_shapes{a.shape(), b.shape()};
    Graph dummy;
    std::vector<int> out_shape = infer_node_shape(dummy, n, in_shapes);
    Tensor out = Tensor::f32(out_shape);

    const int rank = static_cast<int>(out_shape.size());
    auto broadcast_strides = [&](const Tensor& t) {
        std::vector<int64_t> strides(static_cast<size_t>(rank), 0);
        if (t.rank() == 1 && t.dim(0) == 1) return strides;  // scalar
        int64_t s = 1;
        for (int i = t.rank() - 1; i >= 0; --i) {
            int out_dim = out_shape[static_cast<size_t>(rank - t.rank() + i)];
            strides[static_cast<size_t>(rank - t.rank() + i)] = t.dim(i) == 1 ? 0 : s;
            (void)out_dim;
            s *= t.dim(i);
        }
        return strides;
    };
    auto sa = broadcast_strides(a);
    auto sb = broadcast_strides(b);

    const float* pa = a.f32_data();
    const float* pb = b.f32_data();
    float* dst = out.f32_data();
    const int64_t count = out.elem_count();
    std::vector<int> idx(static_cast<size_t>(rank), 0);
    for (int64_t flat = 0; flat < count; ++flat) {
        int64_t oa = 0, ob = 0;
        int64_t rem = flat;
        for (int i = rank - 1; i >= 0; --i) {
            int d = out_shape[static_cast<size_t>(i)];
            int cur = static_cast<int>(rem % d);
            rem /= d;
            oa += cur * sa[static_cast<size_t>(i)];
            ob += cur * sb[static_cast<size_t>(i)];
        }
        double v = n.kind == OpKind::Add
                       ? static_cast<double>(pa[oa]) + static_cast<double>(pb[ob])
                       : static_cast<double>(pa[oa]) * static_cast<double>(pb[ob]);
        dst[flat] = static_cast<float>(v);
    }
    return maybe_quantize_output(std::move(out), n);
}

Tensor exec_pad(const Node& n, const Tensor& in) {
    Tensor x = as_f32(in);
    auto pads = attr_ints(n, "pads");
    const double value = attr_double_or(n, "value", 0.0);
    if (pads.size() != 2 * static_cast<size_t>(x.rank()))
        throw Error(ErrorCode::ShapeMismatch, "pads must list before/after per dimension");
    std::vector<int> out_shape(static_cast<size_t>(x.rank()));
    for (int i = 0; i < x.rank(); ++i)
        out_shape[static_cast<size_t>(i)] =
            x.dim(i) + static_cast<int>(pads[2 * static_cast<size_t>(i)] +
                                        pads[2 * static_cast<size_t>(i) + 1]);
    Tensor out = Tensor::f32(out_shape);
    float* dst = out.f32_data();
    std::fill(dst, dst + out.elem_count(), static_cast<float>(value));

    // copy the body; supports arbitrary rank via index arithmetic
    const float* src = x.f32_data();
    const int rank = x.rank();
    std::vector<int> idx(static_cast<size_t>(rank), 0);
    const int64_t count = x.elem_count();
    for (int64_t flat = 0; flat < count; ++flat) {
        int64_t rem = flat;
        int64_t oflat = 0;
        int64_t stride = 1;
        for (int i = rank - 1; i >= 0; --i) {
            int cur = static_cast<int>(rem % x.dim(i));
            rem /= x.dim(i);
            oflat += (cur + pads[2 * static_cast<size_t>(i)]) * stride;
            stride *= out_shape[static_cast<size_t>(i)];
        }
        dst[oflat] = src[flat];
    }
    return maybe_quantize_output(std::move(out), n);
}

Tensor exec_reshape(const Node& n, const Tensor& in) {
    auto target = attr_ints(n, "shape");
    std::vector<int> out_shape(target.begin(), target.end());
    if (shape_elem_count(out_shape) != in.elem_count())
        throw Error(ErrorCode::ShapeMismatch,
                    "reshape to " + shape_to_string(out_shape) + " changes element count");
    Tensor out(out_shape, in.dtype(), in.quant());
    std::memcpy(out.raw(), in.raw(), in.byte_size());
    return out;
}

Tensor exec_resize(const Node& n, const Tensor& in) {
    Tensor x = as_f32(in);
    const int h = static_cast<int>(attr_int(n, "height"));
    const int w = static_cast<int>(attr_int(n, "width"));
    Tensor out = resize_bilinear(x, w, h);
    return maybe_quantize_output(std::move(out), n);
}

Tensor exec_input(const Node& n, const Tensor& fed) {
    auto want = attr_ints(n, "shape");
    std::vector<int> want_shape(want.begin(), want.end());
    if (fed.shape() != want_shape)
        throw Error(ErrorCode::ShapeMismatch, "graph input expects " +
                                                  shape_to_string(want_shape) + ", got " +
                                                  fed.shape_str());
    DType want_dtype = dtype_from_name(attr_str_or(n, "dtype", "f32"));
    if (fed.dtype() != want_dtype)
        throw Error(ErrorCode::DTypeMismatch,
                    std::string("graph input expects ") + dtype_name(want_dtype) + ", got " +
                        dtype_name(fed.dtype()));
    return maybe_quantize_output(fed, n);
}

Tensor exec_node(const Graph& g, const Node& n, const std::vector<const Tensor*>& ins,
                 ExecPath path, int threads) {
    switch (n.kind) {
        case OpKind::Input:
            throw Error(ErrorCode::ExecFailure, "Input node executed without a fed tensor");
        case OpKind::Const:
            return g.weight(n.id);
        case OpKind::Conv2D: return exec_conv2d(n, ins, path, threads);
        case OpKind::DepthwiseConv2D: return exec_depthwise(n, ins, path, threads);
        case OpKind::Dense: return exec_dense(n, ins, path);
        case OpKind::BatchNorm: return exec_batch_norm(n, ins);
        case OpKind::ReLU:
        case OpKind::ReLU6:
        case OpKind::HardSwish:
        case OpKind::HardSigmoid: return exec_elementwise_act(n, *ins[0]);
        case OpKind::AvgPool:
        case OpKind::MaxPool:
        case OpKind::GlobalAvgPool: return exec_pool(n, *ins[0]);
        case OpKind::Softmax: return exec_softmax(*ins[0]);
        case OpKind::Add:
        case OpKind::Mul: return exec_binary(n, *ins[0], *ins[1]);
        case OpKind::Pad: return exec_pad(n, *ins[0]);
        case OpKind::Resize: return exec_resize(n, *ins[0]);
        case OpKind::Reshape: return exec_reshape(n, *ins[0]);
    }
    throw Error(ErrorCode::UnsupportedOp, std::string("no kernel for ") + op_kind_name(n.kind));
}

std::vector<int> topo_order(const Graph& g) {
    std::map<int, int> indegree;
    std::map<int, std::vector<int>> fanout;
    for (const Node& n : g.nodes) {
        indegree[n.id] += 0;
        for (int in : n.inputs) {
            if (!g.has_node(in))
                throw Error(ErrorCode::ExecFailure, "node " + std::to_string(n.id) +
                                                        " references missing id " +
                                                        std::to_string(in));
            indegree[n.id]++;
            fanout[in].push_back(n.id);
        }
    }
    std::deque<int> ready;
    for (const Node& n : g.nodes)  // node-list order keeps the schedule stable
        if (indegree[n.id] == 0) ready.push_back(n.id);
    std::vector<int> order;
    order.reserve(g.nodes.size());
    while (!ready.empty()) {
        int id = ready.front();
        ready.pop_front();
        order.push_back(id);
        for (int next : fanout[id])
            if (--indegree[next] == 0) ready.push_back(next);
    }
    if (order.size() != g.nodes.size())
        throw Error(ErrorCode::CycleDetected, "graph contains a cycle");
    return order;
}

}  // namespace

ExecutionPlan plan(const Graph& graph, ExecPath path, int threads) {
    auto shapes = infer_shape_map(graph);

    ExecutionPlan p;
    p.path = path;
    p.threads = std::max(1, threads);
    p.order = topo_order(graph);

    std::map<int, size_t> last_use;  // position of the last consumer
    std::map<int, size_t> position;
    for (size_t i = 0; i < p.order.size(); ++i) position[p.order[i]] = i;
    for (const Node& n : graph.nodes)
        for (int in : n.inputs)
            last_use[in] = std::max(last_use[in], position[n.id]);
    for (int out : graph.outputs) last_use[out] = p.order.size();

    for (const Node& n : graph.nodes) {
        if (n.kind == OpKind::Const) continue;
        DType dt = n.out_quant && n.kind != OpKind::Softmax ? DType::I8 : DType::F32;
        p.buffer_bytes[n.id] =
            static_cast<size_t>(shape_elem_count(shapes.at(n.id))) * dtype_bytes(dt);
    }

    int64_t live = 0, peak = 0;
    std::map<int, int64_t> live_bytes;
    for (size_t i = 0; i < p.order.size(); ++i) {
        int id = p.order[i];
        const Node& n = graph.node(id);
        if (n.kind != OpKind::Const) {
            live += static_cast<int64_t>(p.buffer_bytes[id]);
            live_bytes[id] = static_cast<int64_t>(p.buffer_bytes[id]);
            peak = std::max(peak, live);
        }
        // release values whose last consumer just ran
        for (auto it = live_bytes.begin(); it != live_bytes.end();) {
            if (last_use[it->first] <= i) {
                live -= it->second;
                it = live_bytes.erase(it);
            } else {
                ++it;
            }
        }
    }
    p.peak_activation_bytes = peak;
    return p;
}

namespace {

std::map<int, Tensor> execute(const Graph& g, const ExecutionPlan& p, const Tensor& input,
                              bool keep_all) {
    std::map<int, Tensor> values;
    std::map<int, int> remaining;  // pending consumers per value
    for (const Node& n : g.nodes)
        for (int in : n.inputs) remaining[in]++;
    for (int out : g.outputs) remaining[out]++;

    for (int id : p.order) {
        const Node& n = g.node(id);
        if (n.kind == OpKind::Const) continue;

        Tensor result;
        if (n.kind == OpKind::Input) {
            result = exec_input(n, input);
        } else {
            std::vector<const Tensor*> ins;
            ins.reserve(n.inputs.size());
            for (int in : n.inputs) {
                const Node& producer = g.node(in);
                if (producer.kind == OpKind::Const) {
                    ins.push_back(&g.weight(in));
                } else {
                    auto it = values.find(in);
                    if (it == values.end())
                        throw Error(ErrorCode::ExecFailure,
                                    "value for node " + std::to_string(in) + " not available");
                    ins.push_back(&it->second);
                }
            }
            try {
                result = exec_node(g, n, ins, p.path, p.threads);
            } catch (const Error&) {
                throw;
            } catch (const std::exception& e) {
                throw Error(ErrorCode::ExecFailure,
                            "node " + std::to_string(n.id) + ": " + e.what());
            }
        }
        values.emplace(n.id, std::move(result));

        if (!keep_all) {
            for (int in : n.inputs) {
                auto r = remaining.find(in);
                if (r != remaining.end() && --r->second == 0 && g.node(in).kind != OpKind::Const)
                    values.erase(in);
            }
        }
    }
    return values;
}

}  // namespace

Tensor run_plan(const Graph& graph, const ExecutionPlan& p, const Tensor& input) {
    if (graph.outputs.size() != 1)
        throw Error(ErrorCode::ExecFailure, "run expects a single-output graph");
    auto values = execute(graph, p, input, /*keep_all=*/false);
    auto it = values.find(graph.outputs[0]);
    if (it == values.end()) {
        // output may be a Const node
        const Node& out = graph.node(graph.outputs[0]);
        if (out.kind == OpKind::Const) return graph.weight(out.id);
        throw Error(ErrorCode::ExecFailure, "graph output was not computed");
    }
    return std::move(it->second);
}

Tensor run(const Graph& graph, const Tensor& input, ExecPath path, int threads) {
    return run_plan(graph, plan(graph, path, threads), input);
}

std::map<int, Tensor> run_collect(const Graph& graph, const Tensor& input, ExecPath path) {
    return execute(graph, plan(graph, path), input, /*keep_all=*/true);
}

Tensor run_op(OpKind kind, const AttrMap& attrs, const std::vector<Tensor>& inputs,
              ExecPath path, const std::optional<QuantParams>& out_quant, int threads) {
    Node n;
    n.id = 0;
    n.kind = kind;
    n.attrs = attrs;
    n.out_quant = out_quant;
    for (size_t i = 0; i < inputs.size(); ++i) n.inputs.push_back(static_cast<int>(i));
    Graph dummy;
    std::vector<const Tensor*> ins;
    ins.reserve(inputs.size());
    for (const Tensor& t : inputs) ins.push_back(&t);
    return exec_node(dummy, n, ins, path, threads);
}

std::vector<TopK> top_k(const Tensor& probs, const std::vector<std::string>& labels, int k) {
    Tensor p = probs.to_f32();
    const float* v = p.f32_data();
    std::vector<int> idx(static_cast<size_t>(p.elem_count()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
    std::vector<TopK> out;
    for (int i = 0; i < k && i < static_cast<int>(idx.size()); ++i) {
        int j = idx[static_cast<size_t>(i)];
        std::string label = j < static_cast<int>(labels.size()) ? labels[static_cast<size_t>(j)]
                                                                : "class_" + std::to_string(j);
        out.push_back({j, label, v[j]});
    }
    return out;
}

}  // namespace edgebin
