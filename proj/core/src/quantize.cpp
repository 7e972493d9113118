#include "edgebin/quantize.hpp"

#include <algorithm>
#include <cmath>

#include "edgebin/executor.hpp"

namespace edgebin {

const char* quant_scheme_name(QuantScheme s) { return s == QuantScheme::F16 ? "f16" : "i8"; }

QuantScheme quant_scheme_from_name(const std::string& name) {
    if (name == "f16") return QuantScheme::F16;
    if (name == "i8") return QuantScheme::I8;
    throw Error(ErrorCode::InvalidArgument, "unknown quantization scheme '" + name + "'");
}

void CalibrationStats::merge(const CalibrationStats& other) {
    for (const auto& [id, s] : other.per_tensor) {
        auto it = per_tensor.find(id);
        if (it == per_tensor.end()) {
            per_tensor[id] = s;
        } else {
            it->second.min = std::min(it->second.min, s.min);
            it->second.max = std::max(it->second.max, s.max);
            it->second.samples += s.samples;
        }
    }
}

namespace {

TensorStats tensor_stats(const Tensor& t) {
    TensorStats s;
    const int64_t n = t.elem_count();
    s.min = s.max = t.value_at(0);
    for (int64_t i = 1; i < n; ++i) {
        float v = t.value_at(i);
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.samples = 1;
    return s;
}

}  // namespace

CalibrationStats calibrate(const Graph& graph, const std::vector<Tensor>& dataset) {
    if (dataset.empty())
        throw Error(ErrorCode::EmptyDataset, "calibration needs at least one input");

    CalibrationStats stats;
    for (const Tensor& input : dataset) {
        auto values = run_collect(graph, input, ExecPath::Reference);
        CalibrationStats single;
        for (const auto& [id, t] : values) single.per_tensor[id] = tensor_stats(t);
        stats.merge(single);
    }
    // Const node outputs are the stored tensors themselves
    for (const Node& n : graph.nodes)
        if (n.kind == OpKind::Const) {
            CalibrationStats single;
            TensorStats s = tensor_stats(graph.weight(n.id));
            s.samples = static_cast<int64_t>(dataset.size());
            single.per_tensor[n.id] = s;
            stats.merge(single);
        }
    return stats;
}

QuantParams weight_qparams(const Tensor& w) {
    const int64_t n = w.elem_count();
    float max_abs = 0.0f;
    for (int64_t i = 0; i < n; ++i) max_abs = std::max(max_abs, std::fabs(w.value_at(i)));
    QuantParams qp;
    qp.scale = max_abs > 0.0f ? max_abs / 127.0f : 1.0f;
    qp.zero_point = 0;
    return qp;
}

QuantParams activation_qparams(float min, float max, std::string* diagnostic) {
    // extend to include zero so that real 0 maps exactly to an integer
    min = std::min(min, 0.0f);
    max = std::max(max, 0.0f);
    QuantParams qp;
    if (min == max) {
        qp.scale = 1.0f;
        qp.zero_point = static_cast<int>(
            std::clamp(std::lround(static_cast<double>(-min)), -128L, 127L));
        if (diagnostic)
            *diagnostic = "degenerate range (min == max == " + std::to_string(min) +
                          "), scale forced to 1";
        return qp;
    }
    qp.scale = (max - min) / 255.0f;
    qp.zero_point = static_cast<int>(std::clamp(
        std::lround(-128.0 - static_cast<double>(min) / static_cast<double>(qp.scale)), -128L,
        127L));
    return qp;
}

namespace {

Tensor quantize_weight_i8(const Tensor& w) {
    Tensor wf = w.to_f32();
    QuantParams qp = weight_qparams(wf);
    Tensor out(wf.shape(), DType::I8, qp);
    const float* src = wf.f32_data();
    int8_t* dst = out.i8_data();
    const int64_t n = wf.elem_count();
    for (int64_t i = 0; i < n; ++i) dst[i] = qp.quant(src[i]);
    return out;
}

Tensor to_f16(const Tensor& t) {
    Tensor tf = t.to_f32();
    Tensor out(tf.shape(), DType::F16);
    const float* src = tf.f32_data();
    uint16_t* dst = out.f16_data();
    const int64_t n = tf.elem_count();
    for (int64_t i = 0; i < n; ++i) dst[i] = f32_to_f16(src[i]);
    return out;
}

// kernel-weight const ids: second input of conv / depthwise / dense
std::map<int, bool> kernel_weight_ids(const Graph& g) {
    std::map<int, bool> ids;
    for (const Node& n : g.nodes) {
        if (n.kind != OpKind::Conv2D && n.kind != OpKind::DepthwiseConv2D &&
            n.kind != OpKind::Dense)
            continue;
        if (n.inputs.size() >= 2) ids[n.inputs[1]] = true;
    }
    return ids;
}

}  // namespace

QuantizeResult quantize(const Graph& graph, const CalibrationStats& stats, QuantScheme scheme) {
    QuantizeResult result;
    result.graph = graph;
    Graph& g = result.graph;

    if (scheme == QuantScheme::F16) {
        for (auto& [id, t] : g.weights) t = to_f16(t);
        return result;
    }

    // i8: every activation tensor needs coverage
    for (const Node& n : g.nodes)
        if (!stats.covers(n.id))
            throw Error(ErrorCode::MissingStats,
                        "no calibration stats for tensor of node " + std::to_string(n.id));

    auto kernels = kernel_weight_ids(g);
    for (auto& [id, t] : g.weights) {
        if (kernels.count(id)) {
            t = quantize_weight_i8(t);
        }
        // biases and batch-norm parameters stay f32
    }

    for (Node& n : g.nodes) {
        if (n.kind == OpKind::Softmax) continue;  // host-side, stays f32
        if (n.kind == OpKind::Const) {
            auto it = g.weights.find(n.id);
            if (it != g.weights.end() && it->second.dtype() == DType::I8)
                n.out_quant = it->second.quant();
            continue;
        }
        const TensorStats& s = stats.per_tensor.at(n.id);
        std::string diag;
        n.out_quant = activation_qparams(s.min, s.max, &diag);
        if (!diag.empty())
            result.diagnostics.push_back("node " + std::to_string(n.id) + ": " + diag);
    }
    return result;
}

QuantizeResult quantize(const Graph& graph, QuantScheme scheme) {
    if (scheme != QuantScheme::F16)
        throw Error(ErrorCode::MissingStats, "i8 quantization requires calibration stats");
    return quantize(graph, CalibrationStats{}, scheme);
}

Graph dequantize(const Graph& graph) {
    Graph g = graph;
    for (auto& [id, t] : g.weights)
        if (t.dtype() != DType::F32) t = t.to_f32();
    for (Node& n : g.nodes) n.out_quant.reset();
    return g;
}

}  // namespace edgebin
