#pragma once

#include <map>

#include "edgebin/graph.hpp"

namespace edgebin {

enum class QuantScheme { F16, I8 };

const char* quant_scheme_name(QuantScheme s);
QuantScheme quant_scheme_from_name(const std::string& name);

struct TensorStats {
    float min = 0.0f;
    float max = 0.0f;
    int64_t samples = 0;
};

// Running min/max of every node output over the calibration inputs,
// collected with the reference executor. Keyed by node id; Const node
// stats come straight from the stored tensor.
struct CalibrationStats {
    std::map<int, TensorStats> per_tensor;

    bool covers(int id) const { return per_tensor.count(id) > 0; }
    // associative merge, usable for sharded calibration
    void merge(const CalibrationStats& other);
};

CalibrationStats calibrate(const Graph& graph, const std::vector<Tensor>& dataset);

// Per-tensor quantization parameters.
//   weights: symmetric, scale = max|w| / 127, zero point 0
//   activations: affine over [min, max] extended to include zero,
//                scale = (max - min) / 255, zero point clamped to [-128,127]
QuantParams weight_qparams(const Tensor& w);
// `diagnostic` gains a message when the range is degenerate (min == max).
QuantParams activation_qparams(float min, float max, std::string* diagnostic = nullptr);

struct QuantizeResult {
    Graph graph;
    std::vector<std::string> diagnostics;  // degenerate ranges etc.
};

// f16: converts every weight tensor to half precision (activations stay f32).
// i8: converts conv/dense kernels to symmetric int8 and annotates every
// activation with affine quant params from the stats; biases and batch-norm
// parameters stay f32 and are requantized on the fly at execution.
// Softmax outputs are never quantized (host-side postprocessing).
QuantizeResult quantize(const Graph& graph, const CalibrationStats& stats, QuantScheme scheme);
// f16 needs no stats.
QuantizeResult quantize(const Graph& graph, QuantScheme scheme);

// Back to f32 storage: i8 weights map through scale * (q - zero_point),
// f16 widens; activation annotations are dropped.
Graph dequantize(const Graph& graph);

}  // namespace edgebin
