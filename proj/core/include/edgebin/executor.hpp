#pragma once

#include <map>

#include "edgebin/graph.hpp"

namespace edgebin {

enum class ExecPath { Reference, Optimized };

const char* exec_path_name(ExecPath p);
ExecPath exec_path_from_name(const std::string& name);

// Immutable, reusable execution schedule. Concurrent runs of one plan are
// safe; each run keeps its own activation buffers.
struct ExecutionPlan {
    ExecPath path = ExecPath::Reference;
    int threads = 1;  // intra-op parallelism, optimized path only
    std::vector<int> order;                  // topological node order
    std::map<int, size_t> buffer_bytes;      // activation byte size per node
    int64_t peak_activation_bytes = 0;       // liveness peak over the order
};

// Builds a plan: topological order (CycleDetected on cycles), activation
// buffer sizes and the liveness-simulated peak. Requires shape annotations.
ExecutionPlan plan(const Graph& graph, ExecPath path, int threads = 1);

// Executes the graph on one input. The reference path is strictly
// sequential; the optimized path may use intra-op threads without changing
// results. i8 graphs quantize at the input node and dequantize at host-side
// nodes; the classifier output is always f32.
Tensor run_plan(const Graph& graph, const ExecutionPlan& plan, const Tensor& input);
Tensor run(const Graph& graph, const Tensor& input, ExecPath path = ExecPath::Reference,
           int threads = 1);

// Executes and keeps every node's output (calibration, debugging, logit
// inspection). Outputs are returned in their stored dtype.
std::map<int, Tensor> run_collect(const Graph& graph, const Tensor& input,
                                  ExecPath path = ExecPath::Reference);

// Single-operator entry point. Inputs are positional: activations first,
// then parameter tensors (conv: x, w[, b]; batch-norm: x, gamma, beta,
// mean, variance).
Tensor run_op(OpKind kind, const AttrMap& attrs, const std::vector<Tensor>& inputs,
              ExecPath path = ExecPath::Reference,
              const std::optional<QuantParams>& out_quant = std::nullopt, int threads = 1);

struct TopK {
    int index;
    std::string label;
    float probability;
};
std::vector<TopK> top_k(const Tensor& probs, const std::vector<std::string>& labels, int k);

}  // namespace edgebin
