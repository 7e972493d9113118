#pragma once

#include <set>

#include "edgebin/graph.hpp"

namespace edgebin {

// Accelerator constraint model used by replace_ops / check_target.
struct TargetProfile {
    std::string name;
    std::set<std::pair<int, int>> allowed_kernel_sizes;  // conv kernels only
    int64_t max_model_bytes = 0;
    std::pair<int, int> max_input_resolution{0, 0};  // (w, h)
    std::set<OpKind> accelerated_ops;

    bool kernel_allowed(int kh, int kw) const {
        return allowed_kernel_sizes.count({kh, kw}) > 0;
    }
};

// KPU-style profile: 1x1 and 3x3 kernels, 6 MB model budget, 320x240 input,
// conv/batch-norm/activation/pool acceleration.
TargetProfile k210_profile();
// Unconstrained host profile.
TargetProfile generic_profile();
TargetProfile profile_by_name(const std::string& name);

struct PassReport {
    std::string pass;
    int nodes_removed = 0;
    int nodes_added = 0;
    int nodes_fused = 0;
    std::vector<std::string> diagnostics;
};

// Evaluates every operator whose inputs are all constants and replaces it
// with the precomputed Const, pruning constants that end up unused.
// Graph outputs are unchanged on any input. Throws ExecFailure when a
// foldable node's kernel fails.
std::pair<Graph, PassReport> fold_constants(const Graph& graph);

// Rewrites conv->batch-norm pairs into a single conv:
//   w' = w * gamma / sqrt(var + eps),  b' = beta + gamma * (b - mean) / sqrt(var + eps).
// Fires only when the conv output has a single consumer; a batch-norm
// sharing its conv input with another consumer raises NonAffinePattern.
std::pair<Graph, PassReport> fuse_conv_bn(const Graph& graph);

// Absorbs ReLU / ReLU6 / HardSwish directly after a conv or dense into the
// node's fused-activation slot (single-consumer intermediates only).
std::pair<Graph, PassReport> fuse_activation(const Graph& graph);

// Target-specific operator replacement:
//   Dense over a 1x1xC activation -> 1x1 Conv2D (+ Reshape to keep the
//   output shape), GlobalAvgPool -> full-window AvgPool, Softmax -> tagged
//   host fallback. Conv kernels outside the profile with no catalog entry
//   raise Unreplaceable.
std::pair<Graph, PassReport> replace_ops(const Graph& graph, const TargetProfile& profile);

struct CheckViolation {
    std::string kind;  // "kernel" | "model_size" | "input_resolution"
    std::string detail;
    int node_id = -1;
};

struct DeployabilityReport {
    bool fits = false;
    int64_t weight_bytes = 0;
    std::vector<CheckViolation> violations;
};

// Static deployability check: all conv kernels allowed, weight bytes within
// the model budget, input resolution within the limit (orientation
// insensitive).
DeployabilityReport check_target(const Graph& graph, const TargetProfile& profile);

// fold -> fuse_conv_bn -> fuse_activation -> replace, re-inferring shapes
// between stages. Returns the final graph and one report per pass run.
std::pair<Graph, std::vector<PassReport>> run_pipeline(const Graph& graph,
                                                       const TargetProfile& profile,
                                                       const std::vector<std::string>& passes = {
                                                           "fold", "fuse", "replace"});

}  // namespace edgebin
