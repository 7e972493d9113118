#pragma once

// Shared test helpers: independent oracles (sliding-window convolutions,
// liveness simulation), random tensor/graph generators and comparison
// utilities. Oracles here must stay independent of the kernels they check.

#include <filesystem>

#include "edgebin/graph.hpp"
#include "edgebin/tensor.hpp"

namespace edgebin::testsupport {

Tensor rand_tensor(std::vector<int> shape, uint64_t seed, float lo = -1.0f, float hi = 1.0f);

double max_abs_diff(const Tensor& a, const Tensor& b);
double cosine_similarity(const Tensor& a, const Tensor& b);

// ---- independent kernel oracles ----
// These materialize the padded input and slide windows literally.

Tensor oracle_conv2d(const Tensor& x, const Tensor& w, const Tensor* bias, int stride,
                     bool same_pad, FusedAct act);
Tensor oracle_depthwise(const Tensor& x, const Tensor& w, const Tensor* bias, int stride,
                        bool same_pad, FusedAct act);
Tensor oracle_dense(const Tensor& x, const Tensor& w, const Tensor* bias, FusedAct act);
Tensor oracle_avg_pool(const Tensor& x, int window, int stride, bool same_pad);

// window placements counted by literally sliding over a padded extent
int simulated_out_extent(int in, int kernel, int stride, bool same_pad);

// brute-force re-simulation of activation liveness over a plan order
int64_t oracle_peak_activation_bytes(const Graph& graph, const std::vector<int>& order);

// ---- random graph corpus ----

// Small executable classifier graph: input -> a few conv/bn/act/pool/
// residual/const-subexpression ops -> GlobalAvgPool -> Dense -> Softmax.
// Always structurally valid, always safe for the pass pipeline.
Graph random_graph(uint64_t seed);

// Scratch directory under the system temp path, unique per call.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace edgebin::testsupport
