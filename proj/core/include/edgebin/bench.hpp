#pragma once

#include "edgebin/executor.hpp"

namespace edgebin {

struct BenchReport {
    std::string model_id;
    std::string path;  // "ref" | "opt"
    std::vector<int> input_shape;
    int iterations = 0;
    int warmup = 0;
    double mean_s = 0.0;
    double p50_s = 0.0;
    double p95_s = 0.0;
    double ips = 0.0;  // 1 / mean_s
    int64_t weight_bytes = 0;
    int64_t peak_activation_bytes = 0;
};

// Wall-clock (steady_clock) per-inference latency; warmup runs are
// excluded. Verifies the output is bitwise identical across iterations.
BenchReport measure(const Graph& graph, const Tensor& input, ExecPath path, int iterations,
                    int warmup, int threads = 1);

struct Comparison {
    double speedup;    // a.mean / b.mean, > 1 means b is faster
    double ips_ratio;  // b.ips / a.ips
};

// Requires the two reports to describe the same input shape.
Comparison compare(const BenchReport& a, const BenchReport& b);

struct MemoryEstimate {
    int64_t weight_bytes = 0;
    int64_t peak_activation_bytes = 0;
};

// weight bytes = sum of stored tensors; peak from liveness simulation over
// the topological order.
MemoryEstimate memory_estimate(const Graph& graph);

}  // namespace edgebin
