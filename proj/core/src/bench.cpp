#include "edgebin/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

namespace edgebin {

namespace {

double percentile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    rank = std::clamp<size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

}  // namespace

BenchReport measure(const Graph& graph, const Tensor& input, ExecPath path, int iterations,
                    int warmup, int threads) {
    if (iterations < 10)
        throw Error(ErrorCode::InvalidArgument, "need at least 10 timed iterations");
    if (warmup < 1) throw Error(ErrorCode::InvalidArgument, "need at least 1 warmup run");

    ExecutionPlan p = plan(graph, path, threads);

    BenchReport report;
    report.model_id = graph.metadata.name;
    report.path = exec_path_name(path);
    report.input_shape = input.shape();
    report.iterations = iterations;
    report.warmup = warmup;

    MemoryEstimate mem = memory_estimate(graph);
    report.weight_bytes = mem.weight_bytes;
    report.peak_activation_bytes = p.peak_activation_bytes;

    Tensor first_out;
    for (int i = 0; i < warmup; ++i) first_out = run_plan(graph, p, input);

    using clock = std::chrono::steady_clock;
    std::vector<double> latencies;
    latencies.reserve(static_cast<size_t>(iterations));
    for (int i = 0; i < iterations; ++i) {
        auto t0 = clock::now();
        Tensor out = run_plan(graph, p, input);
        auto t1 = clock::now();
        latencies.push_back(std::chrono::duration<double>(t1 - t0).count());
        if (out.byte_size() != first_out.byte_size() ||
            std::memcmp(out.raw(), first_out.raw(), out.byte_size()) != 0)
            throw Error(ErrorCode::ExecFailure,
                        "non-deterministic output across benchmark iterations");
    }

    double sum = 0.0;
    for (double v : latencies) sum += v;
    report.mean_s = sum / static_cast<double>(iterations);
    std::sort(latencies.begin(), latencies.end());
    report.p50_s = percentile(latencies, 0.50);
    report.p95_s = percentile(latencies, 0.95);
    report.ips = 1.0 / report.mean_s;
    return report;
}

Comparison compare(const BenchReport& a, const BenchReport& b) {
    if (a.input_shape != b.input_shape)
        throw Error(ErrorCode::ShapeMismatch, "reports describe different input shapes");
    Comparison c;
    c.speedup = a.mean_s / b.mean_s;
    c.ips_ratio = b.ips / a.ips;
    return c;
}

MemoryEstimate memory_estimate(const Graph& graph) {
    MemoryEstimate m;
    m.weight_bytes = graph.total_weight_bytes();
    m.peak_activation_bytes = plan(graph, ExecPath::Reference).peak_activation_bytes;
    return m;
}

}  // namespace edgebin
