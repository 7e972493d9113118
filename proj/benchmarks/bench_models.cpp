#include <benchmark/benchmark.h>

#include "edgebin/executor.hpp"
#include "edgebin/passes.hpp"
#include "edgebin/quantize.hpp"
#include "edgebin/rng.hpp"
#include "edgebin/zoo.hpp"

using namespace edgebin;

namespace {

Tensor rand_input(const Graph& g, uint64_t seed) {
    auto shape = attr_ints(g.node(g.inputs[0]), "shape");
    std::vector<int> s(shape.begin(), shape.end());
    Rng rng(seed);
    Tensor t = Tensor::f32(s);
    for (int64_t i = 0; i < t.elem_count(); ++i) t.f32_data()[i] = rng.uniform_f(0.0f, 1.0f);
    return t;
}

Graph v1(double alpha, int res) {
    ModelSpec spec;
    spec.family = ModelFamily::MobileNetV1;
    spec.alpha = alpha;
    spec.input_resolution = {res, res};
    spec.num_classes = 7;
    return build(spec, 1);
}

void BM_MobileNetV1(benchmark::State& state) {
    const ExecPath path = state.range(0) ? ExecPath::Optimized : ExecPath::Reference;
    const int res = static_cast<int>(state.range(1));
    Graph g = v1(0.25, res);
    ExecutionPlan p = plan(g, path);
    Tensor in = rand_input(g, 2);
    for (auto _ : state) {
        Tensor out = run_plan(g, p, in);
        benchmark::DoNotOptimize(out.raw());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MobileNetV1)
    ->Args({1, 96})
    ->Args({1, 224})
    ->Args({0, 96})
    ->Unit(benchmark::kMillisecond);

void BM_MobileNetV1_Fused(benchmark::State& state) {
    Graph g = v1(0.25, 96);
    Graph fused = run_pipeline(g, generic_profile()).first;
    ExecutionPlan p = plan(fused, ExecPath::Optimized);
    Tensor in = rand_input(fused, 3);
    for (auto _ : state) {
        Tensor out = run_plan(fused, p, in);
        benchmark::DoNotOptimize(out.raw());
    }
}
BENCHMARK(BM_MobileNetV1_Fused)->Unit(benchmark::kMillisecond);

void BM_MobileNetV1_I8(benchmark::State& state) {
    Graph g = run_pipeline(v1(0.25, 96), k210_profile()).first;
    CalibrationStats stats = calibrate(g, {rand_input(g, 4)});
    Graph q = quantize(g, stats, QuantScheme::I8).graph;
    ExecutionPlan p = plan(q, ExecPath::Optimized);
    Tensor in = rand_input(q, 5);
    for (auto _ : state) {
        Tensor out = run_plan(q, p, in);
        benchmark::DoNotOptimize(out.raw());
    }
}
BENCHMARK(BM_MobileNetV1_I8)->Unit(benchmark::kMillisecond);

void BM_MobileNetV3Small(benchmark::State& state) {
    ModelSpec spec;
    spec.family = ModelFamily::MobileNetV3Small;
    spec.alpha = 1.0;
    spec.input_resolution = {96, 96};
    spec.num_classes = 7;
    Graph g = build(spec, 6);
    ExecutionPlan p = plan(g, ExecPath::Optimized);
    Tensor in = rand_input(g, 7);
    for (auto _ : state) {
        Tensor out = run_plan(g, p, in);
        benchmark::DoNotOptimize(out.raw());
    }
}
BENCHMARK(BM_MobileNetV3Small)->Unit(benchmark::kMillisecond);

}  // namespace
