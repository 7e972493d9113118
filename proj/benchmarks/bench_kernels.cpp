#include <benchmark/benchmark.h>

#include "edgebin/executor.hpp"
#include "edgebin/rng.hpp"

using namespace edgebin;

namespace {

Tensor rand_tensor(std::vector<int> shape, uint64_t seed) {
    Rng rng(seed);
    Tensor t = Tensor::f32(std::move(shape));
    float* d = t.f32_data();
    for (int64_t i = 0; i < t.elem_count(); ++i) d[i] = rng.uniform_f(-1.0f, 1.0f);
    return t;
}

AttrMap conv_attrs(int k, int filters, int stride) {
    AttrMap a;
    a["kernel"] = std::vector<int64_t>{k, k};
    a["filters"] = static_cast<int64_t>(filters);
    a["stride"] = static_cast<int64_t>(stride);
    a["padding"] = std::string("same");
    a["act"] = std::string("relu6");
    return a;
}

void BM_Conv3x3(benchmark::State& state) {
    const ExecPath path = state.range(0) ? ExecPath::Optimized : ExecPath::Reference;
    const int hw = static_cast<int>(state.range(1));
    const int c = static_cast<int>(state.range(2));
    Tensor x = rand_tensor({hw, hw, c}, 1);
    Tensor w = rand_tensor({3, 3, c, c}, 2);
    AttrMap attrs = conv_attrs(3, c, 1);
    for (auto _ : state) {
        Tensor out = run_op(OpKind::Conv2D, attrs, {x, w}, path);
        benchmark::DoNotOptimize(out.raw());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Conv3x3)
    ->Args({0, 56, 32})
    ->Args({1, 56, 32})
    ->Args({0, 28, 64})
    ->Args({1, 28, 64})
    ->Unit(benchmark::kMillisecond);

void BM_Pointwise(benchmark::State& state) {
    const ExecPath path = state.range(0) ? ExecPath::Optimized : ExecPath::Reference;
    Tensor x = rand_tensor({28, 28, 128}, 3);
    Tensor w = rand_tensor({1, 1, 128, 128}, 4);
    AttrMap attrs = conv_attrs(1, 128, 1);
    for (auto _ : state) {
        Tensor out = run_op(OpKind::Conv2D, attrs, {x, w}, path);
        benchmark::DoNotOptimize(out.raw());
    }
}
BENCHMARK(BM_Pointwise)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Depthwise3x3(benchmark::State& state) {
    const ExecPath path = state.range(0) ? ExecPath::Optimized : ExecPath::Reference;
    Tensor x = rand_tensor({56, 56, 96}, 5);
    Tensor w = rand_tensor({3, 3, 96, 1}, 6);
    AttrMap attrs;
    attrs["kernel"] = std::vector<int64_t>{3, 3};
    attrs["stride"] = static_cast<int64_t>(1);
    attrs["padding"] = std::string("same");
    attrs["act"] = std::string("relu6");
    for (auto _ : state) {
        Tensor out = run_op(OpKind::DepthwiseConv2D, attrs, {x, w}, path);
        benchmark::DoNotOptimize(out.raw());
    }
}
BENCHMARK(BM_Depthwise3x3)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_QuantizedConv3x3(benchmark::State& state) {
    const ExecPath path = state.range(0) ? ExecPath::Optimized : ExecPath::Reference;
    const int c = 64;
    Rng rng(7);
    std::vector<int8_t> xi(static_cast<size_t>(28 * 28 * c));
    std::vector<int8_t> wi(static_cast<size_t>(9 * c * c));
    for (auto& v : xi) v = static_cast<int8_t>(rng.uniform_int(-128, 127));
    for (auto& v : wi) v = static_cast<int8_t>(rng.uniform_int(-127, 127));
    Tensor x = Tensor::i8({28, 28, c}, xi, QuantParams{0.05f, -12});
    Tensor w = Tensor::i8({3, 3, c, c}, wi, QuantParams{0.01f, 0});
    AttrMap attrs = conv_attrs(3, c, 1);
    QuantParams out_q{0.08f, -5};
    for (auto _ : state) {
        Tensor out = run_op(OpKind::Conv2D, attrs, {x, w}, path, out_q);
        benchmark::DoNotOptimize(out.raw());
    }
}
BENCHMARK(BM_QuantizedConv3x3)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
