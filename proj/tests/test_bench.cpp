#include <doctest.h>

#include <chrono>
#include <cmath>

#include "edgebin/bench.hpp"
#include "edgebin/shape_infer.hpp"
#include "edgebin/zoo.hpp"
#include "test_support.hpp"

using namespace edgebin;
using namespace edgebin::testsupport;

namespace {

Graph small_model(int res, double alpha = 0.25) {
    ModelSpec spec;
    spec.family = ModelFamily::MobileNetV1;
    spec.alpha = alpha;
    spec.input_resolution = {res, res};
    spec.num_classes = 7;
    return build(spec, 31);
}

}  // namespace

TEST_CASE("ips is the reciprocal of mean latency: 66 ms -> 15.15, 25 ms -> 40") {
    CHECK(1.0 / 0.066 == doctest::Approx(15.15).epsilon(0.001));
    CHECK(1.0 / 40.0 == doctest::Approx(0.025));

    Graph g = small_model(32);
    Tensor in = rand_tensor({32, 32, 3}, 1, 0.0f, 1.0f);
    BenchReport r = measure(g, in, ExecPath::Optimized, 10, 1);
    CHECK(std::fabs(r.ips * r.mean_s - 1.0) <= 1e-9);
    CHECK(r.p50_s <= r.p95_s);
    CHECK(r.iterations == 10);
    CHECK(r.mean_s > 0.0);
}

TEST_CASE("measure validates its preconditions") {
    Graph g = small_model(32);
    Tensor in = rand_tensor({32, 32, 3}, 2, 0.0f, 1.0f);
    CHECK_THROWS_AS(measure(g, in, ExecPath::Reference, 9, 1), Error);
    CHECK_THROWS_AS(measure(g, in, ExecPath::Reference, 10, 0), Error);
}

TEST_CASE("compare: identical reports give speedup 1; 13 vs 40 IPS is a 3.08 ratio") {
    BenchReport a;
    a.input_shape = {96, 96, 3};
    a.mean_s = 1.0 / 13.0;
    a.ips = 13.0;
    BenchReport b = a;
    CHECK(compare(a, a).speedup == 1.0);

    b.mean_s = 1.0 / 40.0;
    b.ips = 40.0;
    Comparison c = compare(a, b);
    CHECK(c.ips_ratio == doctest::Approx(40.0 / 13.0).epsilon(1e-9));
    CHECK(c.ips_ratio == doctest::Approx(3.08).epsilon(0.01));
    CHECK(c.speedup > 1.0);  // b is faster

    // reciprocal identity
    CHECK(compare(a, b).speedup == doctest::Approx(1.0 / compare(b, a).speedup).epsilon(1e-12));

    BenchReport other = b;
    other.input_shape = {224, 224, 3};
    CHECK_THROWS_AS(compare(a, other), Error);
}

TEST_CASE("repeated measurements of one plan are stable on an idle host") {
    Graph g = small_model(48);
    Tensor in = rand_tensor({48, 48, 3}, 3, 0.0f, 1.0f);
    BenchReport r1 = measure(g, in, ExecPath::Optimized, 20, 3);
    BenchReport r2 = measure(g, in, ExecPath::Optimized, 20, 3);
    double rel = std::fabs(r1.mean_s - r2.mean_s) / std::max(r1.mean_s, r2.mean_s);
    CHECK(rel < 0.35);  // generous to absorb scheduler noise
}

TEST_CASE("memory estimate: weight bytes count every stored tensor") {
    Graph g = small_model(32);
    MemoryEstimate m = memory_estimate(g);
    CHECK(m.weight_bytes == 4 * param_count(g));
    CHECK(m.peak_activation_bytes > 0);
}

TEST_CASE("linear chain peak equals the max adjacent in+out pair") {
    GraphBuilder gb;
    int x = gb.input({8, 8, 4});     // 1024 B
    int p1 = gb.avg_pool(x, 2, 2, "valid");  // 4x4x4 = 256 B
    int p2 = gb.avg_pool(p1, 2, 2, "valid");  // 2x2x4 = 64 B
    int r = gb.relu(p2);
    gb.mark_output(r);
    Graph g = infer_shapes(gb.finish());
    ExecutionPlan p = plan(g, ExecPath::Reference);
    // adjacent pairs: 1024+256, 256+64, 64+64 -> 1280
    CHECK(p.peak_activation_bytes == 1280);
    CHECK(p.peak_activation_bytes == oracle_peak_activation_bytes(g, p.order));
}

TEST_CASE("peak activation matches the liveness oracle on a model build") {
    Graph g = infer_shapes(small_model(64, 0.75));
    ExecutionPlan p = plan(g, ExecPath::Reference);
    CHECK(p.peak_activation_bytes == oracle_peak_activation_bytes(g, p.order));
}

TEST_CASE("benchmark outputs are deterministic across iterations") {
    Graph g = small_model(32);
    Tensor in = rand_tensor({32, 32, 3}, 4, 0.0f, 1.0f);
    // measure() itself asserts bitwise-equal outputs; this must not throw
    CHECK_NOTHROW(measure(g, in, ExecPath::Reference, 10, 1));
}

TEST_CASE("lower input resolution strictly reduces mean latency for the same family") {
    Graph hi = small_model(96);
    Graph lo = small_model(48);
    Tensor in_hi = rand_tensor({96, 96, 3}, 5, 0.0f, 1.0f);
    Tensor in_lo = rand_tensor({48, 48, 3}, 6, 0.0f, 1.0f);
    BenchReport rh = measure(hi, in_hi, ExecPath::Optimized, 10, 2);
    BenchReport rl = measure(lo, in_lo, ExecPath::Optimized, 10, 2);
    CHECK(rl.mean_s < rh.mean_s);
}

TEST_CASE("optimized path clears the 2x throughput floor over the reference path") {
    // the executor invariant names V1 alpha=0.75 at 224x224
    ModelSpec spec;
    spec.family = ModelFamily::MobileNetV1;
    spec.alpha = 0.75;
    spec.input_resolution = {224, 224};
    spec.num_classes = 7;
    Graph g = build(spec, 32);
    Tensor in = rand_tensor({224, 224, 3}, 7, 0.0f, 1.0f);

    ExecutionPlan ref = plan(g, ExecPath::Reference);
    ExecutionPlan opt = plan(g, ExecPath::Optimized);
    auto time_once = [&](const ExecutionPlan& p) {
        auto t0 = std::chrono::steady_clock::now();
        run_plan(g, p, in);
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    (void)time_once(opt);  // warm caches
    double t_opt = std::min(time_once(opt), time_once(opt));
    double t_ref = time_once(ref);
    CHECK(t_ref / t_opt >= 2.0);
}
