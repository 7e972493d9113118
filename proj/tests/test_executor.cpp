#include <doctest.h>

#include <cstring>

#include "edgebin/executor.hpp"
#include "edgebin/rng.hpp"
#include "edgebin/shape_infer.hpp"
#include "edgebin/zoo.hpp"
#include "test_support.hpp"

using namespace edgebin;
using namespace edgebin::testsupport;

namespace {

AttrMap conv_attrs(int k, int filters, int stride, const std::string& pad,
                   const std::string& act = "none") {
    AttrMap a;
    a["kernel"] = std::vector<int64_t>{k, k};
    a["filters"] = static_cast<int64_t>(filters);
    a["stride"] = static_cast<int64_t>(stride);
    a["padding"] = pad;
    a["act"] = act;
    return a;
}

AttrMap dw_attrs(int k, int stride, const std::string& pad, const std::string& act = "none") {
    AttrMap a;
    a["kernel"] = std::vector<int64_t>{k, k};
    a["stride"] = static_cast<int64_t>(stride);
    a["padding"] = pad;
    a["act"] = act;
    return a;
}

AttrMap pool_attrs(int window, int stride, const std::string& pad) {
    AttrMap a;
    a["window"] = static_cast<int64_t>(window);
    a["stride"] = static_cast<int64_t>(stride);
    a["padding"] = pad;
    return a;
}

}  // namespace

TEST_CASE("softmax over equal logits splits evenly and always sums to one") {
    Tensor out = run_op(OpKind::Softmax, {}, {Tensor::f32({2}, {0.0f, 0.0f})});
    CHECK(out.f32_data()[0] == doctest::Approx(0.5));
    CHECK(out.f32_data()[1] == doctest::Approx(0.5));

    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor logits = rand_tensor({7}, 100 + trial, -30.0f, 30.0f);
        Tensor p = run_op(OpKind::Softmax, {}, {logits});
        double sum = 0.0;
        for (int i = 0; i < 7; ++i) {
            CHECK(p.f32_data()[i] >= 0.0f);
            CHECK(p.f32_data()[i] <= 1.0f);
            sum += p.f32_data()[i];
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-5);
    }
}

TEST_CASE("all-ones valid conv sums the window") {
    Tensor x = Tensor::f32({3, 3, 1}, std::vector<float>(9, 1.0f));
    Tensor w = Tensor::f32({3, 3, 1, 1}, std::vector<float>(9, 1.0f));
    Tensor out = run_op(OpKind::Conv2D, conv_attrs(3, 1, 1, "valid"), {x, w});
    CHECK(out.shape() == std::vector<int>{1, 1, 1});
    CHECK(out.f32_data()[0] == doctest::Approx(9.0));
}

TEST_CASE("activation definitions") {
    Tensor x = Tensor::f32({4}, {7.0f, 3.0f, -1.0f, 0.5f});
    Tensor r6 = run_op(OpKind::ReLU6, {}, {x});
    CHECK(r6.f32_data()[0] == 6.0f);  // ReLU6(7) = 6
    CHECK(r6.f32_data()[2] == 0.0f);

    Tensor hs = run_op(OpKind::HardSwish, {}, {x});
    CHECK(hs.f32_data()[1] == doctest::Approx(3.0));  // HardSwish(3) = 3
    CHECK(hs.f32_data()[2] == doctest::Approx(-1.0 * 2.0 / 6.0));

    Tensor hg = run_op(OpKind::HardSigmoid, {}, {x});
    CHECK(hg.f32_data()[1] == doctest::Approx(1.0));
    CHECK(hg.f32_data()[3] == doctest::Approx(3.5 / 6.0));
}

TEST_CASE("avg pool 2x2 stride 2 on [[1,2],[3,4]] is 2.5") {
    Tensor x = Tensor::f32({2, 2, 1}, {1, 2, 3, 4});
    Tensor out = run_op(OpKind::AvgPool, pool_attrs(2, 2, "valid"), {x});
    CHECK(out.shape() == std::vector<int>{1, 1, 1});
    CHECK(out.f32_data()[0] == doctest::Approx(2.5));
}

TEST_CASE("depthwise conv matches the per-channel sliding-window oracle") {
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(9000 + trial);
        int stride = 1 + static_cast<int>(rng.next_below(2));
        bool same = rng.next_double() < 0.5;
        Tensor x = rand_tensor({8, 8, 4}, 10 + trial);
        Tensor w = rand_tensor({3, 3, 4, 1}, 20 + trial);
        Tensor expected = oracle_depthwise(x, w, nullptr, stride, same, FusedAct::None);

        for (ExecPath path : {ExecPath::Reference, ExecPath::Optimized}) {
            Tensor got =
                run_op(OpKind::DepthwiseConv2D, dw_attrs(3, stride, same ? "same" : "valid"),
                       {x, w}, path);
            CHECK(max_abs_diff(got, expected) <= 1e-6);
        }
    }
}

TEST_CASE("conv2d (both paths) matches the sliding-window oracle on 100 random cases") {
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(5000 + trial);
        int k = rng.next_double() < 0.5 ? 1 : 3;
        int stride = 1 + static_cast<int>(rng.next_below(2));
        bool same = rng.next_double() < 0.5;
        bool bias = rng.next_double() < 0.5;
        int ic = 1 + static_cast<int>(rng.next_below(5));
        int oc = 1 + static_cast<int>(rng.next_below(6));
        int h = k + static_cast<int>(rng.next_below(8));
        int w = k + static_cast<int>(rng.next_below(8));

        Tensor x = rand_tensor({h, w, ic}, 31 * trial + 1);
        Tensor wt = rand_tensor({k, k, ic, oc}, 37 * trial + 2);
        Tensor b = rand_tensor({oc}, 41 * trial + 3);
        Tensor expected =
            oracle_conv2d(x, wt, bias ? &b : nullptr, stride, same, FusedAct::Relu6);

        std::vector<Tensor> inputs{x, wt};
        if (bias) inputs.push_back(b);
        for (ExecPath path : {ExecPath::Reference, ExecPath::Optimized}) {
            Tensor got = run_op(OpKind::Conv2D,
                                conv_attrs(k, oc, stride, same ? "same" : "valid", "relu6"),
                                inputs, path);
            CHECK(max_abs_diff(got, expected) <= 1e-6);
        }
    }
}

TEST_CASE("dense matches oracle on both paths") {
    for (int trial = 0; trial < 100; ++trial) {
        Tensor x = rand_tensor({17}, 61 * trial + 5);
        Tensor w = rand_tensor({17, 9}, 67 * trial + 6);
        Tensor b = rand_tensor({9}, 71 * trial + 7);
        Tensor expected = oracle_dense(x, w, &b, FusedAct::None);
        AttrMap attrs;
        attrs["units"] = static_cast<int64_t>(9);
        for (ExecPath path : {ExecPath::Reference, ExecPath::Optimized}) {
            Tensor got = run_op(OpKind::Dense, attrs, {x, w, b}, path);
            CHECK(max_abs_diff(got, expected) <= 1e-6);
        }
    }
}

TEST_CASE("avg pool same-pad excludes padding from the denominator") {
    for (int trial = 0; trial < 30; ++trial) {
        Tensor x = rand_tensor({7, 5, 3}, 80 + trial);
        Tensor expected = oracle_avg_pool(x, 3, 2, true);
        Tensor got = run_op(OpKind::AvgPool, pool_attrs(3, 2, "same"), {x});
        CHECK(max_abs_diff(got, expected) <= 1e-6);
    }
}

TEST_CASE("batch norm matches its closed form") {
    Tensor x = Tensor::f32({1, 1, 2}, {2.0f, -4.0f});
    Tensor gamma = Tensor::f32({2}, {2.0f, 1.0f});
    Tensor beta = Tensor::f32({2}, {1.0f, 0.0f});
    Tensor mean = Tensor::f32({2}, {1.0f, -1.0f});
    Tensor var = Tensor::f32({2}, {4.0f, 1.0f});
    AttrMap attrs;
    attrs["epsilon"] = 0.0;
    Tensor out = run_op(OpKind::BatchNorm, attrs, {x, gamma, beta, mean, var});
    CHECK(out.f32_data()[0] == doctest::Approx(1.0 + 2.0 * (2.0 - 1.0) / 2.0));
    CHECK(out.f32_data()[1] == doctest::Approx((-4.0 + 1.0) / 1.0));
}

TEST_CASE("broadcast add/mul") {
    Tensor x = Tensor::f32({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
    Tensor gate = Tensor::f32({1, 1, 2}, {10.0f, 100.0f});
    Tensor out = run_op(OpKind::Mul, {}, {x, gate});
    CHECK(out.f32_data()[0] == 10.0f);
    CHECK(out.f32_data()[1] == 200.0f);
    CHECK(out.f32_data()[7] == 800.0f);

    Tensor scalar = Tensor::f32({1}, {1.5f});
    Tensor sum = run_op(OpKind::Add, {}, {x, scalar});
    CHECK(sum.f32_data()[3] == 5.5f);
}

TEST_CASE("run on a full model: optimized equals reference within 1e-5") {
    ModelSpec spec;
    spec.family = ModelFamily::MobileNetV1;
    spec.alpha = 0.25;
    spec.input_resolution = {96, 96};
    spec.num_classes = 7;
    Graph g = build(spec, 77);
    Tensor input = rand_tensor({96, 96, 3}, 5, 0.0f, 1.0f);

    Tensor ref = run(g, input, ExecPath::Reference);
    Tensor opt = run(g, input, ExecPath::Optimized);
    CHECK(max_abs_diff(ref, opt) <= 1e-5);

    double sum = 0.0;
    for (int i = 0; i < 7; ++i) sum += ref.f32_data()[i];
    CHECK(std::fabs(sum - 1.0) <= 1e-5);
}

TEST_CASE("determinism: repeated runs are bitwise identical") {
    Graph g = random_graph(21);
    auto shape = attr_ints(g.node(g.inputs[0]), "shape");
    Tensor input = rand_tensor(std::vector<int>(shape.begin(), shape.end()), 3);
    for (ExecPath path : {ExecPath::Reference, ExecPath::Optimized}) {
        Tensor a = run(g, input, path);
        Tensor b = run(g, input, path);
        REQUIRE(a.byte_size() == b.byte_size());
        CHECK(std::memcmp(a.raw(), b.raw(), a.byte_size()) == 0);
    }
}

TEST_CASE("intra-op threads do not change optimized-path results") {
    Graph g = random_graph(22);
    auto shape = attr_ints(g.node(g.inputs[0]), "shape");
    Tensor input = rand_tensor(std::vector<int>(shape.begin(), shape.end()), 4);
    Tensor one = run(g, input, ExecPath::Optimized, 1);
    Tensor four = run(g, input, ExecPath::Optimized, 4);
    REQUIRE(one.byte_size() == four.byte_size());
    CHECK(std::memcmp(one.raw(), four.raw(), one.byte_size()) == 0);
}

TEST_CASE("run validates input shape and dtype") {
    Graph g = random_graph(23);
    CHECK_THROWS_AS(run(g, Tensor::f32({1, 1, 1}), ExecPath::Reference), Error);

    auto shape = attr_ints(g.node(g.inputs[0]), "shape");
    std::vector<int> s(shape.begin(), shape.end());
    Tensor wrong_dtype = Tensor::f16(s, std::vector<float>(shape_elem_count(s), 0.0f));
    try {
        run(g, wrong_dtype, ExecPath::Reference);
        FAIL("expected DTypeMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DTypeMismatch);
    }
}

TEST_CASE("plan peak activation bytes matches the brute-force liveness oracle") {
    for (uint64_t seed = 40; seed < 48; ++seed) {
        Graph g = infer_shapes(random_graph(seed));
        ExecutionPlan p = plan(g, ExecPath::Reference);
        CHECK(p.peak_activation_bytes == oracle_peak_activation_bytes(g, p.order));
    }
}

TEST_CASE("plan peak on a MobileNet V3 build matches the oracle") {
    ModelSpec spec;
    spec.family = ModelFamily::MobileNetV3Large;
    spec.alpha = 1.0;
    spec.input_resolution = {96, 96};
    spec.num_classes = 7;
    Graph g = infer_shapes(build(spec, 3));
    ExecutionPlan p = plan(g, ExecPath::Reference);
    CHECK(p.peak_activation_bytes == oracle_peak_activation_bytes(g, p.order));
}

TEST_CASE("plan reuse: running one plan twice gives identical outputs") {
    Graph g = random_graph(55);
    auto shape = attr_ints(g.node(g.inputs[0]), "shape");
    Tensor input = rand_tensor(std::vector<int>(shape.begin(), shape.end()), 8);
    ExecutionPlan p = plan(g, ExecPath::Optimized);
    Tensor a = run_plan(g, p, input);
    Tensor b = run_plan(g, p, input);
    CHECK(std::memcmp(a.raw(), b.raw(), a.byte_size()) == 0);
}

TEST_CASE("resize inside a graph matches standalone bilinear") {
    GraphBuilder gb;
    int x = gb.input({384, 512, 3});
    int r = gb.resize(x, 224, 224);
    int soft = gb.softmax(gb.global_avg_pool(r));
    gb.mark_output(soft);
    Graph g = gb.finish();
    Tensor input = rand_tensor({384, 512, 3}, 9, 0.0f, 1.0f);
    auto values = run_collect(g, input);
    CHECK(values.at(r).shape() == std::vector<int>{224, 224, 3});
}
