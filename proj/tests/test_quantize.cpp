#include <doctest.h>

#include <cmath>

#include "edgebin/executor.hpp"
#include "edgebin/passes.hpp"
#include "edgebin/quantize.hpp"
#include "edgebin/shape_infer.hpp"
#include "edgebin/zoo.hpp"
#include "test_support.hpp"

using namespace edgebin;
using namespace edgebin::testsupport;

namespace {

Tensor input_for(const Graph& g, uint64_t seed) {
    auto shape = attr_ints(g.node(g.inputs[0]), "shape");
    return rand_tensor(std::vector<int>(shape.begin(), shape.end()), seed, 0.0f, 1.0f);
}

Graph three_layer_net(uint64_t seed) {
    GraphBuilder gb("3layer");
    int x = gb.input({8, 8, 3});
    int c1 = gb.conv2d(x, rand_tensor({3, 3, 3, 4}, seed), rand_tensor({4}, seed + 1), 1, "same",
                       FusedAct::Relu);
    int c2 = gb.depthwise_conv2d(c1, rand_tensor({3, 3, 4, 1}, seed + 2), std::nullopt, 1,
                                 "same", FusedAct::Relu6);
    int gap = gb.global_avg_pool(c2);
    int dense = gb.dense(gap, rand_tensor({4, 5}, seed + 3), rand_tensor({5}, seed + 4));
    gb.mark_output(gb.softmax(dense));
    return gb.finish();
}

}  // namespace

TEST_CASE("calibrate: an all-zero input pins post-relu tensors at zero") {
    Graph g = three_layer_net(1);
    Tensor zeros = Tensor::f32({8, 8, 3});
    CalibrationStats stats = calibrate(g, {zeros});

    // the relu-fused conv output must have min == max == 0
    for (const Node& n : g.nodes) {
        if (n.kind != OpKind::Conv2D) continue;
        const TensorStats& s = stats.per_tensor.at(n.id);
        CHECK(s.min == 0.0f);
        CHECK(s.max == 0.0f);
    }
}

TEST_CASE("calibrate: two inputs merge as elementwise min/max of singles") {
    Graph g = three_layer_net(2);
    Tensor a = input_for(g, 10);
    Tensor b = input_for(g, 11);
    CalibrationStats both = calibrate(g, {a, b});
    CalibrationStats sa = calibrate(g, {a});
    CalibrationStats sb = calibrate(g, {b});
    for (const auto& [id, s] : both.per_tensor) {
        CHECK(s.min == std::min(sa.per_tensor.at(id).min, sb.per_tensor.at(id).min));
        CHECK(s.max == std::max(sa.per_tensor.at(id).max, sb.per_tensor.at(id).max));
    }
}

TEST_CASE("calibrate matches the store-all-activations oracle on 10 random inputs") {
    Graph g = three_layer_net(3);
    std::vector<Tensor> dataset;
    for (uint64_t i = 0; i < 10; ++i) dataset.push_back(input_for(g, 20 + i));
    CalibrationStats stats = calibrate(g, dataset);

    // oracle: store every activation of every run, then reduce
    std::map<int, std::pair<float, float>> oracle;
    for (const Tensor& in : dataset) {
        auto values = run_collect(g, in, ExecPath::Reference);
        for (const auto& [id, t] : values) {
            Tensor f = t.to_f32();
            for (int64_t i = 0; i < f.elem_count(); ++i) {
                float v = f.f32_data()[i];
                auto it = oracle.find(id);
                if (it == oracle.end())
                    oracle[id] = {v, v};
                else {
                    it->second.first = std::min(it->second.first, v);
                    it->second.second = std::max(it->second.second, v);
                }
            }
        }
    }
    for (const auto& [id, mm] : oracle) {
        CHECK(stats.per_tensor.at(id).min == mm.first);
        CHECK(stats.per_tensor.at(id).max == mm.second);
    }
}

TEST_CASE("calibrate rejects an empty dataset") {
    Graph g = three_layer_net(4);
    try {
        calibrate(g, {});
        FAIL("expected EmptyDataset");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyDataset);
    }
}

TEST_CASE("symmetric weights [-1,0,1] quantize to the integer extremes") {
    Tensor w = Tensor::f32({3}, {-1.0f, 0.0f, 1.0f});
    QuantParams qp = weight_qparams(w);
    CHECK(qp.scale == doctest::Approx(1.0 / 127.0));
    CHECK(qp.zero_point == 0);
    CHECK(qp.quant(-1.0f) == -127);
    CHECK(qp.quant(0.0f) == 0);
    CHECK(qp.quant(1.0f) == 127);
}

TEST_CASE("f16 of 0.5 dequantizes to exactly 0.5") {
    GraphBuilder gb;
    int x = gb.input({1, 1, 1});
    int c = gb.constant(Tensor::f32({1, 1, 1}, {0.5f}));
    int out = gb.add(x, c);
    gb.mark_output(out);
    Graph g = gb.finish();

    Graph h = quantize(g, QuantScheme::F16).graph;
    CHECK(h.weights.begin()->second.dtype() == DType::F16);
    Graph back = dequantize(h);
    CHECK(back.weights.begin()->second.f32_data()[0] == 0.5f);
}

TEST_CASE("f16 halves and i8 quarters the kernel-weight bytes") {
    Graph g = three_layer_net(5);
    CalibrationStats stats = calibrate(g, {input_for(g, 30)});

    auto kernel_bytes = [&](const Graph& gr) {
        int64_t bytes = 0;
        for (const Node& n : gr.nodes) {
            if (n.kind != OpKind::Conv2D && n.kind != OpKind::DepthwiseConv2D &&
                n.kind != OpKind::Dense)
                continue;
            bytes += static_cast<int64_t>(gr.weight(n.inputs[1]).byte_size());
        }
        return bytes;
    };

    int64_t f32_bytes = kernel_bytes(g);
    CHECK(kernel_bytes(quantize(g, QuantScheme::F16).graph) * 2 == f32_bytes);
    CHECK(kernel_bytes(quantize(g, stats, QuantScheme::I8).graph) * 4 == f32_bytes);
}

TEST_CASE("i8 quantization requires stats for every tensor") {
    Graph g = three_layer_net(6);
    CalibrationStats partial = calibrate(g, {input_for(g, 40)});
    partial.per_tensor.erase(partial.per_tensor.begin()->first);
    try {
        quantize(g, partial, QuantScheme::I8);
        FAIL("expected MissingStats");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingStats);
    }
}

TEST_CASE("degenerate range gets scale 1 and a diagnostic") {
    std::string diag;
    QuantParams qp = activation_qparams(3.2f, 3.2f, &diag);
    CHECK(qp.scale == 1.0f);
    CHECK(!diag.empty());
    // the single value survives the round trip within half a step
    CHECK(std::fabs(qp.dequant(qp.quant(3.2f)) - 3.2f) <= 0.5f);
}

TEST_CASE("dequant(quant(x)) is within scale/2 for every element") {
    for (uint64_t seed = 50; seed < 60; ++seed) {
        Tensor w = rand_tensor({64}, seed, -2.0f, 2.0f);
        QuantParams qp = weight_qparams(w);
        for (int64_t i = 0; i < w.elem_count(); ++i) {
            float x = w.f32_data()[i];
            float back = qp.dequant(qp.quant(x));
            CHECK(std::fabs(back - x) <= qp.scale / 2.0f + 1e-7f);
        }
    }

    // zero tensor round-trips exactly
    Tensor z = Tensor::f32({8});
    QuantParams qp = weight_qparams(z);
    for (int64_t i = 0; i < z.elem_count(); ++i)
        CHECK(qp.dequant(qp.quant(z.f32_data()[i])) == 0.0f);
}

TEST_CASE("quantize then dequantize a full graph bounds weight error by scale/2") {
    Graph g = three_layer_net(7);
    CalibrationStats stats = calibrate(g, {input_for(g, 60)});
    Graph q = quantize(g, stats, QuantScheme::I8).graph;
    Graph back = dequantize(q);

    for (const Node& n : g.nodes) {
        if (n.kind != OpKind::Conv2D && n.kind != OpKind::DepthwiseConv2D &&
            n.kind != OpKind::Dense)
            continue;
        const Tensor& orig = g.weight(n.inputs[1]);
        const Tensor& rest = back.weight(n.inputs[1]);
        float scale = q.weight(n.inputs[1]).quant()->scale;
        CHECK(max_abs_diff(orig, rest) <= scale / 2.0f + 1e-7f);
    }
    for (const Node& n : back.nodes) CHECK(!n.out_quant.has_value());
}

TEST_CASE("i8 end-to-end: logits stay close and i8 kernels run exact across paths") {
    Graph g = three_layer_net(8);
    std::vector<Tensor> calib;
    for (uint64_t i = 0; i < 4; ++i) calib.push_back(input_for(g, 70 + i));
    CalibrationStats stats = calibrate(g, calib);
    Graph q = quantize(g, stats, QuantScheme::I8).graph;

    for (int i = 0; i < 20; ++i) {
        Tensor in = input_for(g, 90 + static_cast<uint64_t>(i));
        Tensor qa = run(q, in, ExecPath::Reference);
        Tensor qb = run(q, in, ExecPath::Optimized);
        CHECK(max_abs_diff(qa, qb) == 0.0);  // integer kernels agree bit-exactly

        Tensor f = run(g, in, ExecPath::Reference);
        CHECK(cosine_similarity(f, qa) >= 0.99);
    }
}

TEST_CASE("f16 path keeps top-1 agreement on a seeded small model") {
    ModelSpec spec;
    spec.family = ModelFamily::MobileNetV1;
    spec.alpha = 0.25;
    spec.input_resolution = {64, 64};
    spec.num_classes = 7;
    Graph g = build(spec, 9);
    Graph h = quantize(g, QuantScheme::F16).graph;

    for (int i = 0; i < 10; ++i) {
        Tensor in = rand_tensor({64, 64, 3}, 200 + static_cast<uint64_t>(i), 0.0f, 1.0f);
        auto top_f32 = top_k(run(g, in, ExecPath::Optimized), bin_class_labels(), 1);
        auto top_f16 = top_k(run(h, in, ExecPath::Optimized), bin_class_labels(), 1);
        CHECK(top_f32[0].index == top_f16[0].index);
    }
}
