#include "edgebin/zoo.hpp"

#include <cmath>

#include "edgebin/rng.hpp"
#include "edgebin/serialize.hpp"

namespace edgebin {

const char* model_family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::MobileNetV1: return "mobilenet_v1";
        case ModelFamily::MobileNetV3Large: return "mobilenet_v3_large";
        case ModelFamily::MobileNetV3Small: return "mobilenet_v3_small";
    }
    return "?";
}

ModelFamily model_family_from_name(const std::string& name) {
    if (name == "mobilenet_v1") return ModelFamily::MobileNetV1;
    if (name == "mobilenet_v3_large") return ModelFamily::MobileNetV3Large;
    if (name == "mobilenet_v3_small") return ModelFamily::MobileNetV3Small;
    throw Error(ErrorCode::InvalidArgument, "unknown model family '" + name + "'");
}

namespace {

// weight streams are derived per tensor so layer order never shifts values
class WeightSampler {
public:
    explicit WeightSampler(uint64_t seed) : seed_(seed) {}

    Tensor he_uniform(std::vector<int> shape, int fan_in) {
        Rng rng(derive_seed(seed_, counter_++));
        const double limit = std::sqrt(6.0 / std::max(1, fan_in));
        Tensor t = Tensor::f32(shape);
        float* d = t.f32_data();
        const int64_t n = t.elem_count();
        for (int64_t i = 0; i < n; ++i) d[i] = rng.uniform_f(-limit, limit);
        return t;
    }

    Tensor constant(std::vector<int> shape, float v) {
        Tensor t = Tensor::f32(shape);
        float* d = t.f32_data();
        const int64_t n = t.elem_count();
        for (int64_t i = 0; i < n; ++i) d[i] = v;
        return t;
    }

private:
    uint64_t seed_;
    uint64_t counter_ = 0;
};

int v1_round(int filters, double alpha) {
    return std::max(1, static_cast<int>(std::lround(filters * alpha)));
}

// the divisor-8 rounding used throughout the V3 family
int make_divisible(double v, int divisor = 8) {
    int new_v = std::max(divisor, (static_cast<int>(v + divisor / 2.0) / divisor) * divisor);
    if (new_v < 0.9 * v) new_v += divisor;
    return new_v;
}

struct BuilderCtx {
    GraphBuilder gb;
    WeightSampler ws;

    BuilderCtx(std::string name, uint64_t seed) : gb(std::move(name)), ws(seed) {}

    int conv_bn(int x, int ic, int oc, int k, int stride, OpKind /*unused*/ = OpKind::Conv2D) {
        Tensor w = ws.he_uniform({k, k, ic, oc}, k * k * ic);
        int conv = gb.conv2d(x, std::move(w), std::nullopt, stride, "same");
        return bn(conv, oc);
    }

    int bn(int x, int c) {
        return gb.batch_norm(x, ws.constant({c}, 1.0f), ws.constant({c}, 0.0f),
                             ws.constant({c}, 0.0f), ws.constant({c}, 1.0f), 1e-3);
    }

    int dw_bn(int x, int c, int k, int stride) {
        Tensor w = ws.he_uniform({k, k, c, 1}, k * k);
        int dw = gb.depthwise_conv2d(x, std::move(w), std::nullopt, stride, "same");
        return bn(dw, c);
    }

    int conv1x1_bias(int x, int ic, int oc) {  // SE convs: bias, no BN
        Tensor w = ws.he_uniform({1, 1, ic, oc}, ic);
        Tensor b = ws.constant({oc}, 0.0f);
        return gb.conv2d(x, std::move(w), std::move(b), 1, "valid");
    }
};

int v3_se_block(BuilderCtx& c, int x, int channels) {
    const int squeezed = make_divisible(channels / 4.0);
    int gap = c.gb.global_avg_pool(x);
    int fc1 = c.conv1x1_bias(gap, channels, squeezed);
    int relu = c.gb.relu(fc1);
    int fc2 = c.conv1x1_bias(relu, squeezed, channels);
    int gate = c.gb.hard_sigmoid(fc2);
    return c.gb.mul(x, gate);
}

struct V3Block {
    int kernel;
    int exp_size;
    int out;
    bool se;
    bool hswish;  // false = relu
    int stride;
};

Graph build_v3(const ModelSpec& spec, uint64_t seed, bool large) {
    static const std::vector<V3Block> large_blocks = {
        {3, 16, 16, false, false, 1},  {3, 64, 24, false, false, 2},
        {3, 72, 24, false, false, 1},  {5, 72, 40, true, false, 2},
        {5, 120, 40, true, false, 1},  {5, 120, 40, true, false, 1},
        {3, 240, 80, false, true, 2},  {3, 200, 80, false, true, 1},
        {3, 184, 80, false, true, 1},  {3, 184, 80, false, true, 1},
        {3, 480, 112, true, true, 1},  {3, 672, 112, true, true, 1},
        {5, 672, 160, true, true, 2},  {5, 960, 160, true, true, 1},
        {5, 960, 160, true, true, 1},
    };
    static const std::vector<V3Block> small_blocks = {
        {3, 16, 16, true, false, 2},  {3, 72, 24, false, false, 2},
        {3, 88, 24, false, false, 1}, {5, 96, 40, true, true, 2},
        {5, 240, 40, true, true, 1},  {5, 240, 40, true, true, 1},
        {5, 120, 48, true, true, 1},  {5, 144, 48, true, true, 1},
        {5, 288, 96, true, true, 2},  {5, 576, 96, true, true, 1},
        {5, 576, 96, true, true, 1},
    };
    const auto& blocks = large ? large_blocks : small_blocks;
    const int last_conv = make_divisible((large ? 960 : 576) * spec.alpha);

    BuilderCtx c(std::string(model_family_name(spec.family)), seed);
    int x = c.gb.input({spec.input_resolution.second, spec.input_resolution.first, 3});
    if (spec.resize_front)
        x = c.gb.resize(x, spec.resize_front->second, spec.resize_front->first);

    int channels = make_divisible(16 * spec.alpha);
    x = c.conv_bn(x, 3, channels, 3, 2);
    x = c.gb.hard_swish(x);

    for (const V3Block& blk : blocks) {
        const int exp_c = make_divisible(blk.exp_size * spec.alpha);
        const int out_c = make_divisible(blk.out * spec.alpha);
        const int block_in = x;
        int h = x;
        if (exp_c != channels) {
            h = c.conv_bn(h, channels, exp_c, 1, 1);
            h = blk.hswish ? c.gb.hard_swish(h) : c.gb.relu(h);
        }
        h = c.dw_bn(h, exp_c, blk.kernel, blk.stride);
        h = blk.hswish ? c.gb.hard_swish(h) : c.gb.relu(h);
        if (blk.se) h = v3_se_block(c, h, exp_c);
        // linear projection: batch-norm, no activation
        {
            Tensor w = c.ws.he_uniform({1, 1, exp_c, out_c}, exp_c);
            int conv = c.gb.conv2d(h, std::move(w), std::nullopt, 1, "same");
            h = c.bn(conv, out_c);
        }
        if (blk.stride == 1 && channels == out_c) h = c.gb.add(block_in, h);
        channels = out_c;
        x = h;
    }

    x = c.conv_bn(x, channels, last_conv, 1, 1);
    x = c.gb.hard_swish(x);

    int gap = c.gb.global_avg_pool(x);
    Tensor w = c.ws.he_uniform({last_conv, spec.num_classes}, last_conv);
    Tensor b = c.ws.constant({spec.num_classes}, 0.0f);
    int dense = c.gb.dense(gap, std::move(w), std::move(b));
    int softmax = c.gb.softmax(dense);
    c.gb.mark_output(softmax);
    if (spec.num_classes == 7) c.gb.set_class_labels(bin_class_labels());
    return c.gb.finish();
}

Graph build_v1(const ModelSpec& spec, uint64_t seed) {
    // 13 depthwise-separable blocks: (pointwise filters, depthwise stride)
    static const std::vector<std::pair<int, int>> blocks = {
        {64, 1},  {128, 2}, {128, 1}, {256, 2},  {256, 1},  {512, 2}, {512, 1},
        {512, 1}, {512, 1}, {512, 1}, {512, 1},  {1024, 2}, {1024, 1},
    };

    BuilderCtx c(std::string(model_family_name(spec.family)), seed);
    int x = c.gb.input({spec.input_resolution.second, spec.input_resolution.first, 3});
    if (spec.resize_front)
        x = c.gb.resize(x, spec.resize_front->second, spec.resize_front->first);

    int channels = v1_round(32, spec.alpha);
    x = c.conv_bn(x, 3, channels, 3, 2);
    x = c.gb.relu6(x);

    for (const auto& [filters, stride] : blocks) {
        const int out_c = v1_round(filters, spec.alpha);
        x = c.dw_bn(x, channels, 3, stride);
        x = c.gb.relu6(x);
        {
            Tensor w = c.ws.he_uniform({1, 1, channels, out_c}, channels);
            int conv = c.gb.conv2d(x, std::move(w), std::nullopt, 1, "same");
            x = c.bn(conv, out_c);
        }
        x = c.gb.relu6(x);
        channels = out_c;
    }

    int gap = c.gb.global_avg_pool(x);
    Tensor w = c.ws.he_uniform({channels, spec.num_classes}, channels);
    Tensor b = c.ws.constant({spec.num_classes}, 0.0f);
    int dense = c.gb.dense(gap, std::move(w), std::move(b));
    int softmax = c.gb.softmax(dense);
    c.gb.mark_output(softmax);
    if (spec.num_classes == 7) c.gb.set_class_labels(bin_class_labels());
    return c.gb.finish();
}

}  // namespace

Graph build(const ModelSpec& spec, uint64_t seed) {
    const double a = spec.alpha;
    if (a != 0.25 && a != 0.5 && a != 0.75 && a != 1.0)
        throw Error(ErrorCode::UnsupportedAlpha,
                    "alpha must be one of 0.25, 0.5, 0.75, 1.0; got " + std::to_string(a));
    if (spec.num_classes < 2)
        throw Error(ErrorCode::InvalidArgument, "num_classes must be at least 2");
    if (spec.input_resolution.first <= 0 || spec.input_resolution.second <= 0)
        throw Error(ErrorCode::InvalidArgument, "input resolution must be positive");

    switch (spec.family) {
        case ModelFamily::MobileNetV1: return build_v1(spec, seed);
        case ModelFamily::MobileNetV3Large: return build_v3(spec, seed, true);
        case ModelFamily::MobileNetV3Small: return build_v3(spec, seed, false);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown model family");
}

int64_t param_count(const Graph& graph) {
    int64_t total = 0;
    for (const auto& [id, t] : graph.weights) total += t.elem_count();
    return total;
}

int64_t estimate_file_size(const Graph& graph, DType dtype) {
    // container header (4 magic + 4 version + 8 + 8 length fields)
    return 24 + static_cast<int64_t>(manifest_byte_size(graph)) +
           param_count(graph) * static_cast<int64_t>(dtype_bytes(dtype));
}

}  // namespace edgebin
