#include "edgebin/graph.hpp"

#include <algorithm>

namespace edgebin {

namespace {
struct KindName {
    OpKind kind;
    const char* name;
};
constexpr KindName kKindNames[] = {
    {OpKind::Input, "Input"},
    {OpKind::Const, "Const"},
    {OpKind::Conv2D, "Conv2D"},
    {OpKind::DepthwiseConv2D, "DepthwiseConv2D"},
    {OpKind::Dense, "Dense"},
    {OpKind::BatchNorm, "BatchNorm"},
    {OpKind::ReLU, "ReLU"},
    {OpKind::ReLU6, "ReLU6"},
    {OpKind::HardSwish, "HardSwish"},
    {OpKind::HardSigmoid, "HardSigmoid"},
    {OpKind::AvgPool, "AvgPool"},
    {OpKind::MaxPool, "MaxPool"},
    {OpKind::GlobalAvgPool, "GlobalAvgPool"},
    {OpKind::Softmax, "Softmax"},
    {OpKind::Add, "Add"},
    {OpKind::Mul, "Mul"},
    {OpKind::Pad, "Pad"},
    {OpKind::Resize, "Resize"},
    {OpKind::Reshape, "Reshape"},
};
}  // namespace

const char* op_kind_name(OpKind k) {
    for (const auto& kn : kKindNames)
        if (kn.kind == k) return kn.name;
    return "?";
}

OpKind op_kind_from_name(const std::string& name) {
    for (const auto& kn : kKindNames)
        if (name == kn.name) return kn.kind;
    throw Error(ErrorCode::CorruptManifest, "unknown op kind '" + name + "'");
}

const char* fused_act_name(FusedAct a) {
    switch (a) {
        case FusedAct::None: return "none";
        case FusedAct::Relu: return "relu";
        case FusedAct::Relu6: return "relu6";
        case FusedAct::HSwish: return "hswish";
    }
    return "?";
}

FusedAct fused_act_from_name(const std::string& name) {
    if (name == "none") return FusedAct::None;
    if (name == "relu") return FusedAct::Relu;
    if (name == "relu6") return FusedAct::Relu6;
    if (name == "hswish") return FusedAct::HSwish;
    throw Error(ErrorCode::UnknownAttribute, "unknown activation '" + name + "'");
}

namespace {
const AttrValue* find_attr(const Node& n, const std::string& key) {
    auto it = n.attrs.find(key);
    return it == n.attrs.end() ? nullptr : &it->second;
}

[[noreturn]] void missing(const Node& n, const std::string& key) {
    throw Error(ErrorCode::UnknownAttribute,
                std::string(op_kind_name(n.kind)) + " node " + std::to_string(n.id) +
                    " missing attribute '" + key + "'");
}
}  // namespace

int64_t attr_int(const Node& n, const std::string& key) {
    const AttrValue* v = find_attr(n, key);
    if (!v || !std::holds_alternative<int64_t>(*v)) missing(n, key);
    return std::get<int64_t>(*v);
}

int64_t attr_int_or(const Node& n, const std::string& key, int64_t fallback) {
    const AttrValue* v = find_attr(n, key);
    return v && std::holds_alternative<int64_t>(*v) ? std::get<int64_t>(*v) : fallback;
}

double attr_double(const Node& n, const std::string& key) {
    const AttrValue* v = find_attr(n, key);
    if (!v) missing(n, key);
    if (std::holds_alternative<double>(*v)) return std::get<double>(*v);
    if (std::holds_alternative<int64_t>(*v)) return static_cast<double>(std::get<int64_t>(*v));
    missing(n, key);
}

double attr_double_or(const Node& n, const std::string& key, double fallback) {
    const AttrValue* v = find_attr(n, key);
    if (!v) return fallback;
    if (std::holds_alternative<double>(*v)) return std::get<double>(*v);
    if (std::holds_alternative<int64_t>(*v)) return static_cast<double>(std::get<int64_t>(*v));
    return fallback;
}

std::string attr_str(const Node& n, const std::string& key) {
    const AttrValue* v = find_attr(n, key);
    if (!v || !std::holds_alternative<std::string>(*v)) missing(n, key);
    return std::get<std::string>(*v);
}

std::string attr_str_or(const Node& n, const std::string& key, const std::string& fallback) {
    const AttrValue* v = find_attr(n, key);
    return v && std::holds_alternative<std::string>(*v) ? std::get<std::string>(*v) : fallback;
}

std::vector<int64_t> attr_ints(const Node& n, const std::string& key) {
    const AttrValue* v = find_attr(n, key);
    if (!v || !std::holds_alternative<std::vector<int64_t>>(*v)) missing(n, key);
    return std::get<std::vector<int64_t>>(*v);
}

const std::vector<std::string>& bin_class_labels() {
    static const std::vector<std::string> labels = {"cardboard", "glass", "paper", "plastic",
                                                    "metal",     "hand",  "empty"};
    return labels;
}

const std::vector<std::string>& recycling_labels() {
    static const std::vector<std::string> labels = {"cardboard", "glass", "paper", "plastic",
                                                    "metal"};
    return labels;
}

bool Graph::has_node(int id) const {
    return std::any_of(nodes.begin(), nodes.end(), [id](const Node& n) { return n.id == id; });
}

const Node& Graph::node(int id) const {
    for (const Node& n : nodes)
        if (n.id == id) return n;
    throw Error(ErrorCode::InvalidArgument, "no node with id " + std::to_string(id));
}

Node& Graph::node(int id) {
    for (Node& n : nodes)
        if (n.id == id) return n;
    throw Error(ErrorCode::InvalidArgument, "no node with id " + std::to_string(id));
}

int Graph::max_id() const {
    int m = -1;
    for (const Node& n : nodes) m = std::max(m, n.id);
    return m;
}

std::vector<int> Graph::consumers(int id) const {
    std::vector<int> out;
    for (const Node& n : nodes)
        for (int in : n.inputs)
            if (in == id) {
                out.push_back(n.id);
                break;
            }
    return out;
}

const Tensor& Graph::weight(int id) const {
    auto it = weights.find(id);
    if (it == weights.end())
        throw Error(ErrorCode::InvalidArgument, "no weight for node " + std::to_string(id));
    return it->second;
}

int64_t Graph::total_weight_bytes() const {
    int64_t total = 0;
    for (const auto& [id, t] : weights) total += static_cast<int64_t>(t.byte_size());
    return total;
}

GraphBuilder::GraphBuilder(std::string name) { g_.metadata.name = std::move(name); }

int GraphBuilder::input(std::vector<int> shape, DType dtype) {
    Node n;
    n.id = fresh_id();
    n.kind = OpKind::Input;
    std::vector<int64_t> s(shape.begin(), shape.end());
    n.attrs["shape"] = s;
    n.attrs["dtype"] = std::string(dtype_name(dtype));
    g_.nodes.push_back(std::move(n));
    g_.inputs.push_back(g_.nodes.back().id);
    return g_.nodes.back().id;
}

int GraphBuilder::constant(Tensor t) {
    Node n;
    n.id = fresh_id();
    n.kind = OpKind::Const;
    int id = n.id;
    g_.nodes.push_back(std::move(n));
    g_.weights.emplace(id, std::move(t));
    return id;
}

int GraphBuilder::op(OpKind kind, std::vector<int> inputs, AttrMap attrs) {
    Node n;
    n.id = fresh_id();
    n.kind = kind;
    n.inputs = std::move(inputs);
    n.attrs = std::move(attrs);
    g_.nodes.push_back(std::move(n));
    return g_.nodes.back().id;
}

int GraphBuilder::conv2d(int x, Tensor w, std::optional<Tensor> b, int stride,
                         const std::string& padding, FusedAct act) {
    if (w.rank() != 4) throw Error(ErrorCode::ShapeMismatch, "conv weights must be HWIO rank 4");
    AttrMap attrs;
    attrs["kernel"] = std::vector<int64_t>{w.dim(0), w.dim(1)};
    attrs["filters"] = static_cast<int64_t>(w.dim(3));
    attrs["stride"] = static_cast<int64_t>(stride);
    attrs["padding"] = padding;
    attrs["act"] = std::string(fused_act_name(act));
    std::vector<int> ins{x, constant(std::move(w))};
    if (b) ins.push_back(constant(std::move(*b)));
    return op(OpKind::Conv2D, std::move(ins), std::move(attrs));
}

int GraphBuilder::depthwise_conv2d(int x, Tensor w, std::optional<Tensor> b, int stride,
                                   const std::string& padding, FusedAct act) {
    if (w.rank() != 4)
        throw Error(ErrorCode::ShapeMismatch, "depthwise weights must be HWC1 rank 4");
    AttrMap attrs;
    attrs["kernel"] = std::vector<int64_t>{w.dim(0), w.dim(1)};
    attrs["stride"] = static_cast<int64_t>(stride);
    attrs["padding"] = padding;
    attrs["act"] = std::string(fused_act_name(act));
    std::vector<int> ins{x, constant(std::move(w))};
    if (b) ins.push_back(constant(std::move(*b)));
    return op(OpKind::DepthwiseConv2D, std::move(ins), std::move(attrs));
}

int GraphBuilder::dense(int x, Tensor w, std::optional<Tensor> b, FusedAct act) {
    if (w.rank() != 2) throw Error(ErrorCode::ShapeMismatch, "dense weights must be [in,out]");
    AttrMap attrs;
    attrs["units"] = static_cast<int64_t>(w.dim(1));
    attrs["act"] = std::string(fused_act_name(act));
    std::vector<int> ins{x, constant(std::move(w))};
    if (b) ins.push_back(constant(std::move(*b)));
    return op(OpKind::Dense, std::move(ins), std::move(attrs));
}

int GraphBuilder::batch_norm(int x, Tensor gamma, Tensor beta, Tensor mean, Tensor variance,
                             double epsilon) {
    AttrMap attrs;
    attrs["epsilon"] = epsilon;
    return op(OpKind::BatchNorm,
              {x, constant(std::move(gamma)), constant(std::move(beta)),
               constant(std::move(mean)), constant(std::move(variance))},
              std::move(attrs));
}

int GraphBuilder::relu(int x) { return op(OpKind::ReLU, {x}); }
int GraphBuilder::relu6(int x) { return op(OpKind::ReLU6, {x}); }
int GraphBuilder::hard_swish(int x) { return op(OpKind::HardSwish, {x}); }
int GraphBuilder::hard_sigmoid(int x) { return op(OpKind::HardSigmoid, {x}); }

int GraphBuilder::avg_pool(int x, int window, int stride, const std::string& padding) {
    AttrMap attrs;
    attrs["window"] = static_cast<int64_t>(window);
    attrs["stride"] = static_cast<int64_t>(stride);
    attrs["padding"] = padding;
    return op(OpKind::AvgPool, {x}, std::move(attrs));
}

int GraphBuilder::max_pool(int x, int window, int stride, const std::string& padding) {
    AttrMap attrs;
    attrs["window"] = static_cast<int64_t>(window);
    attrs["stride"] = static_cast<int64_t>(stride);
    attrs["padding"] = padding;
    return op(OpKind::MaxPool, {x}, std::move(attrs));
}

int GraphBuilder::global_avg_pool(int x) { return op(OpKind::GlobalAvgPool, {x}); }
int GraphBuilder::softmax(int x) { return op(OpKind::Softmax, {x}); }
int GraphBuilder::add(int a, int b) { return op(OpKind::Add, {a, b}); }
int GraphBuilder::mul(int a, int b) { return op(OpKind::Mul, {a, b}); }

int GraphBuilder::pad(int x, const std::vector<int64_t>& pads, double value) {
    AttrMap attrs;
    attrs["pads"] = pads;
    attrs["value"] = value;
    return op(OpKind::Pad, {x}, std::move(attrs));
}

int GraphBuilder::resize(int x, int out_h, int out_w) {
    AttrMap attrs;
    attrs["height"] = static_cast<int64_t>(out_h);
    attrs["width"] = static_cast<int64_t>(out_w);
    return op(OpKind::Resize, {x}, std::move(attrs));
}

int GraphBuilder::reshape(int x, const std::vector<int64_t>& shape) {
    AttrMap attrs;
    attrs["shape"] = shape;
    return op(OpKind::Reshape, {x}, std::move(attrs));
}

void GraphBuilder::mark_output(int id) { g_.outputs.push_back(id); }

void GraphBuilder::set_class_labels(std::vector<std::string> labels) {
    g_.metadata.class_labels = std::move(labels);
}

Graph GraphBuilder::finish() { return std::move(g_); }

}  // namespace edgebin
