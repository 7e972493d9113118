#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "edgebin/tensor.hpp"

namespace edgebin {

enum class OpKind {
    Input,  // graph input placeholder; carries shape/dtype attributes
    Const,
    Conv2D,
    DepthwiseConv2D,
    Dense,
    BatchNorm,
    ReLU,
    ReLU6,
    HardSwish,
    HardSigmoid,
    AvgPool,
    MaxPool,
    GlobalAvgPool,
    Softmax,
    Add,
    Mul,
    Pad,
    Resize,
    Reshape,
};

const char* op_kind_name(OpKind k);
OpKind op_kind_from_name(const std::string& name);

// Fused activation slot on Conv2D / DepthwiseConv2D / Dense.
enum class FusedAct { None, Relu, Relu6, HSwish };
const char* fused_act_name(FusedAct a);
FusedAct fused_act_from_name(const std::string& name);

using AttrValue = std::variant<int64_t, double, std::string, std::vector<int64_t>>;
using AttrMap = std::map<std::string, AttrValue>;

struct Node {
    int id = -1;
    OpKind kind = OpKind::Input;
    AttrMap attrs;
    std::vector<int> inputs;

    // annotations
    std::optional<std::vector<int>> out_shape;   // filled by infer_shapes
    std::optional<QuantParams> out_quant;        // filled by i8 quantization

    bool operator==(const Node&) const = default;
};

// Attribute accessors; missing or wrongly typed attributes raise UnknownAttribute.
int64_t attr_int(const Node& n, const std::string& key);
int64_t attr_int_or(const Node& n, const std::string& key, int64_t fallback);
double attr_double(const Node& n, const std::string& key);
double attr_double_or(const Node& n, const std::string& key, double fallback);
std::string attr_str(const Node& n, const std::string& key);
std::string attr_str_or(const Node& n, const std::string& key, const std::string& fallback);
std::vector<int64_t> attr_ints(const Node& n, const std::string& key);

struct GraphMetadata {
    std::string name;
    std::vector<std::string> class_labels;

    bool operator==(const GraphMetadata&) const = default;
};

// The canonical seven-class label order for bin models.
const std::vector<std::string>& bin_class_labels();
// The five recycling container labels (no hand, no empty).
const std::vector<std::string>& recycling_labels();

// Directed acyclic operator graph. Node ids are stable; Const node payloads
// live in `weights`. Graphs are treated as immutable once built: passes
// produce new graphs.
struct Graph {
    std::vector<Node> nodes;
    std::map<int, Tensor> weights;
    std::vector<int> inputs;
    std::vector<int> outputs;
    GraphMetadata metadata;

    bool has_node(int id) const;
    const Node& node(int id) const;
    Node& node(int id);
    int max_id() const;

    // ids of nodes that consume `id` as an input
    std::vector<int> consumers(int id) const;

    const Tensor& weight(int id) const;

    int64_t total_weight_bytes() const;

    bool operator==(const Graph&) const = default;
};

// Incremental construction helper used by the model zoo and tests.
class GraphBuilder {
public:
    explicit GraphBuilder(std::string name = "");

    int input(std::vector<int> shape, DType dtype = DType::F32);
    int constant(Tensor t);

    // convenience wrappers; weight/bias tensors become Const nodes
    int conv2d(int x, Tensor w, std::optional<Tensor> b, int stride,
               const std::string& padding, FusedAct act = FusedAct::None);
    int depthwise_conv2d(int x, Tensor w, std::optional<Tensor> b, int stride,
                         const std::string& padding, FusedAct act = FusedAct::None);
    int dense(int x, Tensor w, std::optional<Tensor> b, FusedAct act = FusedAct::None);
    int batch_norm(int x, Tensor gamma, Tensor beta, Tensor mean, Tensor variance,
                   double epsilon = 1e-3);
    int relu(int x);
    int relu6(int x);
    int hard_swish(int x);
    int hard_sigmoid(int x);
    int avg_pool(int x, int window, int stride, const std::string& padding);
    int max_pool(int x, int window, int stride, const std::string& padding);
    int global_avg_pool(int x);
    int softmax(int x);
    int add(int a, int b);
    int mul(int a, int b);
    int pad(int x, const std::vector<int64_t>& pads, double value = 0.0);
    int resize(int x, int out_h, int out_w);
    int reshape(int x, const std::vector<int64_t>& shape);

    // generic escape hatch
    int op(OpKind kind, std::vector<int> inputs, AttrMap attrs = {});

    void mark_output(int id);
    void set_class_labels(std::vector<std::string> labels);

    Graph finish();

private:
    Graph g_;
    int next_id_ = 0;
    int fresh_id() { return next_id_++; }
};

}  // namespace edgebin
