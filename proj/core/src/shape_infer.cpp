#include "edgebin/shape_infer.hpp"

#include <algorithm>
#include <map>

namespace edgebin {

int conv_out_extent(int in, int kernel, int stride, const std::string& padding) {
    if (stride < 1) throw Error(ErrorCode::UnknownAttribute, "stride must be >= 1");
    if (padding == "same") {
        return (in + stride - 1) / stride;
    }
    if (padding == "valid") {
        if (in < kernel)
            throw Error(ErrorCode::ShapeMismatch,
                        "valid-pad window " + std::to_string(kernel) + " larger than input " +
                            std::to_string(in));
        return (in - kernel) / stride + 1;
    }
    throw Error(ErrorCode::UnknownAttribute, "padding must be 'same' or 'valid', got '" +
                                                 padding + "'");
}

PadAmount same_pad_amount(int in, int kernel, int stride) {
    int out = (in + stride - 1) / stride;
    int total = std::max(0, (out - 1) * stride + kernel - in);
    PadAmount p;
    p.before = total / 2;
    p.after = total - p.before;
    return p;
}

namespace {

[[noreturn]] void shape_error(const Node& n, const std::string& what) {
    throw Error(ErrorCode::ShapeMismatch, std::string(op_kind_name(n.kind)) + " node " +
                                              std::to_string(n.id) + ": " + what);
}

void expect_inputs(const Node& n, size_t lo, size_t hi) {
    if (n.inputs.size() < lo || n.inputs.size() > hi)
        shape_error(n, "expected " + std::to_string(lo) +
                           (hi != lo ? ".." + std::to_string(hi) : "") + " inputs, got " +
                           std::to_string(n.inputs.size()));
}

std::vector<int> hwc(const Node& n, const std::vector<int>& s) {
    if (s.size() != 3) shape_error(n, "expected HWC activation, got " + shape_to_string(s));
    return s;
}

}  // namespace

std::vector<int> infer_node_shape(const Graph& graph, const Node& node,
                                  const std::vector<std::vector<int>>& in) {
    switch (node.kind) {
        case OpKind::Input: {
            auto s = attr_ints(node, "shape");
            return std::vector<int>(s.begin(), s.end());
        }
        case OpKind::Const:
            return graph.weight(node.id).shape();
        case OpKind::Conv2D: {
            expect_inputs(node, 2, 3);
            auto x = hwc(node, in[0]);
            auto kernel = attr_ints(node, "kernel");
            int filters = static_cast<int>(attr_int(node, "filters"));
            int stride = static_cast<int>(attr_int(node, "stride"));
            std::string padding = attr_str(node, "padding");
            const auto& w = in[1];
            if (w.size() != 4 || w[0] != kernel[0] || w[1] != kernel[1] || w[2] != x[2] ||
                w[3] != filters)
                shape_error(node, "weight shape " + shape_to_string(w) +
                                      " does not match kernel/filters/input channels");
            if (node.inputs.size() == 3 && (in[2].size() != 1 || in[2][0] != filters))
                shape_error(node, "bias shape " + shape_to_string(in[2]) + " != [filters]");
            return {conv_out_extent(x[0], static_cast<int>(kernel[0]), stride, padding),
                    conv_out_extent(x[1], static_cast<int>(kernel[1]), stride, padding), filters};
        }
        case OpKind::DepthwiseConv2D: {
            expect_inputs(node, 2, 3);
            auto x = hwc(node, in[0]);
            auto kernel = attr_ints(node, "kernel");
            int stride = static_cast<int>(attr_int(node, "stride"));
            std::string padding = attr_str(node, "padding");
            const auto& w = in[1];
            if (w.size() != 4 || w[0] != kernel[0] || w[1] != kernel[1] || w[2] != x[2] ||
                w[3] != 1)
                shape_error(node, "depthwise weight shape " + shape_to_string(w) +
                                      " must be [kh,kw,C,1] with C matching input");
            if (node.inputs.size() == 3 && (in[2].size() != 1 || in[2][0] != x[2]))
                shape_error(node, "bias shape " + shape_to_string(in[2]) + " != [channels]");
            return {conv_out_extent(x[0], static_cast<int>(kernel[0]), stride, padding),
                    conv_out_extent(x[1], static_cast<int>(kernel[1]), stride, padding), x[2]};
        }
        case OpKind::Dense: {
            expect_inputs(node, 2, 3);
            int units = static_cast<int>(attr_int(node, "units"));
            int64_t flat = shape_elem_count(in[0]);
            // accepts [C] or [1,1,C] (anything that flattens)
            const auto& w = in[1];
            if (w.size() != 2 || w[0] != flat || w[1] != units)
                shape_error(node, "weight shape " + shape_to_string(w) + " != [" +
                                      std::to_string(flat) + "," + std::to_string(units) + "]");
            if (node.inputs.size() == 3 && (in[2].size() != 1 || in[2][0] != units))
                shape_error(node, "bias shape " + shape_to_string(in[2]) + " != [units]");
            return {units};
        }
        case OpKind::BatchNorm: {
            expect_inputs(node, 5, 5);
            auto x = hwc(node, in[0]);
            int c = x[2];
            for (int i = 1; i <= 4; ++i)
                if (in[i].size() != 1 || in[i][0] != c)
                    shape_error(node, "batch-norm parameter " + std::to_string(i) + " shape " +
                                          shape_to_string(in[i]) + " != [channels]");
            return x;
        }
        case OpKind::ReLU:
        case OpKind::ReLU6:
        case OpKind::HardSwish:
        case OpKind::HardSigmoid:
        case OpKind::Softmax:
            expect_inputs(node, 1, 1);
            return in[0];
        case OpKind::AvgPool:
        case OpKind::MaxPool: {
            expect_inputs(node, 1, 1);
            auto x = hwc(node, in[0]);
            int window = static_cast<int>(attr_int(node, "window"));
            int stride = static_cast<int>(attr_int(node, "stride"));
            std::string padding = attr_str(node, "padding");
            return {conv_out_extent(x[0], window, stride, padding),
                    conv_out_extent(x[1], window, stride, padding), x[2]};
        }
        case OpKind::GlobalAvgPool: {
            expect_inputs(node, 1, 1);
            auto x = hwc(node, in[0]);
            return {1, 1, x[2]};
        }
        case OpKind::Add:
        case OpKind::Mul: {
            expect_inputs(node, 2, 2);
            const auto& a = in[0];
            const auto& b = in[1];
            if (a == b) return a;
            // broadcast: equal rank with dims equal or 1, or a scalar [1]
            if (b.size() == 1 && b[0] == 1) return a;
            if (a.size() == 1 && a[0] == 1) return b;
            if (a.size() == b.size()) {
                std::vector<int> out(a.size());
                for (size_t i = 0; i < a.size(); ++i) {
                    if (a[i] == b[i] || b[i] == 1)
                        out[i] = a[i];
                    else if (a[i] == 1)
                        out[i] = b[i];
                    else
                        shape_error(node, "cannot broadcast " + shape_to_string(a) + " with " +
                                              shape_to_string(b));
                }
                return out;
            }
            shape_error(node, "cannot broadcast " + shape_to_string(a) + " with " +
                                  shape_to_string(b));
        }
        case OpKind::Pad: {
            expect_inputs(node, 1, 1);
            auto pads = attr_ints(node, "pads");
            const auto& x = in[0];
            if (pads.size() != 2 * x.size())
                shape_error(node, "pads must list before/after per dimension");
            std::vector<int> out(x.size());
            for (size_t i = 0; i < x.size(); ++i) {
                if (pads[2 * i] < 0 || pads[2 * i + 1] < 0)
                    shape_error(node, "negative padding");
                out[i] = x[i] + static_cast<int>(pads[2 * i] + pads[2 * i + 1]);
            }
            return out;
        }
        case OpKind::Resize: {
            expect_inputs(node, 1, 1);
            auto x = hwc(node, in[0]);
            int h = static_cast<int>(attr_int(node, "height"));
            int w = static_cast<int>(attr_int(node, "width"));
            if (h <= 0 || w <= 0) shape_error(node, "resize target must be positive");
            return {h, w, x[2]};
        }
        case OpKind::Reshape: {
            expect_inputs(node, 1, 1);
            auto target = attr_ints(node, "shape");
            std::vector<int> out(target.begin(), target.end());
            if (shape_elem_count(out) != shape_elem_count(in[0]))
                shape_error(node, "reshape to " + shape_to_string(out) +
                                      " changes element count from " + shape_to_string(in[0]));
            return out;
        }
    }
    throw Error(ErrorCode::UnsupportedOp, "cannot infer shape");
}

std::map<int, std::vector<int>> infer_shape_map(const Graph& g) {
    std::map<int, std::vector<int>> shapes;

    // resolve in a data-dependency order without assuming the node list is sorted
    std::map<int, size_t> index;
    for (size_t i = 0; i < g.nodes.size(); ++i) index[g.nodes[i].id] = i;

    std::vector<int> state(g.nodes.size(), 0);  // 0 unvisited, 1 visiting, 2 done
    std::vector<size_t> stack;

    auto resolve = [&](size_t start) {
        stack.push_back(start);
        while (!stack.empty()) {
            size_t i = stack.back();
            const Node& n = g.nodes[i];
            if (state[i] == 2) {
                stack.pop_back();
                continue;
            }
            bool ready = true;
            for (int in_id : n.inputs) {
                auto it = index.find(in_id);
                if (it == index.end())
                    throw Error(ErrorCode::ShapeMismatch,
                                "node " + std::to_string(n.id) + " references missing id " +
                                    std::to_string(in_id));
                if (state[it->second] != 2) {
                    if (state[it->second] == 1)
                        throw Error(ErrorCode::CycleDetected,
                                    "cycle through node " + std::to_string(n.id));
                    stack.push_back(it->second);
                    ready = false;
                }
            }
            if (!ready) {
                state[i] = 1;
                continue;
            }
            std::vector<std::vector<int>> ins;
            ins.reserve(n.inputs.size());
            for (int in_id : n.inputs) ins.push_back(shapes.at(in_id));
            shapes[n.id] = infer_node_shape(g, n, ins);
            state[i] = 2;
            stack.pop_back();
        }
    };

    for (size_t i = 0; i < g.nodes.size(); ++i)
        if (state[i] != 2) resolve(i);
    return shapes;
}

Graph infer_shapes(const Graph& graph) {
    auto shapes = infer_shape_map(graph);
    Graph g = graph;
    for (Node& n : g.nodes) n.out_shape = shapes.at(n.id);
    return g;
}

}  // namespace edgebin
