#include "edgebin/validate.hpp"

#include <map>
#include <set>
#include <sstream>

namespace edgebin {

const char* diag_code_name(DiagCode code) {
    switch (code) {
        case DiagCode::DanglingInput: return "DanglingInput";
        case DiagCode::CycleDetected: return "CycleDetected";
        case DiagCode::DuplicateId: return "DuplicateId";
        case DiagCode::MissingWeight: return "MissingWeight";
        case DiagCode::OrphanWeight: return "OrphanWeight";
        case DiagCode::WeightShapeMismatch: return "WeightShapeMismatch";
        case DiagCode::MultiGraphInput: return "MultiGraphInput";
        case DiagCode::MultiGraphOutput: return "MultiGraphOutput";
        case DiagCode::NoGraphOutput: return "NoGraphOutput";
        case DiagCode::BadInputNode: return "BadInputNode";
        case DiagCode::BadLabels: return "BadLabels";
        case DiagCode::BadQuant: return "BadQuant";
    }
    return "?";
}

namespace {

void check_weight_shapes(const Graph& g, const Node& n, std::vector<Diagnostic>& out) {
    auto weight_of = [&](int id) -> const Tensor* {
        if (!g.has_node(id) || g.node(id).kind != OpKind::Const) return nullptr;
        auto it = g.weights.find(id);
        return it == g.weights.end() ? nullptr : &it->second;
    };
    auto complain = [&](const std::string& msg) {
        out.push_back({DiagCode::WeightShapeMismatch, n.id,
                       std::string(op_kind_name(n.kind)) + " node " + std::to_string(n.id) +
                           ": " + msg});
    };

    if (n.kind == OpKind::Conv2D || n.kind == OpKind::DepthwiseConv2D) {
        if (n.inputs.size() < 2) return;
        const Tensor* w = weight_of(n.inputs[1]);
        if (!w) return;  // non-const weights are caught at execution
        auto kernel = attr_ints(n, "kernel");
        if (w->rank() != 4 || w->dim(0) != kernel[0] || w->dim(1) != kernel[1]) {
            complain("kernel attribute " + std::to_string(kernel[0]) + "x" +
                     std::to_string(kernel[1]) + " does not match weight " + w->shape_str());
            return;
        }
        if (n.kind == OpKind::Conv2D) {
            int filters = static_cast<int>(attr_int(n, "filters"));
            if (w->dim(3) != filters)
                complain("filters attribute " + std::to_string(filters) +
                         " does not match weight " + w->shape_str());
        } else if (w->dim(3) != 1) {
            complain("depthwise weight must have a single output multiplier, got " +
                     w->shape_str());
        }
    } else if (n.kind == OpKind::Dense) {
        if (n.inputs.size() < 2) return;
        const Tensor* w = weight_of(n.inputs[1]);
        if (!w) return;
        int units = static_cast<int>(attr_int(n, "units"));
        if (w->rank() != 2 || w->dim(1) != units)
            complain("units attribute " + std::to_string(units) + " does not match weight " +
                     w->shape_str());
    }
}

}  // namespace

std::vector<Diagnostic> validate(const Graph& g) {
    std::vector<Diagnostic> out;

    std::set<int> ids;
    for (const Node& n : g.nodes) {
        if (!ids.insert(n.id).second)
            out.push_back({DiagCode::DuplicateId, n.id,
                           "node id " + std::to_string(n.id) + " appears more than once"});
    }

    for (const Node& n : g.nodes)
        for (int in : n.inputs)
            if (!ids.count(in))
                out.push_back({DiagCode::DanglingInput, in,
                               "node " + std::to_string(n.id) + " references missing id " +
                                   std::to_string(in)});
    for (int id : g.inputs)
        if (!ids.count(id))
            out.push_back({DiagCode::DanglingInput, id,
                           "graph input references missing id " + std::to_string(id)});
    for (int id : g.outputs)
        if (!ids.count(id))
            out.push_back({DiagCode::DanglingInput, id,
                           "graph output references missing id " + std::to_string(id)});

    // cycle detection with node-id colors (only over resolvable edges)
    std::map<int, int> color;  // 0 white, 1 grey, 2 black
    bool cycle = false;
    std::vector<std::pair<int, size_t>> stack;
    for (const Node& start : g.nodes) {
        if (color[start.id]) continue;
        stack.push_back({start.id, 0});
        color[start.id] = 1;
        while (!stack.empty() && !cycle) {
            auto& [id, edge] = stack.back();
            const Node& n = g.node(id);
            if (edge < n.inputs.size()) {
                int next = n.inputs[edge++];
                if (!ids.count(next)) continue;
                if (color[next] == 1) {
                    cycle = true;
                    out.push_back({DiagCode::CycleDetected, next,
                                   "cycle through node " + std::to_string(next)});
                } else if (color[next] == 0) {
                    color[next] = 1;
                    stack.push_back({next, 0});
                }
            } else {
                color[id] = 2;
                stack.pop_back();
            }
        }
        stack.clear();
        if (cycle) break;
    }

    // Const payloads and orphan weights
    for (const Node& n : g.nodes) {
        if (n.kind == OpKind::Const && !g.weights.count(n.id))
            out.push_back({DiagCode::MissingWeight, n.id,
                           "Const node " + std::to_string(n.id) + " has no weight tensor"});
        if (n.kind != OpKind::Const && g.weights.count(n.id))
            out.push_back({DiagCode::OrphanWeight, n.id,
                           "non-Const node " + std::to_string(n.id) + " has a weight tensor"});
        if (n.kind == OpKind::Input) {
            if (n.attrs.find("shape") == n.attrs.end())
                out.push_back({DiagCode::BadInputNode, n.id, "Input node missing shape"});
            bool listed = false;
            for (int id : g.inputs) listed = listed || id == n.id;
            if (!listed)
                out.push_back({DiagCode::BadInputNode, n.id,
                               "Input node " + std::to_string(n.id) +
                                   " not listed in graph inputs"});
        }
    }
    for (const auto& [id, t] : g.weights) {
        (void)t;
        if (!ids.count(id))
            out.push_back({DiagCode::OrphanWeight, id,
                           "weight tensor for missing node " + std::to_string(id)});
    }

    // weight shapes vs attributes
    if (!cycle)
        for (const Node& n : g.nodes) {
            try {
                check_weight_shapes(g, n, out);
            } catch (const Error& e) {
                out.push_back({DiagCode::WeightShapeMismatch, n.id, e.what()});
            }
        }

    // classifier-graph conventions
    if (g.inputs.size() > 1)
        out.push_back({DiagCode::MultiGraphInput, -1,
                       "classifier graphs take exactly one input, got " +
                           std::to_string(g.inputs.size())});
    if (g.outputs.size() > 1)
        out.push_back({DiagCode::MultiGraphOutput, -1,
                       "classifier graphs produce exactly one output, got " +
                           std::to_string(g.outputs.size())});
    if (g.outputs.empty() && !g.nodes.empty())
        out.push_back({DiagCode::NoGraphOutput, -1, "graph has no output"});

    if (g.metadata.class_labels.size() == 7 && g.metadata.class_labels != bin_class_labels()) {
        out.push_back({DiagCode::BadLabels, -1,
                       "seven-class bin models must use the canonical label order"});
    }

    // quant params belong only on i8 weights
    for (const auto& [id, t] : g.weights) {
        (void)id;
        if ((t.dtype() == DType::I8) != t.quant().has_value()) {
            out.push_back({DiagCode::BadQuant, id, "weight quant params inconsistent with dtype"});
            break;
        }
    }

    return out;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
    std::ostringstream os;
    for (const auto& d : diags)
        os << diag_code_name(d.code) << " (node " << d.node_id << "): " << d.message << "\n";
    return os.str();
}

}  // namespace edgebin
