#include "edgebin/passes.hpp"

#include <algorithm>
#include <cmath>

#include "edgebin/executor.hpp"
#include "edgebin/shape_infer.hpp"

namespace edgebin {

TargetProfile k210_profile() {
    TargetProfile p;
    p.name = "k210";
    p.allowed_kernel_sizes = {{1, 1}, {3, 3}};
    p.max_model_bytes = 6 * 1024 * 1024;
    p.max_input_resolution = {320, 240};
    p.accelerated_ops = {OpKind::Conv2D,  OpKind::DepthwiseConv2D, OpKind::BatchNorm,
                         OpKind::ReLU,    OpKind::ReLU6,           OpKind::HardSwish,
                         OpKind::HardSigmoid, OpKind::AvgPool,     OpKind::MaxPool};
    return p;
}

TargetProfile generic_profile() {
    TargetProfile p;
    p.name = "generic";
    p.max_model_bytes = 0;        // unlimited
    p.max_input_resolution = {0, 0};
    p.accelerated_ops = {OpKind::Input,     OpKind::Const,       OpKind::Conv2D,
                         OpKind::DepthwiseConv2D, OpKind::Dense, OpKind::BatchNorm,
                         OpKind::ReLU,      OpKind::ReLU6,       OpKind::HardSwish,
                         OpKind::HardSigmoid, OpKind::AvgPool,   OpKind::MaxPool,
                         OpKind::GlobalAvgPool, OpKind::Softmax, OpKind::Add,
                         OpKind::Mul,       OpKind::Pad,         OpKind::Resize,
                         OpKind::Reshape};
    return p;
}

TargetProfile profile_by_name(const std::string& name) {
    if (name == "k210") return k210_profile();
    if (name == "generic") return generic_profile();
    throw Error(ErrorCode::InvalidArgument, "unknown target profile '" + name + "'");
}

namespace {

bool is_graph_output(const Graph& g, int id) {
    return std::find(g.outputs.begin(), g.outputs.end(), id) != g.outputs.end();
}

void replace_uses(Graph& g, int old_id, int new_id) {
    for (Node& n : g.nodes)
        for (int& in : n.inputs)
            if (in == old_id) in = new_id;
    for (int& out : g.outputs)
        if (out == old_id) out = new_id;
}

void erase_node(Graph& g, int id) {
    g.nodes.erase(std::remove_if(g.nodes.begin(), g.nodes.end(),
                                 [id](const Node& n) { return n.id == id; }),
                  g.nodes.end());
    g.weights.erase(id);
}

int prune_dead_consts(Graph& g) {
    int removed = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Node& n : g.nodes) {
            if (n.kind != OpKind::Const) continue;
            if (is_graph_output(g, n.id)) continue;
            if (!g.consumers(n.id).empty()) continue;
            erase_node(g, n.id);
            removed++;
            changed = true;
            break;
        }
    }
    return removed;
}

bool fully_annotated(const Graph& g) {
    return std::all_of(g.nodes.begin(), g.nodes.end(),
                       [](const Node& n) { return n.out_shape.has_value(); });
}

Graph reannotate_if(const Graph& g, bool was_annotated) {
    return was_annotated ? infer_shapes(g) : g;
}

FusedAct conv_act(const Node& n) { return fused_act_from_name(attr_str_or(n, "act", "none")); }

}  // namespace

std::pair<Graph, PassReport> fold_constants(const Graph& graph) {
    const bool was_annotated = fully_annotated(graph);
    Graph g = graph;
    PassReport report;
    report.pass = "fold_constants";

    const int before = static_cast<int>(g.nodes.size());
    bool changed = true;
    while (changed) {
        changed = false;
        for (Node& n : g.nodes) {
            if (n.kind == OpKind::Const || n.kind == OpKind::Input || n.inputs.empty()) continue;
            bool all_const = std::all_of(n.inputs.begin(), n.inputs.end(), [&](int id) {
                return g.has_node(id) && g.node(id).kind == OpKind::Const;
            });
            if (!all_const) continue;

            std::vector<Tensor> ins;
            ins.reserve(n.inputs.size());
            for (int id : n.inputs) ins.push_back(g.weight(id));
            Tensor result;
            try {
                result = run_op(n.kind, n.attrs, ins, ExecPath::Reference, n.out_quant);
            } catch (const std::exception& e) {
                throw Error(ErrorCode::ExecFailure,
                            "folding node " + std::to_string(n.id) + " (" +
                                op_kind_name(n.kind) + "): " + e.what());
            }
            report.diagnostics.push_back("folded node " + std::to_string(n.id) + " (" +
                                         op_kind_name(n.kind) + ")");
            n.kind = OpKind::Const;
            n.attrs.clear();
            n.inputs.clear();
            if (n.out_shape) n.out_shape = result.shape();
            n.out_quant = result.quant();
            g.weights.insert_or_assign(n.id, std::move(result));
            changed = true;
        }
    }
    prune_dead_consts(g);
    report.nodes_removed = before - static_cast<int>(g.nodes.size());
    return {reannotate_if(g, was_annotated), report};
}

std::pair<Graph, PassReport> fuse_conv_bn(const Graph& graph) {
    const bool was_annotated = fully_annotated(graph);
    Graph g = graph;
    PassReport report;
    report.pass = "fuse_conv_bn";
    const int before = static_cast<int>(g.nodes.size());

    bool changed = true;
    while (changed) {
        changed = false;
        for (const Node& bn_probe : g.nodes) {
            if (bn_probe.kind != OpKind::BatchNorm) continue;
            const int bn_id = bn_probe.id;
            const Node bn = bn_probe;  // copy; the list is about to change
            if (bn.inputs.empty() || !g.has_node(bn.inputs[0])) continue;
            const int conv_id = bn.inputs[0];
            Node& conv = g.node(conv_id);
            if (conv.kind != OpKind::Conv2D && conv.kind != OpKind::DepthwiseConv2D) continue;

            auto consumers = g.consumers(conv_id);
            if (consumers.size() != 1 || consumers[0] != bn_id || is_graph_output(g, conv_id))
                throw Error(ErrorCode::NonAffinePattern,
                            "conv node " + std::to_string(conv_id) +
                                " output has other consumers; batch-norm fold is not affine");
            if (conv_act(conv) != FusedAct::None)
                throw Error(ErrorCode::NonAffinePattern,
                            "conv node " + std::to_string(conv_id) +
                                " applies an activation before the batch-norm");

            Tensor gamma = g.weight(bn.inputs[1]).to_f32();
            Tensor beta = g.weight(bn.inputs[2]).to_f32();
            Tensor mean = g.weight(bn.inputs[3]).to_f32();
            Tensor var = g.weight(bn.inputs[4]).to_f32();
            const double eps = attr_double_or(bn, "epsilon", 1e-3);

            Tensor w = g.weight(conv.inputs[1]).to_f32();
            const bool has_bias = conv.inputs.size() > 2;
            Tensor bias = has_bias
                              ? g.weight(conv.inputs[2]).to_f32()
                              : Tensor::f32({conv.kind == OpKind::Conv2D ? w.dim(3) : w.dim(2)},
                                            std::vector<float>(
                                                static_cast<size_t>(conv.kind == OpKind::Conv2D
                                                                        ? w.dim(3)
                                                                        : w.dim(2)),
                                                0.0f));

            const int channels = static_cast<int>(gamma.elem_count());
            std::vector<double> scale(static_cast<size_t>(channels));
            for (int c = 0; c < channels; ++c)
                scale[static_cast<size_t>(c)] =
                    static_cast<double>(gamma.f32_data()[c]) /
                    std::sqrt(static_cast<double>(var.f32_data()[c]) + eps);

            float* wd = w.f32_data();
            const int64_t count = w.elem_count();
            if (conv.kind == OpKind::Conv2D) {
                const int oc = w.dim(3);
                if (oc != channels)
                    throw Error(ErrorCode::ShapeMismatch, "batch-norm width != conv filters");
                for (int64_t i = 0; i < count; ++i)
                    wd[i] = static_cast<float>(wd[i] * scale[static_cast<size_t>(i % oc)]);
            } else {
                const int c = w.dim(2);
                if (c != channels)
                    throw Error(ErrorCode::ShapeMismatch, "batch-norm width != conv channels");
                for (int64_t i = 0; i < count; ++i)
                    wd[i] = static_cast<float>(wd[i] * scale[static_cast<size_t>(i % c)]);
            }
            float* bd = bias.f32_data();
            for (int c = 0; c < channels; ++c)
                bd[c] = static_cast<float>(
                    static_cast<double>(beta.f32_data()[c]) +
                    (static_cast<double>(bd[c]) - static_cast<double>(mean.f32_data()[c])) *
                        scale[static_cast<size_t>(c)]);

            // install rewritten parameters; share-safe: fresh consts when the
            // existing ones have other consumers
            const int w_const = conv.inputs[1];
            if (g.consumers(w_const).size() == 1) {
                g.weights.insert_or_assign(w_const, std::move(w));
            } else {
                Node nc;
                nc.id = g.max_id() + 1;
                nc.kind = OpKind::Const;
                if (g.node(w_const).out_shape) nc.out_shape = w.shape();
                const int nc_id = nc.id;
                g.nodes.push_back(nc);  // invalidates node references
                g.weights.emplace(nc_id, std::move(w));
                g.node(conv_id).inputs[1] = nc_id;
                report.nodes_added++;
            }
            const bool bias_in_place =
                has_bias && g.consumers(g.node(conv_id).inputs[2]).size() == 1;
            if (bias_in_place) {
                g.weights.insert_or_assign(g.node(conv_id).inputs[2], std::move(bias));
            } else {
                Node nc;
                nc.id = g.max_id() + 1;
                nc.kind = OpKind::Const;
                const int nc_id = nc.id;
                g.nodes.push_back(nc);
                g.weights.emplace(nc_id, std::move(bias));
                Node& conv_again = g.node(conv_id);
                if (has_bias)
                    conv_again.inputs[2] = nc_id;
                else
                    conv_again.inputs.push_back(nc_id);
                report.nodes_added++;
            }

            replace_uses(g, bn_id, conv_id);
            erase_node(g, bn_id);
            report.nodes_fused++;
            report.diagnostics.push_back("fused batch-norm " + std::to_string(bn_id) +
                                         " into conv " + std::to_string(conv_id));
            changed = true;
            break;
        }
    }
    prune_dead_consts(g);
    report.nodes_removed = before + report.nodes_added - static_cast<int>(g.nodes.size());
    return {reannotate_if(g, was_annotated), report};
}

std::pair<Graph, PassReport> fuse_activation(const Graph& graph) {
    const bool was_annotated = fully_annotated(graph);
    Graph g = graph;
    PassReport report;
    report.pass = "fuse_activation";
    const int before = static_cast<int>(g.nodes.size());

    auto act_of = [](OpKind k) {
        switch (k) {
            case OpKind::ReLU: return FusedAct::Relu;
            case OpKind::ReLU6: return FusedAct::Relu6;
            case OpKind::HardSwish: return FusedAct::HSwish;
            default: return FusedAct::None;
        }
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (const Node& act_probe : g.nodes) {
            FusedAct act = act_of(act_probe.kind);
            if (act == FusedAct::None) continue;
            const int act_id = act_probe.id;
            if (act_probe.inputs.empty() || !g.has_node(act_probe.inputs[0])) continue;
            const int prod_id = act_probe.inputs[0];
            Node& prod = g.node(prod_id);
            if (prod.kind != OpKind::Conv2D && prod.kind != OpKind::DepthwiseConv2D &&
                prod.kind != OpKind::Dense)
                continue;
            if (conv_act(prod) != FusedAct::None) continue;
            auto consumers = g.consumers(prod_id);
            if (consumers.size() != 1 || consumers[0] != act_id || is_graph_output(g, prod_id))
                continue;  // intermediate visible elsewhere; leave the activation standalone

            prod.attrs["act"] = std::string(fused_act_name(act));
            replace_uses(g, act_id, prod_id);
            erase_node(g, act_id);
            report.nodes_fused++;
            report.diagnostics.push_back("absorbed " + std::string(op_kind_name(act_probe.kind)) +
                                         " " + std::to_string(act_id) + " into node " +
                                         std::to_string(prod_id));
            changed = true;
            break;
        }
    }
    report.nodes_removed = before - static_cast<int>(g.nodes.size());
    return {reannotate_if(g, was_annotated), report};
}

std::pair<Graph, PassReport> replace_ops(const Graph& graph, const TargetProfile& profile) {
    Graph g = fully_annotated(graph) ? graph : infer_shapes(graph);
    PassReport report;
    report.pass = "replace_ops";

    auto accelerated = [&](OpKind k) { return profile.accelerated_ops.count(k) > 0; };

    // kernel legality first: violations have no catalog entry
    for (const Node& n : g.nodes) {
        if (n.kind != OpKind::Conv2D && n.kind != OpKind::DepthwiseConv2D) continue;
        if (profile.allowed_kernel_sizes.empty()) continue;
        auto kernel = attr_ints(n, "kernel");
        if (!profile.kernel_allowed(static_cast<int>(kernel[0]), static_cast<int>(kernel[1])))
            throw Error(ErrorCode::Unreplaceable,
                        std::string(op_kind_name(n.kind)) + " node " + std::to_string(n.id) +
                            " uses a " + std::to_string(kernel[0]) + "x" +
                            std::to_string(kernel[1]) + " kernel, not supported by profile '" +
                            profile.name + "' and no replacement exists");
    }

    bool changed = true;
    while (changed) {
        changed = false;
        for (Node& n : g.nodes) {
            if (n.kind == OpKind::Dense && !accelerated(OpKind::Dense)) {
                const auto& in_shape = *g.node(n.inputs[0]).out_shape;
                if (!(in_shape.size() == 3 && in_shape[0] == 1 && in_shape[1] == 1))
                    throw Error(ErrorCode::Unreplaceable,
                                "Dense node " + std::to_string(n.id) + " input " +
                                    shape_to_string(in_shape) +
                                    " is not 1x1xC; no replacement exists for profile '" +
                                    profile.name + "'");
                const int dense_id = n.id;
                const int units = static_cast<int>(attr_int(n, "units"));
                const std::string act = attr_str_or(n, "act", "none");

                Tensor w = g.weight(n.inputs[1]).to_f32();
                Tensor w4 = Tensor::f32({1, 1, w.dim(0), w.dim(1)});
                std::memcpy(w4.raw(), w.raw(), w.byte_size());
                if (g.consumers(n.inputs[1]).size() == 1) {
                    g.weights.insert_or_assign(n.inputs[1], std::move(w4));
                    if (g.node(n.inputs[1]).out_shape)
                        g.node(n.inputs[1]).out_shape = std::vector<int>{1, 1, w.dim(0),
                                                                         w.dim(1)};
                } else {
                    Node nc;
                    nc.id = g.max_id() + 1;
                    nc.kind = OpKind::Const;
                    nc.out_shape = std::vector<int>{1, 1, w.dim(0), w.dim(1)};
                    g.nodes.push_back(nc);
                    g.weights.emplace(nc.id, std::move(w4));
                    g.node(dense_id).inputs[1] = nc.id;
                    report.nodes_added++;
                }

                Node& dense = g.node(dense_id);
                dense.kind = OpKind::Conv2D;
                dense.attrs.clear();
                dense.attrs["kernel"] = std::vector<int64_t>{1, 1};
                dense.attrs["filters"] = static_cast<int64_t>(units);
                dense.attrs["stride"] = static_cast<int64_t>(1);
                dense.attrs["padding"] = std::string("valid");
                dense.attrs["act"] = act;
                dense.out_shape = std::vector<int>{1, 1, units};

                Node reshape;
                reshape.id = g.max_id() + 1;
                reshape.kind = OpKind::Reshape;
                reshape.attrs["shape"] = std::vector<int64_t>{units};
                reshape.out_shape = std::vector<int>{units};
                reshape.out_quant = dense.out_quant;
                const int reshape_id = reshape.id;
                replace_uses(g, dense_id, reshape_id);
                reshape.inputs = {dense_id};
                g.nodes.push_back(std::move(reshape));
                report.nodes_added++;
                report.diagnostics.push_back("replaced Dense " + std::to_string(dense_id) +
                                             " with 1x1 Conv2D + Reshape");
                changed = true;
                break;
            }
            if (n.kind == OpKind::GlobalAvgPool && !accelerated(OpKind::GlobalAvgPool)) {
                const auto& in_shape = *g.node(n.inputs[0]).out_shape;
                n.kind = OpKind::AvgPool;
                n.attrs["window_h"] = static_cast<int64_t>(in_shape[0]);
                n.attrs["window_w"] = static_cast<int64_t>(in_shape[1]);
                n.attrs["stride"] = static_cast<int64_t>(1);
                n.attrs["padding"] = std::string("valid");
                report.diagnostics.push_back("replaced GlobalAvgPool " + std::to_string(n.id) +
                                             " with full-window AvgPool");
                changed = true;
                break;
            }
            if (n.kind == OpKind::Softmax && !accelerated(OpKind::Softmax) &&
                attr_int_or(n, "host_fallback", 0) != 1) {
                n.attrs["host_fallback"] = static_cast<int64_t>(1);
                report.diagnostics.push_back("tagged Softmax " + std::to_string(n.id) +
                                             " as host fallback");
                changed = true;
                break;
            }
        }
    }
    return {infer_shapes(g), report};
}

DeployabilityReport check_target(const Graph& graph, const TargetProfile& profile) {
    DeployabilityReport report;
    report.weight_bytes = graph.total_weight_bytes();

    for (const Node& n : graph.nodes) {
        if (n.kind != OpKind::Conv2D && n.kind != OpKind::DepthwiseConv2D) continue;
        if (profile.allowed_kernel_sizes.empty()) continue;
        auto kernel = attr_ints(n, "kernel");
        if (!profile.kernel_allowed(static_cast<int>(kernel[0]), static_cast<int>(kernel[1])))
            report.violations.push_back(
                {"kernel",
                 std::string(op_kind_name(n.kind)) + " node " + std::to_string(n.id) + " uses " +
                     std::to_string(kernel[0]) + "x" + std::to_string(kernel[1]),
                 n.id});
    }

    if (profile.max_model_bytes > 0 && report.weight_bytes > profile.max_model_bytes)
        report.violations.push_back(
            {"model_size",
             std::to_string(report.weight_bytes) + " weight bytes exceed budget " +
                 std::to_string(profile.max_model_bytes),
             -1});

    if (profile.max_input_resolution.first > 0 && !graph.inputs.empty()) {
        const Node& in = graph.node(graph.inputs[0]);
        auto s = attr_ints(in, "shape");
        if (s.size() == 3) {
            int lo = static_cast<int>(std::min(s[0], s[1]));
            int hi = static_cast<int>(std::max(s[0], s[1]));
            int lo_limit = std::min(profile.max_input_resolution.first,
                                    profile.max_input_resolution.second);
            int hi_limit = std::max(profile.max_input_resolution.first,
                                    profile.max_input_resolution.second);
            if (lo > lo_limit || hi > hi_limit)
                report.violations.push_back(
                    {"input_resolution",
                     std::to_string(s[1]) + "x" + std::to_string(s[0]) + " exceeds " +
                         std::to_string(profile.max_input_resolution.first) + "x" +
                         std::to_string(profile.max_input_resolution.second),
                     in.id});
        }
    }

    report.fits = report.violations.empty();
    return report;
}

std::pair<Graph, std::vector<PassReport>> run_pipeline(const Graph& graph,
                                                       const TargetProfile& profile,
                                                       const std::vector<std::string>& passes) {
    Graph g = infer_shapes(graph);
    std::vector<PassReport> reports;
    for (const std::string& pass : passes) {
        if (pass == "fold") {
            auto [next, report] = fold_constants(g);
            g = std::move(next);
            reports.push_back(std::move(report));
        } else if (pass == "fuse") {
            auto [next, report] = fuse_conv_bn(g);
            auto [next2, report2] = fuse_activation(next);
            g = std::move(next2);
            reports.push_back(std::move(report));
            reports.push_back(std::move(report2));
        } else if (pass == "replace") {
            auto [next, report] = replace_ops(g, profile);
            g = std::move(next);
            reports.push_back(std::move(report));
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown pass '" + pass + "'");
        }
    }
    return {std::move(g), std::move(reports)};
}

}  // namespace edgebin
