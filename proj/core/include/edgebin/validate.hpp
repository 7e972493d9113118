#pragma once

#include "edgebin/graph.hpp"

namespace edgebin {

enum class DiagCode {
    DanglingInput,
    CycleDetected,
    DuplicateId,
    MissingWeight,
    OrphanWeight,
    WeightShapeMismatch,
    MultiGraphInput,
    MultiGraphOutput,
    NoGraphOutput,
    BadInputNode,
    BadLabels,
    BadQuant,
};

const char* diag_code_name(DiagCode code);

struct Diagnostic {
    DiagCode code;
    int node_id = -1;  // -1 when the diagnostic is graph-wide
    std::string message;
};

// Structural validation. An empty result means: the graph is a DAG, all
// referenced ids resolve, Const payloads exist with shapes matching the
// consuming node's attributes, and classifier-graph conventions hold
// (single input, single output, canonical 7-class labels for bin models).
std::vector<Diagnostic> validate(const Graph& graph);

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

}  // namespace edgebin
