#pragma once

#include <map>

#include "edgebin/graph.hpp"

namespace edgebin {

// Output spatial extent of a windowed op.
// same-pad: ceil(in / stride); valid-pad: floor((in - k) / stride) + 1.
int conv_out_extent(int in, int kernel, int stride, const std::string& padding);

// Padding split for same-pad, extra cell goes to the bottom/right.
struct PadAmount {
    int before = 0;
    int after = 0;
};
PadAmount same_pad_amount(int in, int kernel, int stride);

// Returns a copy of the graph with every node's out_shape annotation filled.
// Deterministic and idempotent. Throws ShapeMismatch / UnknownAttribute.
Graph infer_shapes(const Graph& graph);

// Same computation without copying the graph (weights stay untouched).
std::map<int, std::vector<int>> infer_shape_map(const Graph& graph);

// Shape of a single node given its input shapes (exposed for tests).
std::vector<int> infer_node_shape(const Graph& graph, const Node& node,
                                  const std::vector<std::vector<int>>& input_shapes);

}  // namespace edgebin
