#pragma once

#include <optional>

#include "edgebin/graph.hpp"

namespace edgebin {

enum class ModelFamily { MobileNetV1, MobileNetV3Large, MobileNetV3Small };

const char* model_family_name(ModelFamily f);
ModelFamily model_family_from_name(const std::string& name);

struct ModelSpec {
    ModelFamily family = ModelFamily::MobileNetV1;
    double alpha = 1.0;                       // in {0.25, 0.5, 0.75, 1.0}
    std::pair<int, int> input_resolution{224, 224};  // (w, h)
    int num_classes = 7;                      // >= 2
    std::optional<std::pair<int, int>> resize_front;  // target (w, h)
};

// Builds the canonical topology with seeded He-uniform weights
// (batch-norm gamma=1, beta=0, mean=0, var=1). Classifier head is
// GlobalAvgPool -> Dense(num_classes) -> Softmax; seven-class models get
// the canonical bin labels. Same spec and seed always produce
// bitwise-identical weights.
Graph build(const ModelSpec& spec, uint64_t seed);

// Exact parameter count: every stored weight element, including biases and
// batch-norm parameters.
int64_t param_count(const Graph& graph);

// Serialized size estimate: parameters at the given precision plus the
// actual manifest overhead.
int64_t estimate_file_size(const Graph& graph, DType dtype);

}  // namespace edgebin
