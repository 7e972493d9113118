#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edgebin/errors.hpp"

namespace edgebin {

// Square count matrix indexed [true][predicted].
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<int64_t>> counts;

    int size() const { return static_cast<int>(labels.size()); }
    int64_t total() const;
    int64_t row_total(int t) const;
    int64_t col_total(int p) const;

    // cellwise addition; labels must match
    ConfusionMatrix& merge(const ConfusionMatrix& other);
};

ConfusionMatrix confusion(const std::vector<std::string>& truths,
                          const std::vector<std::string>& preds,
                          const std::vector<std::string>& labels);

struct Metrics {
    double top1_accuracy = 0.0;
    std::vector<std::optional<double>> per_class_precision;  // empty column -> undefined
    std::vector<std::optional<double>> per_class_recall;
    double macro_precision = 0.0;  // unweighted mean over defined precisions
    bool macro_excludes_undefined = false;
};

Metrics metrics(const ConfusionMatrix& cm);

std::string format_metrics_table(const ConfusionMatrix& cm, const Metrics& m);

}  // namespace edgebin
