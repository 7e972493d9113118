#include "edgebin/evalkit.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

namespace edgebin {

int64_t ConfusionMatrix::total() const {
    int64_t t = 0;
    for (const auto& row : counts)
        for (int64_t v : row) t += v;
    return t;
}

int64_t ConfusionMatrix::row_total(int t) const {
    int64_t s = 0;
    for (int64_t v : counts[static_cast<size_t>(t)]) s += v;
    return s;
}

int64_t ConfusionMatrix::col_total(int p) const {
    int64_t s = 0;
    for (const auto& row : counts) s += row[static_cast<size_t>(p)];
    return s;
}

ConfusionMatrix& ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (labels != other.labels)
        throw Error(ErrorCode::UnknownLabel, "cannot merge matrices with different labels");
    for (size_t t = 0; t < counts.size(); ++t)
        for (size_t p = 0; p < counts.size(); ++p) counts[t][p] += other.counts[t][p];
    return *this;
}

ConfusionMatrix confusion(const std::vector<std::string>& truths,
                          const std::vector<std::string>& preds,
                          const std::vector<std::string>& labels) {
    if (truths.size() != preds.size())
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(truths.size()) + " truths vs " +
                        std::to_string(preds.size()) + " predictions");
    if (truths.empty())
        throw Error(ErrorCode::LengthMismatch, "need at least one (truth, prediction) pair");

    ConfusionMatrix cm;
    cm.labels = labels;
    cm.counts.assign(labels.size(), std::vector<int64_t>(labels.size(), 0));

    std::map<std::string, int> index;
    for (size_t i = 0; i < labels.size(); ++i) index[labels[i]] = static_cast<int>(i);

    auto lookup = [&](const std::string& label) {
        auto it = index.find(label);
        if (it == index.end())
            throw Error(ErrorCode::UnknownLabel, "label '" + label + "' not in label list");
        return it->second;
    };
    for (size_t i = 0; i < truths.size(); ++i)
        cm.counts[static_cast<size_t>(lookup(truths[i]))]
                 [static_cast<size_t>(lookup(preds[i]))]++;
    return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
    const int64_t total = cm.total();
    if (total < 1) throw Error(ErrorCode::LengthMismatch, "empty confusion matrix");

    Metrics m;
    int64_t diag = 0;
    for (int i = 0; i < cm.size(); ++i) diag += cm.counts[static_cast<size_t>(i)][static_cast<size_t>(i)];
    m.top1_accuracy = static_cast<double>(diag) / static_cast<double>(total);

    double precision_sum = 0.0;
    int precision_defined = 0;
    for (int i = 0; i < cm.size(); ++i) {
        int64_t col = cm.col_total(i);
        int64_t row = cm.row_total(i);
        int64_t hit = cm.counts[static_cast<size_t>(i)][static_cast<size_t>(i)];
        if (col > 0) {
            double p = static_cast<double>(hit) / static_cast<double>(col);
            m.per_class_precision.push_back(p);
            precision_sum += p;
            precision_defined++;
        } else {
            m.per_class_precision.push_back(std::nullopt);
            m.macro_excludes_undefined = true;
        }
        if (row > 0)
            m.per_class_recall.push_back(static_cast<double>(hit) / static_cast<double>(row));
        else
            m.per_class_recall.push_back(std::nullopt);
    }
    m.macro_precision = precision_defined > 0 ? precision_sum / precision_defined : 0.0;
    return m;
}

std::string format_metrics_table(const ConfusionMatrix& cm, const Metrics& m) {
    std::ostringstream os;
    size_t width = 9;
    for (const auto& l : cm.labels) width = std::max(width, l.size() + 1);

    os << std::left << std::setw(static_cast<int>(width)) << "class" << std::right
       << std::setw(10) << "precision" << std::setw(10) << "recall" << std::setw(10) << "count"
       << "\n";
    for (int i = 0; i < cm.size(); ++i) {
        os << std::left << std::setw(static_cast<int>(width)) << cm.labels[static_cast<size_t>(i)]
           << std::right << std::fixed << std::setprecision(2);
        if (m.per_class_precision[static_cast<size_t>(i)])
            os << std::setw(9) << *m.per_class_precision[static_cast<size_t>(i)] * 100.0 << "%";
        else
            os << std::setw(10) << "n/a";
        if (m.per_class_recall[static_cast<size_t>(i)])
            os << std::setw(9) << *m.per_class_recall[static_cast<size_t>(i)] * 100.0 << "%";
        else
            os << std::setw(10) << "n/a";
        os << std::setw(10) << cm.row_total(i) << "\n";
    }
    os << std::fixed << std::setprecision(2);
    os << "top-1 accuracy:  " << m.top1_accuracy * 100.0 << "%\n";
    os << "macro precision: " << m.macro_precision * 100.0 << "%";
    if (m.macro_excludes_undefined) os << " (undefined classes excluded)";
    os << "\n";
    return os.str();
}

}  // namespace edgebin
