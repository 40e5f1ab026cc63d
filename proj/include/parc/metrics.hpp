#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parc/errors.hpp"
#include "parc/prediction.hpp"

namespace parc {

// Gold-by-predicted counts. Rows follow `labels` order; one extra trailing
// column collects unparsed predictions so degenerate model output stays
// representable instead of crashing the report.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;

    ConfusionMatrix(std::vector<std::string> labels,
                    std::vector<std::vector<std::size_t>> counts)
        : labels_(std::move(labels)), counts_(std::move(counts)) {
        if (counts_.size() != labels_.size()) {
            throw Error(ErrorCode::SchemaError, "confusion matrix row count != label count");
        }
        for (const auto& row : counts_) {
            if (row.size() != labels_.size() + 1) {
                throw Error(ErrorCode::SchemaError,
                            "confusion matrix rows need one column per label plus unparsed");
            }
        }
    }

    const std::vector<std::string>& labels() const { return labels_; }

    // col == labels().size() addresses the unparsed column.
    std::size_t count(std::size_t gold, std::size_t col) const { return counts_[gold][col]; }
    const std::vector<std::vector<std::size_t>>& counts() const { return counts_; }

    std::size_t unparsed_count(std::size_t gold) const { return counts_[gold][labels_.size()]; }

    bool has_unparsed() const {
        for (const auto& row : counts_) {
            if (row[labels_.size()] > 0) return true;
        }
        return false;
    }

    std::size_t support(std::size_t gold) const {
        std::size_t sum = 0;
        for (std::size_t value : counts_[gold]) sum += value;
        return sum;
    }

    std::size_t predicted(std::size_t col) const {
        std::size_t sum = 0;
        for (const auto& row : counts_) sum += row[col];
        return sum;
    }

    std::size_t total() const {
        std::size_t sum = 0;
        for (std::size_t g = 0; g < counts_.size(); ++g) sum += support(g);
        return sum;
    }

    bool operator==(const ConfusionMatrix& other) const = default;

private:
    std::vector<std::string> labels_;
    std::vector<std::vector<std::size_t>> counts_;  // labels x (labels + 1)
};

namespace detail {

inline std::size_t label_index(const std::vector<std::string>& labels, const std::string& label,
                               ErrorCode missing_code, std::string_view what) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return i;
    }
    throw Error(missing_code, std::string(what) + " label '" + label + "' not in label set");
}

}  // namespace detail

// `pred[i]` without a mapped label lands in the unparsed column.
inline ConfusionMatrix confusion_matrix(const std::vector<std::string>& gold,
                                        const std::vector<std::optional<std::string>>& pred,
                                        const std::vector<std::string>& labels) {
    if (gold.size() != pred.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    "gold has " + std::to_string(gold.size()) + " entries, predictions " +
                        std::to_string(pred.size()));
    }
    if (gold.empty()) {
        throw Error(ErrorCode::LengthMismatch, "cannot build a confusion matrix from zero examples");
    }
    std::vector<std::vector<std::size_t>> counts(labels.size(),
                                                 std::vector<std::size_t>(labels.size() + 1, 0));
    for (std::size_t i = 0; i < gold.size(); ++i) {
        std::size_t g = detail::label_index(labels, gold[i], ErrorCode::UnknownGoldLabel, "gold");
        std::size_t p = labels.size();
        if (pred[i]) {
            p = detail::label_index(labels, *pred[i], ErrorCode::SchemaError, "predicted");
        }
        ++counts[g][p];
    }
    return ConfusionMatrix(labels, std::move(counts));
}

inline ConfusionMatrix confusion_matrix(const std::vector<std::string>& gold,
                                        const std::vector<Prediction>& pred,
                                        const std::vector<std::string>& labels) {
    std::vector<std::optional<std::string>> mapped;
    mapped.reserve(pred.size());
    for (const Prediction& p : pred) mapped.push_back(p.mapped_label);
    return confusion_matrix(gold, mapped, labels);
}

struct PerClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;

    bool operator==(const PerClassMetrics& other) const = default;
};

struct AverageMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const AverageMetrics& other) const = default;
};

struct ClassificationReport {
    std::vector<std::string> labels;
    std::vector<PerClassMetrics> per_class;  // parallel to labels
    double accuracy = 0.0;
    AverageMetrics macro_avg;
    AverageMetrics weighted_avg;

    bool operator==(const ClassificationReport& other) const = default;
};

// Zero-denominator convention throughout: precision, recall and f1 default
// to 0, never NaN. Unparsed predictions count toward totals (and therefore
// against accuracy and recall) but toward no predicted class.
inline ClassificationReport classification_report(const ConfusionMatrix& cm) {
    std::size_t total = cm.total();
    if (total == 0) {
        throw Error(ErrorCode::EmptyMatrix, "confusion matrix has no scored examples");
    }
    ClassificationReport report;
    report.labels = cm.labels();
    std::size_t n = cm.labels().size();
    report.per_class.resize(n);

    std::size_t trace = 0;
    double macro_p = 0.0, macro_r = 0.0, macro_f = 0.0;
    double weighted_p = 0.0, weighted_r = 0.0, weighted_f = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t tp = cm.count(c, c);
        std::size_t predicted = cm.predicted(c);
        std::size_t support = cm.support(c);
        trace += tp;

        PerClassMetrics& m = report.per_class[c];
        m.support = support;
        m.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
        m.recall = support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(support);
        m.f1 = (m.precision + m.recall) == 0.0
                   ? 0.0
                   : 2.0 * m.precision * m.recall / (m.precision + m.recall);

        macro_p += m.precision;
        macro_r += m.recall;
        macro_f += m.f1;
        weighted_p += static_cast<double>(support) * m.precision;
        weighted_r += static_cast<double>(support) * m.recall;
        weighted_f += static_cast<double>(support) * m.f1;
    }
    report.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    report.macro_avg = {macro_p / static_cast<double>(n), macro_r / static_cast<double>(n),
                        macro_f / static_cast<double>(n)};
    report.weighted_avg = {weighted_p / static_cast<double>(total),
                           weighted_r / static_cast<double>(total),
                           weighted_f / static_cast<double>(total)};
    return report;
}

// One (template, k) data point for the comparative table.
struct F1Cell {
    std::string template_id;
    int k = 0;
    double f1 = 0.0;
};

struct DeltaRow {
    std::string template_id;
    int k = 0;
    double f1 = 0.0;
    double zero_shot_f1 = 0.0;
    double delta = 0.0;          // full precision
    double delta_display = 0.0;  // computed on 2-decimal rounded values

    bool operator==(const DeltaRow& other) const = default;
};

// Two-decimal delta arithmetic: rounding each side to centi-units first and
// subtracting as integers reproduces published-table deltas exactly.
inline double display_delta(double f1, double zero_shot_f1) {
    long long a = std::llround(f1 * 100.0);
    long long b = std::llround(zero_shot_f1 * 100.0);
    return static_cast<double>(a - b) / 100.0;
}

// Per-template deltas of each k > 0 cell against the template's k = 0
// anchor. Templates without an anchor yield no rows. Rows keep the input
// cell order.
inline std::vector<DeltaRow> f1_delta_table(const std::vector<F1Cell>& cells) {
    std::map<std::string, double> anchors;
    for (const F1Cell& cell : cells) {
        if (cell.k == 0) anchors[cell.template_id] = cell.f1;
    }
    std::vector<DeltaRow> rows;
    for (const F1Cell& cell : cells) {
        if (cell.k == 0) continue;
        auto anchor = anchors.find(cell.template_id);
        if (anchor == anchors.end()) continue;
        DeltaRow row;
        row.template_id = cell.template_id;
        row.k = cell.k;
        row.f1 = cell.f1;
        row.zero_shot_f1 = anchor->second;
        row.delta = cell.f1 - anchor->second;
        row.delta_display = display_delta(cell.f1, anchor->second);
        rows.push_back(row);
    }
    return rows;
}

enum class F1Kind { macro, weighted };

// Comparative rows over full reports for one template. All reports must
// share a label set.
inline std::vector<DeltaRow> f1_table(
    const std::vector<std::pair<int, ClassificationReport>>& reports,
    F1Kind kind = F1Kind::macro,
    const std::string& template_id = {}) {
    std::vector<F1Cell> cells;
    cells.reserve(reports.size());
    for (const auto& [k, report] : reports) {
        if (report.labels != reports.front().second.labels) {
            throw Error(ErrorCode::LabelSetMismatch, "reports do not share a label set");
        }
        double f1 = kind == F1Kind::macro ? report.macro_avg.f1 : report.weighted_avg.f1;
        cells.push_back({template_id, k, f1});
    }
    return f1_delta_table(cells);
}

}  // namespace parc
