#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "parc/errors.hpp"
#include "parc/text.hpp"

namespace parc {

enum class ParseStatus { matched, fallback, unparsed };

inline std::string_view to_string(ParseStatus status) {
    switch (status) {
        case ParseStatus::matched: return "matched";
        case ParseStatus::fallback: return "fallback";
        case ParseStatus::unparsed: return "unparsed";
    }
    return "unparsed";
}

inline ParseStatus parse_status_from_string(std::string_view name) {
    if (name == "matched") return ParseStatus::matched;
    if (name == "fallback") return ParseStatus::fallback;
    if (name == "unparsed") return ParseStatus::unparsed;
    throw Error(ErrorCode::SchemaError, "unknown parse status '" + std::string(name) + "'");
}

struct WordScore {
    std::string word;
    double score = 0.0;
    bool scorable = true;  // false: backend could not score the candidate

    bool operator==(const WordScore& other) const = default;
};

// Model output mapped onto the task label space.
struct Prediction {
    std::string raw_output;
    std::vector<WordScore> word_scores;  // masked path only
    std::optional<std::string> mapped_label;
    ParseStatus parse_status = ParseStatus::unparsed;
};

// One canonical task label with the surface strings a model may emit for it.
struct LabelOption {
    std::string label;
    std::vector<std::string> surfaces;

    bool operator==(const LabelOption& other) const = default;
};

// Ordered label set. Surface options must be unique across labels after
// normalization, otherwise answer mapping would be ambiguous.
class LabelOptionSet {
public:
    LabelOptionSet() = default;

    explicit LabelOptionSet(std::vector<LabelOption> options) : options_(std::move(options)) {
        std::unordered_set<std::string> seen_labels;
        std::unordered_set<std::string> seen_surfaces;
        for (LabelOption& option : options_) {
            if (option.label.empty()) {
                throw Error(ErrorCode::SchemaError, "label option with empty label");
            }
            if (!seen_labels.insert(option.label).second) {
                throw Error(ErrorCode::SchemaError, "duplicate label '" + option.label + "'");
            }
            if (option.surfaces.empty()) option.surfaces.push_back(option.label);
            for (const std::string& surface : option.surfaces) {
                std::string norm = normalize_for_match(surface);
                if (norm.empty()) {
                    throw Error(ErrorCode::SchemaError,
                                "empty surface option for label '" + option.label + "'");
                }
                if (!seen_surfaces.insert(norm).second) {
                    throw Error(ErrorCode::SchemaError,
                                "surface option '" + surface + "' is not unique across labels");
                }
            }
        }
    }

    const std::vector<LabelOption>& options() const { return options_; }
    bool empty() const { return options_.empty(); }
    std::size_t size() const { return options_.size(); }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        out.reserve(options_.size());
        for (const LabelOption& option : options_) out.push_back(option.label);
        return out;
    }

    bool has_label(std::string_view label) const {
        for (const LabelOption& option : options_) {
            if (option.label == label) return true;
        }
        return false;
    }

    // First surface listed for a label; demonstrations imitate this form.
    const std::string& surface_for(const std::string& label) const {
        for (const LabelOption& option : options_) {
            if (option.label == label) return option.surfaces.front();
        }
        throw Error(ErrorCode::VerbalizerMiss, "label '" + label + "' has no surface options");
    }

    bool operator==(const LabelOptionSet& other) const { return options_ == other.options_; }

private:
    std::vector<LabelOption> options_;
};

// Maps raw generated text to a task label. Normalization: trim, lowercase
// Latin, collapse internal whitespace. The longest surface option occurring
// as a substring of the normalized output wins; equal lengths resolve to
// the earliest option in set order. Total: no input throws.
inline Prediction map_generation_to_label(const std::string& raw,
                                          const LabelOptionSet& options,
                                          const std::optional<std::string>& fallback = {}) {
    Prediction prediction;
    prediction.raw_output = raw;
    std::string norm = normalize_for_match(raw);

    const LabelOption* best = nullptr;
    std::size_t best_len = 0;
    for (const LabelOption& option : options.options()) {
        for (const std::string& surface : option.surfaces) {
            std::string surface_norm = normalize_for_match(surface);
            if (surface_norm.size() <= best_len) continue;
            if (norm.find(surface_norm) != std::string::npos) {
                best = &option;
                best_len = surface_norm.size();
            }
        }
    }
    if (best != nullptr) {
        prediction.mapped_label = best->label;
        prediction.parse_status = ParseStatus::matched;
    } else if (fallback) {
        prediction.mapped_label = *fallback;
        prediction.parse_status = ParseStatus::fallback;
    } else {
        prediction.parse_status = ParseStatus::unparsed;
    }
    return prediction;
}

}  // namespace parc
