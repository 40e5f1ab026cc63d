#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "parc/errors.hpp"
#include "parc/prediction.hpp"

namespace parc {

enum class TemplateStyle { generative, masked };

inline std::string_view to_string(TemplateStyle style) {
    return style == TemplateStyle::generative ? "generative" : "masked";
}

inline TemplateStyle template_style_from_string(std::string_view name) {
    if (name == "generative") return TemplateStyle::generative;
    if (name == "masked") return TemplateStyle::masked;
    throw Error(ErrorCode::SchemaError, "unknown template style '" + std::string(name) + "'");
}

// Injective label -> answer-word map for masked prediction. Insertion order
// is preserved; it defines candidate order when scoring.
class Verbalizer {
public:
    Verbalizer() = default;

    explicit Verbalizer(std::vector<std::pair<std::string, std::string>> mapping)
        : mapping_(std::move(mapping)) {
        std::unordered_set<std::string> labels;
        std::unordered_set<std::string> words;
        for (const auto& [label, word] : mapping_) {
            if (label.empty() || word.empty()) {
                throw Error(ErrorCode::SchemaError, "verbalizer entries need label and word");
            }
            if (!labels.insert(label).second) {
                throw Error(ErrorCode::SchemaError, "verbalizer maps label '" + label + "' twice");
            }
            if (!words.insert(word).second) {
                throw Error(ErrorCode::SchemaError,
                            "verbalizer word '" + word + "' is not injective");
            }
        }
    }

    const std::vector<std::pair<std::string, std::string>>& mapping() const { return mapping_; }
    bool empty() const { return mapping_.empty(); }

    const std::string& apply(const std::string& label) const {
        for (const auto& [l, w] : mapping_) {
            if (l == label) return w;
        }
        throw Error(ErrorCode::VerbalizerMiss, "label '" + label + "' not in verbalizer");
    }

    const std::string& invert(const std::string& word) const {
        for (const auto& [l, w] : mapping_) {
            if (w == word) return l;
        }
        throw Error(ErrorCode::VerbalizerMiss, "word '" + word + "' not in verbalizer image");
    }

    std::vector<std::string> words() const {
        std::vector<std::string> out;
        out.reserve(mapping_.size());
        for (const auto& [l, w] : mapping_) out.push_back(w);
        return out;
    }

    // Throws unless the mapping covers `label_set` exactly.
    void require_covers(const std::vector<std::string>& label_set) const {
        for (const std::string& label : label_set) {
            bool found = false;
            for (const auto& [l, w] : mapping_) found = found || l == label;
            if (!found) {
                throw Error(ErrorCode::LabelSetMismatch,
                            "verbalizer does not cover label '" + label + "'");
            }
        }
    }

    bool operator==(const Verbalizer& other) const { return mapping_ == other.mapping_; }

private:
    std::vector<std::pair<std::string, std::string>> mapping_;
};

// Prefix prompt template. `{text}` must occur exactly once; masked bodies
// carry the mask marker exactly once. `{target_lang}` is optional and
// filled from task configuration.
struct PromptTemplate {
    std::string id;
    TemplateStyle style = TemplateStyle::generative;
    std::string body;
    std::string language = "en";
    std::string mask_marker = "[MASK]";
    std::optional<Verbalizer> verbalizer;  // masked classification
    std::vector<LabelOption> options;      // generative classification answer surfaces
};

namespace detail {

inline std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    if (needle.empty()) return 0;
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace detail

inline void validate_template(const PromptTemplate& t) {
    if (t.id.empty()) {
        throw Error(ErrorCode::SchemaError, "template without id");
    }
    if (detail::count_occurrences(t.body, "{text}") != 1) {
        throw Error(ErrorCode::SchemaError,
                    "template '" + t.id + "' must contain {text} exactly once");
    }
    if (t.style == TemplateStyle::masked) {
        if (t.mask_marker.empty()) {
            throw Error(ErrorCode::SchemaError, "masked template '" + t.id + "' has no mask marker");
        }
        if (detail::count_occurrences(t.body, t.mask_marker) != 1) {
            throw Error(ErrorCode::SchemaError, "masked template '" + t.id +
                                                    "' must contain the mask marker exactly once");
        }
    }
}

class TemplateRegistry {
public:
    TemplateRegistry() = default;

    explicit TemplateRegistry(std::vector<PromptTemplate> templates)
        : templates_(std::move(templates)) {
        std::unordered_set<std::string> ids;
        for (const PromptTemplate& t : templates_) {
            validate_template(t);
            if (!ids.insert(t.id).second) {
                throw Error(ErrorCode::DuplicateTemplateId, "duplicate template id '" + t.id + "'");
            }
        }
    }

    const std::vector<PromptTemplate>& templates() const { return templates_; }
    std::size_t size() const { return templates_.size(); }

    const PromptTemplate* find(std::string_view id) const {
        for (const PromptTemplate& t : templates_) {
            if (t.id == id) return &t;
        }
        return nullptr;
    }

    const PromptTemplate& require(std::string_view id) const {
        const PromptTemplate* t = find(id);
        if (t == nullptr) {
            throw Error(ErrorCode::SchemaError, "no template with id '" + std::string(id) + "'");
        }
        return *t;
    }

private:
    std::vector<PromptTemplate> templates_;
};

// Registry document: {"version": 1, "templates": [...]}. Verbalizers are
// arrays of {label, word} pairs so their order survives serialization.
inline TemplateRegistry parse_template_registry(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("templates") || !doc["templates"].is_array()) {
        throw Error(ErrorCode::SchemaError, "template registry needs a 'templates' array");
    }
    std::vector<PromptTemplate> templates;
    for (const nlohmann::json& item : doc["templates"]) {
        if (!item.is_object()) {
            throw Error(ErrorCode::SchemaError, "template entries must be objects");
        }
        PromptTemplate t;
        t.id = item.value("id", "");
        if (!item.contains("style") || !item.contains("body")) {
            throw Error(ErrorCode::SchemaError, "template '" + t.id + "' needs style and body");
        }
        t.style = template_style_from_string(item["style"].get<std::string>());
        t.body = item["body"].get<std::string>();
        t.language = item.value("language", "en");
        t.mask_marker = item.value("mask_marker", "[MASK]");
        if (item.contains("verbalizer")) {
            std::vector<std::pair<std::string, std::string>> mapping;
            for (const nlohmann::json& entry : item["verbalizer"]) {
                mapping.emplace_back(entry.at("label").get<std::string>(),
                                     entry.at("word").get<std::string>());
            }
            t.verbalizer = Verbalizer(std::move(mapping));
        }
        if (item.contains("options")) {
            for (const nlohmann::json& entry : item["options"]) {
                LabelOption option;
                option.label = entry.at("label").get<std::string>();
                if (entry.contains("surfaces")) {
                    option.surfaces = entry["surfaces"].get<std::vector<std::string>>();
                }
                t.options.push_back(std::move(option));
            }
            // validates surface uniqueness
            LabelOptionSet check(t.options);
            t.options = check.options();
        }
        templates.push_back(std::move(t));
    }
    return TemplateRegistry(std::move(templates));
}

inline TemplateRegistry load_template_registry(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open template registry '" + path + "'");
    }
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(ErrorCode::SchemaError, "template registry '" + path + "' is not valid JSON");
    }
    return parse_template_registry(doc);
}

}  // namespace parc
