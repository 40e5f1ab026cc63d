#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parc/errors.hpp"
#include "parc/prompt.hpp"

namespace parc {

enum class TaskKind { classification, summarization };

inline std::string_view to_string(TaskKind task) {
    return task == TaskKind::classification ? "classification" : "summarization";
}

inline TaskKind task_from_string(std::string_view name) {
    if (name == "classification") return TaskKind::classification;
    if (name == "summarization") return TaskKind::summarization;
    throw Error(ErrorCode::SchemaError, "unknown task '" + std::string(name) + "'");
}

// Line-delimited dataset records: {"text", "label"} for classification,
// {"text", "summary"} for summarization. Order is preserved; the runner
// never shuffles.
inline std::vector<QueryExample> load_dataset(std::istream& in, TaskKind task) {
    std::vector<QueryExample> examples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            throw Error(ErrorCode::SchemaError,
                        "dataset line " + std::to_string(line_no) + ": not a JSON object");
        }
        QueryExample example;
        if (!doc.contains("text") || !doc["text"].is_string() ||
            doc["text"].get<std::string>().empty()) {
            throw Error(ErrorCode::SchemaError,
                        "dataset line " + std::to_string(line_no) + ": missing field 'text'");
        }
        example.text = doc["text"].get<std::string>();
        if (task == TaskKind::classification) {
            if (!doc.contains("label") || !doc["label"].is_string()) {
                throw Error(ErrorCode::SchemaError,
                            "dataset line " + std::to_string(line_no) + ": missing field 'label'");
            }
            example.gold_label = doc["label"].get<std::string>();
        } else {
            if (!doc.contains("summary") || !doc["summary"].is_string()) {
                throw Error(ErrorCode::SchemaError, "dataset line " + std::to_string(line_no) +
                                                        ": missing field 'summary'");
            }
            example.reference_summary = doc["summary"].get<std::string>();
        }
        examples.push_back(std::move(example));
    }
    return examples;
}

inline std::vector<QueryExample> load_dataset(const std::string& path, TaskKind task,
                                              std::optional<std::size_t> max_examples = {}) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open dataset '" + path + "'");
    }
    std::vector<QueryExample> examples = load_dataset(in, task);
    if (max_examples && examples.size() > *max_examples) {
        examples.resize(*max_examples);
    }
    return examples;
}

}  // namespace parc
