#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "parc/embedding.hpp"
#include "parc/errors.hpp"

namespace parc {

enum class LabelSource { corpus, self_predicted, none };

inline std::string_view to_string(LabelSource source) {
    switch (source) {
        case LabelSource::corpus: return "corpus";
        case LabelSource::self_predicted: return "self_predicted";
        case LabelSource::none: return "none";
    }
    return "none";
}

inline LabelSource label_source_from_string(std::string_view name) {
    if (name == "corpus") return LabelSource::corpus;
    if (name == "self_predicted") return LabelSource::self_predicted;
    if (name == "none") return LabelSource::none;
    throw Error(ErrorCode::SchemaError, "unknown label source '" + std::string(name) + "'");
}

// One high-resource-language document. Entries without an embedding stay in
// the pool but are invisible to retrieval until embedded.
struct PoolEntry {
    std::string id;
    std::string text;
    std::optional<std::string> label;
    std::optional<EmbeddingVector> embedding;
    LabelSource label_source = LabelSource::none;

    bool operator==(const PoolEntry& other) const = default;
};

// Raw record as parsed from a pool file, before validation.
struct PoolRecord {
    std::optional<std::string> id;
    std::string text;
    std::optional<std::string> label;
    std::optional<std::vector<float>> embedding;
};

// Immutable corpus of candidate demonstrations. Concurrent retrievals
// against the same pool are safe.
class SentencePool {
public:
    SentencePool() = default;

    SentencePool(std::vector<PoolEntry> entries, std::size_t dim)
        : entries_(std::move(entries)), dim_(dim) {
        if (dim_ == 0) {
            throw Error(ErrorCode::SchemaError, "pool dim must be positive");
        }
        index_.reserve(entries_.size());
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const PoolEntry& entry = entries_[i];
            if (entry.text.empty()) {
                throw Error(ErrorCode::SchemaError, "pool entry '" + entry.id + "' has empty text");
            }
            if (entry.label_source != LabelSource::none && !entry.label.has_value()) {
                throw Error(ErrorCode::SchemaError,
                            "pool entry '" + entry.id + "' has a label source but no label");
            }
            if (entry.embedding && entry.embedding->dim() != dim_) {
                throw Error(ErrorCode::DimensionMismatch,
                            "pool entry '" + entry.id + "' embedding dim " +
                                std::to_string(entry.embedding->dim()) + " != pool dim " +
                                std::to_string(dim_));
            }
            auto [it, inserted] = index_.emplace(entry.id, i);
            if (!inserted) {
                throw Error(ErrorCode::SchemaError, "duplicate pool entry id '" + entry.id + "'");
            }
        }
    }

    const std::vector<PoolEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t dim() const { return dim_; }

    std::size_t embedded_count() const {
        std::size_t n = 0;
        for (const PoolEntry& e : entries_) {
            if (e.embedding) ++n;
        }
        return n;
    }

    const PoolEntry* find(std::string_view id) const {
        auto it = index_.find(std::string(id));
        return it == index_.end() ? nullptr : &entries_[it->second];
    }

    bool operator==(const SentencePool& other) const {
        return dim_ == other.dim_ && entries_ == other.entries_;
    }

private:
    std::vector<PoolEntry> entries_;
    std::size_t dim_ = 0;
    std::unordered_map<std::string, std::size_t> index_;
};

// Parses line-delimited pool records. Fields: `text` (required), `id`,
// `label`, `embedding` (all optional). A missing id becomes the zero-padded
// line index. Line numbers in errors are 1-based.
inline std::vector<PoolRecord> parse_pool_records(std::istream& in) {
    std::vector<PoolRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            throw Error(ErrorCode::SchemaError,
                        "pool line " + std::to_string(line_no) + ": not a JSON object");
        }
        PoolRecord record;
        if (!doc.contains("text") || !doc["text"].is_string()) {
            throw Error(ErrorCode::SchemaError,
                        "pool line " + std::to_string(line_no) + ": missing required field 'text'");
        }
        record.text = doc["text"].get<std::string>();
        if (doc.contains("id")) record.id = doc["id"].get<std::string>();
        if (doc.contains("label") && !doc["label"].is_null()) {
            record.label = doc["label"].get<std::string>();
        }
        if (doc.contains("embedding") && !doc["embedding"].is_null()) {
            record.embedding = doc["embedding"].get<std::vector<float>>();
        }
        if (!record.id) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%06zu", line_no - 1);
            record.id = buf;
        }
        records.push_back(std::move(record));
    }
    return records;
}

inline std::vector<PoolRecord> parse_pool_records(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_pool_records(in);
}

// Validates records into a pool. Embeddings are normalized on ingestion so
// retrieval can score with a plain dot product.
inline SentencePool build_pool(const std::vector<PoolRecord>& records, std::size_t dim) {
    std::vector<PoolEntry> entries;
    entries.reserve(records.size());
    for (const PoolRecord& record : records) {
        PoolEntry entry;
        entry.id = record.id.value_or("");
        if (record.text.empty()) {
            throw Error(ErrorCode::SchemaError, "pool record '" + entry.id + "' has empty text");
        }
        entry.text = record.text;
        entry.label = record.label;
        entry.label_source = record.label ? LabelSource::corpus : LabelSource::none;
        if (record.embedding) {
            if (record.embedding->size() != dim) {
                throw Error(ErrorCode::DimensionMismatch,
                            "pool record '" + entry.id + "' embedding dim " +
                                std::to_string(record.embedding->size()) + " != configured dim " +
                                std::to_string(dim));
            }
            entry.embedding = normalize(EmbeddingVector(*record.embedding));
        }
        entries.push_back(std::move(entry));
    }
    return SentencePool(std::move(entries), dim);
}

}  // namespace parc
