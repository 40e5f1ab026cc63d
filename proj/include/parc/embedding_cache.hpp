#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "parc/backend.hpp"
#include "parc/embedding.hpp"
#include "parc/errors.hpp"
#include "parc/hash.hpp"
#include "parc/pool_cache.hpp"

namespace parc {

// Persistent embedding cache keyed by (backend identity, text checksum).
// Backend calls dominate experiment cost; re-embedding identical text is
// pure waste. Raw backend vectors are stored byte-exactly, so cold and warm
// runs see identical floats.
//
// File layout (little-endian): magic "PARCEMBC" | u32 version | u32 dim |
// u64 count | count x (u64 text hash, dim x f32) | u64 FNV-1a checksum.
class EmbeddingCache {
public:
    // Empty dir disables persistence; lookups then only hit process memory.
    EmbeddingCache(std::string dir, const BackendDescriptor& backend)
        : dir_(std::move(dir)), dim_(backend.embedding_dim) {
        if (!dir_.empty()) {
            std::filesystem::create_directories(dir_);
            path_ = (std::filesystem::path(dir_) /
                     ("emb-" + to_hex16(fnv1a64(backend_key(backend))) + ".bin"))
                        .string();
            if (std::filesystem::exists(path_)) load();
        }
    }

    const std::string& path() const { return path_; }
    std::size_t size() const { return entries_.size(); }

    // Embeds `texts`, serving from cache where possible. Misses hit the
    // backend in one batch (order preserved) and are persisted. With
    // `offline` set, a miss on a non-mock backend is an error instead of a
    // network call.
    std::vector<EmbeddingVector> embed(const Backend& backend,
                                       const std::vector<std::string>& texts,
                                       bool offline = false) {
        std::vector<EmbeddingVector> out(texts.size());
        std::vector<std::size_t> missing;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            auto it = entries_.find(fnv1a64(texts[i]));
            if (it != entries_.end()) {
                out[i] = EmbeddingVector(it->second);
            } else {
                missing.push_back(i);
            }
        }
        if (!missing.empty()) {
            if (offline && !backend.is_mock()) {
                throw Error(ErrorCode::ConstraintViolation,
                            "dry run needs a warm embedding cache; " +
                                std::to_string(missing.size()) + " texts are not cached");
            }
            std::vector<std::string> batch;
            batch.reserve(missing.size());
            for (std::size_t i : missing) batch.push_back(texts[i]);
            std::vector<EmbeddingVector> fresh = backend.embed(batch);
            for (std::size_t j = 0; j < missing.size(); ++j) {
                entries_[fnv1a64(texts[missing[j]])] = fresh[j].values();
                out[missing[j]] = std::move(fresh[j]);
            }
            flush();
        }
        return out;
    }

private:
    void load() {
        std::ifstream in(path_, std::ios::binary);
        if (!in) return;
        std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (data.size() < 8 + 8 || std::memcmp(data.data(), "PARCEMBC", 8) != 0) {
            throw Error(ErrorCode::SchemaError, "embedding cache '" + path_ + "': bad magic");
        }
        detail::Reader tail(data.substr(data.size() - 8), "embedding cache");
        if (fnv1a64(std::string_view(data).substr(0, data.size() - 8)) != tail.u64()) {
            throw Error(ErrorCode::ChecksumMismatch,
                        "embedding cache '" + path_ + "': checksum mismatch");
        }
        detail::Reader reader(std::string_view(data).substr(0, data.size() - 8),
                              "embedding cache");
        reader.bytes(8);
        std::uint32_t version = reader.u32();
        if (version != 1) {
            throw Error(ErrorCode::SchemaError,
                        "embedding cache '" + path_ + "': unknown version " +
                            std::to_string(version));
        }
        std::uint32_t dim = reader.u32();
        if (dim != dim_) {
            throw Error(ErrorCode::DimensionMismatch,
                        "embedding cache '" + path_ + "': dim " + std::to_string(dim) +
                            " != configured " + std::to_string(dim_));
        }
        std::uint64_t count = reader.u64();
        for (std::uint64_t i = 0; i < count; ++i) {
            std::uint64_t key = reader.u64();
            std::vector<float> values(dim_);
            for (std::size_t d = 0; d < dim_; ++d) values[d] = reader.f32();
            entries_.emplace(key, std::move(values));
        }
    }

    void flush() const {
        if (path_.empty()) return;
        std::string out;
        out.append("PARCEMBC", 8);
        detail::put_u32(out, 1);
        detail::put_u32(out, static_cast<std::uint32_t>(dim_));
        detail::put_u64(out, entries_.size());
        // Sort keys so rewrites are stable.
        std::vector<std::uint64_t> keys;
        keys.reserve(entries_.size());
        for (const auto& [key, values] : entries_) keys.push_back(key);
        std::sort(keys.begin(), keys.end());
        for (std::uint64_t key : keys) {
            detail::put_u64(out, key);
            for (float v : entries_.at(key)) detail::put_f32(out, v);
        }
        detail::put_u64(out, fnv1a64(out));
        std::ofstream file(path_, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw Error(ErrorCode::IoError, "cannot write embedding cache '" + path_ + "'");
        }
        file.write(out.data(), static_cast<std::streamsize>(out.size()));
    }

    std::string dir_;
    std::string path_;
    std::size_t dim_;
    std::unordered_map<std::uint64_t, std::vector<float>> entries_;
};

}  // namespace parc
