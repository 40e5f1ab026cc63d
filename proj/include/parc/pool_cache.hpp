#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "parc/hash.hpp"
#include "parc/pool.hpp"

namespace parc {

// Binary pool cache. Layout (all integers little-endian):
//
//   magic "PARCPOOL" | u32 version | u32 dim | u64 count
//   u64 meta_len | meta JSON (per-entry id/text/label/source/flags)
//   contiguous f32 embeddings for entries that have one
//   u64 FNV-1a checksum of everything above
//
// load(save(p)) reproduces p exactly, embedding bytes included.

namespace detail {

inline constexpr char kPoolMagic[8] = {'P', 'A', 'R', 'C', 'P', 'O', 'O', 'L'};
inline constexpr std::uint32_t kPoolVersion = 1;

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u32(out, bits);
}

class Reader {
public:
    Reader(std::string_view data, std::string_view what) : data_(data), what_(what) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        }
        pos_ += 8;
        return v;
    }

    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string_view bytes(std::size_t n) {
        need(n);
        std::string_view v = data_.substr(pos_, n);
        pos_ += n;
        return v;
    }

    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw Error(ErrorCode::SchemaError, std::string(what_) + ": truncated file");
        }
    }

    std::string_view data_;
    std::string_view what_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_pool(const SentencePool& pool) {
    std::string out;
    out.append(detail::kPoolMagic, sizeof(detail::kPoolMagic));
    detail::put_u32(out, detail::kPoolVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(pool.dim()));
    detail::put_u64(out, pool.size());

    nlohmann::json meta = nlohmann::json::array();
    for (const PoolEntry& entry : pool.entries()) {
        nlohmann::json m{{"id", entry.id},
                         {"text", entry.text},
                         {"source", std::string(to_string(entry.label_source))},
                         {"embedded", entry.embedding.has_value()}};
        if (entry.label) m["label"] = *entry.label;
        if (entry.embedding) m["normalized"] = entry.embedding->normalized();
        meta.push_back(std::move(m));
    }
    std::string meta_bytes = meta.dump();
    detail::put_u64(out, meta_bytes.size());
    out += meta_bytes;

    for (const PoolEntry& entry : pool.entries()) {
        if (!entry.embedding) continue;
        for (float v : entry.embedding->values()) detail::put_f32(out, v);
    }
    detail::put_u64(out, fnv1a64(out));
    return out;
}

inline SentencePool deserialize_pool(std::string_view data) {
    if (data.size() < sizeof(detail::kPoolMagic) + 8) {
        throw Error(ErrorCode::SchemaError, "pool cache: file too short");
    }
    if (std::memcmp(data.data(), detail::kPoolMagic, sizeof(detail::kPoolMagic)) != 0) {
        throw Error(ErrorCode::SchemaError, "pool cache: bad magic");
    }
    std::uint64_t stored_checksum = 0;
    {
        detail::Reader tail(data.substr(data.size() - 8), "pool cache");
        stored_checksum = tail.u64();
    }
    std::string_view body = data.substr(0, data.size() - 8);
    if (fnv1a64(body) != stored_checksum) {
        throw Error(ErrorCode::ChecksumMismatch, "pool cache: checksum mismatch");
    }

    detail::Reader reader(body, "pool cache");
    reader.bytes(sizeof(detail::kPoolMagic));
    std::uint32_t version = reader.u32();
    if (version != detail::kPoolVersion) {
        throw Error(ErrorCode::SchemaError,
                    "pool cache: unknown version " + std::to_string(version));
    }
    std::uint32_t dim = reader.u32();
    std::uint64_t count = reader.u64();
    std::uint64_t meta_len = reader.u64();
    nlohmann::json meta = nlohmann::json::parse(reader.bytes(meta_len), nullptr, false);
    if (meta.is_discarded() || !meta.is_array() || meta.size() != count) {
        throw Error(ErrorCode::SchemaError, "pool cache: malformed metadata");
    }

    std::vector<PoolEntry> entries;
    entries.reserve(count);
    for (const nlohmann::json& m : meta) {
        PoolEntry entry;
        entry.id = m.at("id").get<std::string>();
        entry.text = m.at("text").get<std::string>();
        entry.label_source = label_source_from_string(m.at("source").get<std::string>());
        if (m.contains("label")) entry.label = m["label"].get<std::string>();
        if (m.at("embedded").get<bool>()) {
            std::vector<float> values(dim);
            for (std::uint32_t i = 0; i < dim; ++i) values[i] = reader.f32();
            entry.embedding = EmbeddingVector(std::move(values),
                                              m.value("normalized", false));
        }
        entries.push_back(std::move(entry));
    }
    return SentencePool(std::move(entries), dim);
}

inline void save_pool(const SentencePool& pool, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    }
    std::string bytes = serialize_pool(pool);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
    }
}

inline SentencePool load_pool(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    }
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_pool(data);
}

// Provenance key recorded in run manifests.
inline std::uint64_t pool_checksum(const SentencePool& pool) {
    return fnv1a64(serialize_pool(pool));
}

}  // namespace parc
