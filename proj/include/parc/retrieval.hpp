#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "parc/embedding.hpp"
#include "parc/errors.hpp"
#include "parc/pool.hpp"

namespace parc {

struct RetrievalHit {
    std::string entry_id;
    double similarity = 0.0;

    bool operator==(const RetrievalHit& other) const = default;
};

// Ranked retrieval output: hits sorted by similarity, non-increasing, ties
// broken by ascending pool index. `truncated` is set when the pool had
// fewer embedded entries than requested.
struct RetrievalResult {
    std::vector<RetrievalHit> hits;
    std::size_t k = 0;
    bool truncated = false;

    bool operator==(const RetrievalResult& other) const = default;
};

// Exact top-k cosine retrieval by full linear scan. Pool sizes here are
// small enough that exactness wins over ANN-style indexes, and the scan is
// directly checkable against a brute-force oracle.
inline RetrievalResult retrieve_top_k(const EmbeddingVector& query,
                                      const SentencePool& pool,
                                      std::size_t k) {
    if (k == 0) {
        throw Error(ErrorCode::ConstraintViolation, "retrieve_top_k requires k >= 1");
    }
    if (query.dim() != pool.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query dim " + std::to_string(query.dim()) + " != pool dim " +
                        std::to_string(pool.dim()));
    }
    EmbeddingVector q = normalize(query);

    struct Scored {
        double similarity;
        std::size_t index;
    };
    std::vector<Scored> scored;
    scored.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const PoolEntry& entry = pool.entries()[i];
        if (!entry.embedding) continue;
        scored.push_back({cosine_similarity(q, *entry.embedding), i});
    }
    if (scored.empty()) {
        throw Error(ErrorCode::EmptyPool, "pool has no embedded entries");
    }

    auto better = [](const Scored& a, const Scored& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.index < b.index;
    };
    std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end(), better);

    RetrievalResult result;
    result.k = k;
    result.truncated = k > scored.size();
    result.hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        result.hits.push_back({pool.entries()[scored[i].index].id, scored[i].similarity});
    }
    return result;
}

}  // namespace parc
