#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "parc/errors.hpp"

namespace parc {

// Dense sentence embedding. Components must be finite; a vector flagged
// `normalized` carries unit Euclidean norm (checked to 1e-6 on construction).
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    explicit EmbeddingVector(std::vector<float> values, bool normalized = false)
        : values_(std::move(values)), normalized_(normalized) {
        for (float v : values_) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::SchemaError, "embedding component is not finite");
            }
        }
        if (normalized_ && std::abs(norm() - 1.0) > 1e-6) {
            throw Error(ErrorCode::SchemaError, "vector flagged normalized has norm " +
                                                    std::to_string(norm()));
        }
    }

    std::size_t dim() const { return values_.size(); }
    const std::vector<float>& values() const { return values_; }
    bool normalized() const { return normalized_; }

    double norm() const {
        double sum = 0.0;
        for (float v : values_) sum += static_cast<double>(v) * static_cast<double>(v);
        return std::sqrt(sum);
    }

    bool operator==(const EmbeddingVector& other) const {
        return values_ == other.values_ && normalized_ == other.normalized_;
    }

private:
    std::vector<float> values_;
    bool normalized_ = false;
};

// Dot product accumulated in double; 768 single-precision products drift.
inline double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "dot: dims " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    double sum = 0.0;
    const auto& av = a.values();
    const auto& bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        sum += static_cast<double>(av[i]) * static_cast<double>(bv[i]);
    }
    return sum;
}

// Unit-norm copy, direction preserved. Zero input signals a corrupt
// embedding upstream.
inline EmbeddingVector normalize(const EmbeddingVector& v) {
    if (v.normalized()) return v;
    double n = v.norm();
    if (n == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cannot normalize an all-zero vector");
    }
    std::vector<float> scaled(v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) {
        scaled[i] = static_cast<float>(static_cast<double>(v.values()[i]) / n);
    }
    return EmbeddingVector(std::move(scaled), /*normalized=*/true);
}

// cos(a, b), clamped to [-1, 1] against floating drift. Symmetric exactly:
// both orders evaluate the identical sequence of operations.
inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "cosine: dims " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    double denom;
    if (a.normalized() && b.normalized()) {
        denom = 1.0;
    } else {
        double na = a.norm();
        double nb = b.norm();
        if (na == 0.0 || nb == 0.0) {
            throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector is undefined");
        }
        denom = na * nb;
    }
    double value = dot(a, b) / denom;
    if (value > 1.0) value = 1.0;
    if (value < -1.0) value = -1.0;
    return value;
}

}  // namespace parc
