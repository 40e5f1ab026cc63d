#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "parc/embedding.hpp"
#include "parc/errors.hpp"
#include "parc/hash.hpp"
#include "parc/prediction.hpp"
#include "parc/text.hpp"

namespace parc {

enum class BackendKind { generation, fill_mask, embedding };

inline std::string_view to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::generation: return "generation";
        case BackendKind::fill_mask: return "fill_mask";
        case BackendKind::embedding: return "embedding";
    }
    return "generation";
}

inline BackendKind backend_kind_from_string(std::string_view name) {
    if (name == "generation") return BackendKind::generation;
    if (name == "fill_mask") return BackendKind::fill_mask;
    if (name == "embedding") return BackendKind::embedding;
    throw Error(ErrorCode::SchemaError, "unknown backend kind '" + std::string(name) + "'");
}

struct DecodeParams {
    int max_new_tokens = 64;
    double temperature = 0.0;  // greedy by default; reproducible presets need 0
    std::vector<std::string> stop_sequences;

    bool operator==(const DecodeParams& other) const = default;
};

// Uniform handle onto an MPLM reachable over the wire protocol, or the
// in-process deterministic mock (`mock:<seed>`, or plain `mock` to take the
// seed from the experiment config).
struct BackendDescriptor {
    BackendKind kind = BackendKind::generation;
    std::string endpoint;
    std::string model_name;
    int timeout_ms = 30000;
    int max_retries = 3;  // total attempts, not extra tries
    DecodeParams decode;
    std::size_t embedding_dim = 768;
    int max_in_flight = 4;

    bool operator==(const BackendDescriptor& other) const = default;
};

// Stable identity string; keys embedding caches and manifests.
inline std::string backend_key(const BackendDescriptor& b) {
    std::string key;
    key += to_string(b.kind);
    key += '|';
    key += b.endpoint;
    key += '|';
    key += b.model_name;
    key += '|';
    key += std::to_string(b.embedding_dim);
    return key;
}

namespace mock {

// The mock backend is a pure function of (seed, input); the rules below are
// the whole contract and tests recompute them independently.

inline std::uint64_t seed_basis(std::uint64_t seed) { return kFnvBasis ^ seed; }

// Pick a short span (1-3 tokens) of the prompt's own whitespace tokens.
inline std::string generate(std::uint64_t seed, const std::string& prompt) {
    std::vector<std::string> tokens = split_whitespace(prompt);
    if (tokens.empty()) return "";
    std::uint64_t h = fnv1a64(prompt, seed_basis(seed));
    std::size_t start = static_cast<std::size_t>(h % tokens.size());
    std::uint64_t max_span = std::min<std::uint64_t>(3, tokens.size() - start);
    std::size_t span = static_cast<std::size_t>(1 + ((h >> 32) % max_span));
    std::string out;
    for (std::size_t i = start; i < start + span; ++i) {
        if (i > start) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

// Score in [0, 1): hash of the candidate keyed by the prompt hash.
inline double score(std::uint64_t seed, const std::string& prompt, const std::string& candidate) {
    std::uint64_t hp = fnv1a64(prompt, seed_basis(seed));
    return static_cast<double>(fnv1a64(candidate, hp) % 1000000ULL) / 1e6;
}

// Deterministic pseudo-embedding with components in [-1, 1).
inline std::vector<float> embed(std::uint64_t seed, const std::string& text, std::size_t dim) {
    std::uint64_t state = fnv1a64(text, seed_basis(seed));
    std::vector<float> values(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        std::uint64_t bits = splitmix64(state);
        values[i] = static_cast<float>(static_cast<double>(bits >> 11) * 0x1p-52 - 1.0);
    }
    return values;
}

}  // namespace mock

namespace detail {

struct MockEndpoint {
    bool is_mock = false;
    std::uint64_t seed = 0;
};

inline MockEndpoint parse_mock_endpoint(const std::string& endpoint, std::uint64_t default_seed) {
    MockEndpoint out;
    if (endpoint == "mock") {
        out.is_mock = true;
        out.seed = default_seed;
    } else if (endpoint.rfind("mock:", 0) == 0) {
        out.is_mock = true;
        try {
            out.seed = std::stoull(endpoint.substr(5));
        } catch (const std::exception&) {
            throw Error(ErrorCode::SchemaError, "bad mock endpoint '" + endpoint + "'");
        }
    }
    return out;
}

inline std::string trim_at_stop_sequences(std::string text,
                                          const std::vector<std::string>& stops) {
    std::size_t cut = std::string::npos;
    for (const std::string& stop : stops) {
        if (stop.empty()) continue;
        std::size_t pos = text.find(stop);
        if (pos != std::string::npos) cut = std::min(cut, pos);
    }
    if (cut != std::string::npos) text.erase(cut);
    return text;
}

}  // namespace detail

// Gateway to one backend. Handles are cheap to copy and share their
// in-flight limiter; concurrent requests are capped at max_in_flight.
class Backend {
public:
    explicit Backend(BackendDescriptor descriptor, std::uint64_t default_mock_seed = 0)
        : descriptor_(std::move(descriptor)),
          slots_(std::make_shared<std::counting_semaphore<256>>(
              std::max(1, std::min(descriptor_.max_in_flight, 256)))) {
        auto mock = detail::parse_mock_endpoint(descriptor_.endpoint, default_mock_seed);
        mock_ = mock.is_mock;
        mock_seed_ = mock.seed;
    }

    const BackendDescriptor& descriptor() const { return descriptor_; }
    bool is_mock() const { return mock_; }
    std::uint64_t mock_seed() const { return mock_seed_; }

    // Decoded continuation for a prompt, stop-sequence-trimmed.
    std::string generate(const std::string& prompt) const {
        require_kind(BackendKind::generation, "generate");
        if (mock_) {
            return detail::trim_at_stop_sequences(mock::generate(mock_seed_, prompt),
                                                  descriptor_.decode.stop_sequences);
        }
        nlohmann::json params{{"max_new_tokens", descriptor_.decode.max_new_tokens},
                              {"temperature", descriptor_.decode.temperature},
                              {"stop_sequences", descriptor_.decode.stop_sequences}};
        nlohmann::json response = post_with_retries({prompt}, params);
        if (!response.contains("outputs") || !response["outputs"].is_array() ||
            response["outputs"].size() != 1) {
            throw Error(ErrorCode::BackendRejection, "generation response lacks outputs");
        }
        return detail::trim_at_stop_sequences(response["outputs"][0].get<std::string>(),
                                              descriptor_.decode.stop_sequences);
    }

    // One score per candidate. A candidate the backend cannot score comes
    // back flagged with score -inf instead of failing the call.
    std::vector<WordScore> fill_mask(const std::string& prompt,
                                     const std::vector<std::string>& candidates,
                                     const std::string& mask_marker = "[MASK]") const {
        require_kind(BackendKind::fill_mask, "fill_mask");
        if (candidates.empty()) {
            throw Error(ErrorCode::ConstraintViolation, "fill_mask needs at least one candidate");
        }
        std::size_t markers = 0;
        std::size_t pos = 0;
        while ((pos = prompt.find(mask_marker, pos)) != std::string::npos) {
            ++markers;
            pos += mask_marker.size();
        }
        if (markers != 1) {
            throw Error(ErrorCode::NoMaskMarker,
                        "prompt must contain the mask marker exactly once, found " +
                            std::to_string(markers));
        }

        std::vector<WordScore> scores;
        scores.reserve(candidates.size());
        if (mock_) {
            for (const std::string& candidate : candidates) {
                scores.push_back({candidate, mock::score(mock_seed_, prompt, candidate), true});
            }
            return scores;
        }
        nlohmann::json params{{"candidates", candidates}, {"mask_marker", mask_marker}};
        nlohmann::json response = post_with_retries({prompt}, params);
        if (!response.contains("scores") || !response["scores"].is_array() ||
            response["scores"].size() != 1 || !response["scores"][0].is_array() ||
            response["scores"][0].size() != candidates.size()) {
            throw Error(ErrorCode::BackendRejection, "fill_mask response lacks candidate scores");
        }
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const nlohmann::json& value = response["scores"][0][i];
            if (value.is_number() && std::isfinite(value.get<double>())) {
                scores.push_back({candidates[i], value.get<double>(), true});
            } else {
                scores.push_back(
                    {candidates[i], -std::numeric_limits<double>::infinity(), false});
            }
        }
        return scores;
    }

    // One vector per input text, order preserved, dim enforced.
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const {
        require_kind(BackendKind::embedding, "embed");
        if (texts.empty()) {
            throw Error(ErrorCode::ConstraintViolation, "embed needs at least one text");
        }
        std::vector<EmbeddingVector> vectors;
        vectors.reserve(texts.size());
        if (mock_) {
            for (const std::string& text : texts) {
                vectors.emplace_back(mock::embed(mock_seed_, text, descriptor_.embedding_dim));
            }
            return vectors;
        }
        nlohmann::json response =
            post_with_retries(texts, {{"dim", descriptor_.embedding_dim}});
        if (!response.contains("vectors") || !response["vectors"].is_array() ||
            response["vectors"].size() != texts.size()) {
            throw Error(ErrorCode::BackendRejection, "embedding response lacks vectors");
        }
        for (const nlohmann::json& row : response["vectors"]) {
            std::vector<float> values = row.get<std::vector<float>>();
            if (values.size() != descriptor_.embedding_dim) {
                throw Error(ErrorCode::DimensionMismatch,
                            "backend returned dim " + std::to_string(values.size()) +
                                ", configured dim is " +
                                std::to_string(descriptor_.embedding_dim));
            }
            vectors.emplace_back(std::move(values));
        }
        return vectors;
    }

private:
    void require_kind(BackendKind kind, std::string_view op) const {
        if (descriptor_.kind != kind) {
            throw Error(ErrorCode::ConstraintViolation,
                        std::string(op) + " called on a " +
                            std::string(to_string(descriptor_.kind)) + " backend");
        }
    }

    nlohmann::json post_with_retries(const std::vector<std::string>& inputs,
                                     nlohmann::json params) const {
        nlohmann::json request{{"model", descriptor_.model_name},
                               {"kind", std::string(to_string(descriptor_.kind))},
                               {"inputs", inputs},
                               {"params", std::move(params)}};
        std::string body = request.dump();

        slots_->acquire();
        struct Release {
            std::counting_semaphore<256>* s;
            ~Release() { s->release(); }
        } release{slots_.get()};

        int attempts = std::max(1, descriptor_.max_retries);
        std::string last_failure;
        bool last_was_timeout = false;
        for (int attempt = 1; attempt <= attempts; ++attempt) {
            httplib::Client client(descriptor_.endpoint);
            client.set_connection_timeout(0, descriptor_.timeout_ms * 1000);
            client.set_read_timeout(descriptor_.timeout_ms / 1000,
                                    (descriptor_.timeout_ms % 1000) * 1000);
            auto result = client.Post("/v1/infer", body, "application/json");
            if (!result) {
                last_was_timeout = result.error() == httplib::Error::ConnectionTimeout ||
                                   result.error() == httplib::Error::Read;
                last_failure = httplib::to_string(result.error());
                continue;
            }
            if (result->status == 429 || result->status >= 500) {
                last_was_timeout = false;
                last_failure = "status " + std::to_string(result->status);
                continue;
            }
            if (result->status < 200 || result->status >= 300) {
                throw Error(ErrorCode::BackendRejection,
                            "backend returned status " + std::to_string(result->status) + ": " +
                                result->body);
            }
            nlohmann::json response = nlohmann::json::parse(result->body, nullptr, false);
            if (response.is_discarded() || !response.is_object()) {
                throw Error(ErrorCode::BackendRejection, "backend response is not a JSON object");
            }
            if (response.value("status", "") != "ok") {
                throw Error(ErrorCode::BackendRejection,
                            "backend error: " + response.value("error", "unspecified"));
            }
            return response;
        }
        ErrorCode code = last_was_timeout ? ErrorCode::Timeout : ErrorCode::TransportError;
        throw Error(code, "backend '" + descriptor_.endpoint + "' unreachable after " +
                              std::to_string(attempts) + " attempts (" + last_failure + ")");
    }

    BackendDescriptor descriptor_;
    bool mock_ = false;
    std::uint64_t mock_seed_ = 0;
    std::shared_ptr<std::counting_semaphore<256>> slots_;
};

// Argmax over scorable candidates; scoring order breaks exact ties.
inline const WordScore& best_candidate(const std::vector<WordScore>& scores) {
    const WordScore* best = nullptr;
    for (const WordScore& ws : scores) {
        if (!ws.scorable) continue;
        if (best == nullptr || ws.score > best->score) best = &ws;
    }
    if (best == nullptr) {
        throw Error(ErrorCode::CandidateTokenizationError, "no candidate could be scored");
    }
    return *best;
}

}  // namespace parc
