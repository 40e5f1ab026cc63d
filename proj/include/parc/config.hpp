#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parc/backend.hpp"
#include "parc/dataset.hpp"
#include "parc/errors.hpp"
#include "parc/hash.hpp"
#include "parc/prediction.hpp"

namespace parc {

struct Limits {
    std::optional<std::size_t> max_examples;
    std::size_t max_prompt_chars = 0;  // 0 = unlimited
    std::size_t parallelism = 1;

    bool operator==(const Limits& other) const = default;
};

struct SelfPredictionConfig {
    bool enabled = false;
    std::string template_id;
    std::optional<std::string> fallback_label;

    bool operator==(const SelfPredictionConfig& other) const = default;
};

// Declarative experiment description. `timestamp` is provenance text copied
// into the manifest verbatim; it defaults to empty so reruns of the same
// config produce byte-identical manifests.
struct ExperimentConfig {
    TaskKind task = TaskKind::classification;
    std::string dataset_path;
    std::optional<std::string> pool_path;
    std::string template_registry;
    std::vector<std::string> template_ids;
    std::vector<int> k_values;
    std::optional<BackendDescriptor> generation;
    std::optional<BackendDescriptor> fill_mask;
    std::optional<BackendDescriptor> embedding;
    LabelOptionSet label_options;
    std::optional<std::string> fallback_label;
    std::string target_lang;
    SelfPredictionConfig self_prediction;
    Limits limits;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::optional<std::string> cache_dir;  // default: <output_dir>/cache
    std::string timestamp;

    std::string effective_cache_dir() const {
        return cache_dir ? *cache_dir : output_dir + "/cache";
    }
};

namespace config_detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<std::string_view> allowed,
                                std::string_view where) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (std::string_view a : allowed) known = known || key == a;
        if (!known) {
            throw Error(ErrorCode::SchemaError,
                        "unknown config key '" + key + "' in " + std::string(where));
        }
    }
}

inline BackendDescriptor parse_backend(const nlohmann::json& obj, BackendKind kind,
                                       std::string_view where) {
    if (!obj.is_object()) {
        throw Error(ErrorCode::SchemaError, std::string(where) + " must be an object");
    }
    reject_unknown_keys(obj,
                        {"endpoint", "model_name", "timeout_ms", "max_retries", "decode",
                         "embedding_dim", "max_in_flight"},
                        where);
    BackendDescriptor b;
    b.kind = kind;
    b.endpoint = obj.value("endpoint", "");
    if (b.endpoint.empty()) {
        throw Error(ErrorCode::SchemaError, std::string(where) + " needs an endpoint");
    }
    b.model_name = obj.value("model_name", "");
    b.timeout_ms = obj.value("timeout_ms", 30000);
    b.max_retries = obj.value("max_retries", 3);
    if (b.timeout_ms <= 0) {
        throw Error(ErrorCode::ConstraintViolation, std::string(where) + ": timeout must be > 0");
    }
    if (b.max_retries < 1) {
        throw Error(ErrorCode::ConstraintViolation,
                    std::string(where) + ": max_retries must be >= 1");
    }
    if (obj.contains("decode")) {
        const nlohmann::json& d = obj["decode"];
        reject_unknown_keys(d, {"max_new_tokens", "temperature", "stop_sequences"},
                            std::string(where) + ".decode");
        b.decode.max_new_tokens = d.value("max_new_tokens", 64);
        b.decode.temperature = d.value("temperature", 0.0);
        if (d.contains("stop_sequences")) {
            b.decode.stop_sequences = d["stop_sequences"].get<std::vector<std::string>>();
        }
        if (b.decode.temperature < 0.0) {
            throw Error(ErrorCode::ConstraintViolation,
                        std::string(where) + ": temperature must be >= 0");
        }
    }
    b.embedding_dim = obj.value("embedding_dim", static_cast<std::size_t>(768));
    if (b.embedding_dim == 0) {
        throw Error(ErrorCode::ConstraintViolation,
                    std::string(where) + ": embedding_dim must be positive");
    }
    b.max_in_flight = obj.value("max_in_flight", 4);
    if (b.max_in_flight < 1) {
        throw Error(ErrorCode::ConstraintViolation,
                    std::string(where) + ": max_in_flight must be >= 1");
    }
    return b;
}

inline nlohmann::json backend_to_json(const BackendDescriptor& b) {
    return nlohmann::json{{"endpoint", b.endpoint},
                          {"model_name", b.model_name},
                          {"timeout_ms", b.timeout_ms},
                          {"max_retries", b.max_retries},
                          {"decode",
                           {{"max_new_tokens", b.decode.max_new_tokens},
                            {"temperature", b.decode.temperature},
                            {"stop_sequences", b.decode.stop_sequences}}},
                          {"embedding_dim", b.embedding_dim},
                          {"max_in_flight", b.max_in_flight}};
}

inline LabelOptionSet parse_label_options(const nlohmann::json& arr) {
    std::vector<LabelOption> options;
    for (const nlohmann::json& item : arr) {
        reject_unknown_keys(item, {"label", "surfaces"}, "label_options");
        LabelOption option;
        option.label = item.at("label").get<std::string>();
        if (item.contains("surfaces")) {
            option.surfaces = item["surfaces"].get<std::vector<std::string>>();
        }
        options.push_back(std::move(option));
    }
    return LabelOptionSet(std::move(options));
}

// PARC_<KIND>_ENDPOINT / PARC_<KIND>_TIMEOUT_MS beat the config file.
inline void apply_env_overrides(std::optional<BackendDescriptor>& backend,
                                const char* endpoint_var, const char* timeout_var) {
    if (!backend) return;
    if (const char* endpoint = std::getenv(endpoint_var); endpoint && *endpoint) {
        backend->endpoint = endpoint;
    }
    if (const char* timeout = std::getenv(timeout_var); timeout && *timeout) {
        backend->timeout_ms = std::atoi(timeout);
    }
}

}  // namespace config_detail

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
    using namespace config_detail;
    if (!doc.is_object()) {
        throw Error(ErrorCode::SchemaError, "config must be a JSON object");
    }
    reject_unknown_keys(doc,
                        {"task", "dataset_path", "pool_path", "template_registry", "template_ids",
                         "k_values", "backends", "label_options", "fallback_label", "target_lang",
                         "self_prediction", "limits", "seed", "output_dir", "cache_dir",
                         "timestamp"},
                        "config");
    ExperimentConfig config;
    if (!doc.contains("task")) {
        throw Error(ErrorCode::SchemaError, "config needs a 'task'");
    }
    config.task = task_from_string(doc["task"].get<std::string>());
    config.dataset_path = doc.value("dataset_path", "");
    if (doc.contains("pool_path")) config.pool_path = doc["pool_path"].get<std::string>();
    config.template_registry = doc.value("template_registry", "");
    if (doc.contains("template_ids")) {
        config.template_ids = doc["template_ids"].get<std::vector<std::string>>();
    }
    if (doc.contains("k_values")) config.k_values = doc["k_values"].get<std::vector<int>>();
    if (doc.contains("backends")) {
        const nlohmann::json& backends = doc["backends"];
        reject_unknown_keys(backends, {"generation", "fill_mask", "embedding"}, "backends");
        if (backends.contains("generation")) {
            config.generation = parse_backend(backends["generation"], BackendKind::generation,
                                              "backends.generation");
        }
        if (backends.contains("fill_mask")) {
            config.fill_mask =
                parse_backend(backends["fill_mask"], BackendKind::fill_mask, "backends.fill_mask");
        }
        if (backends.contains("embedding")) {
            config.embedding =
                parse_backend(backends["embedding"], BackendKind::embedding, "backends.embedding");
        }
    }
    if (doc.contains("label_options")) {
        config.label_options = parse_label_options(doc["label_options"]);
    }
    if (doc.contains("fallback_label")) {
        config.fallback_label = doc["fallback_label"].get<std::string>();
    }
    config.target_lang = doc.value("target_lang", "");
    if (doc.contains("self_prediction")) {
        const nlohmann::json& sp = doc["self_prediction"];
        reject_unknown_keys(sp, {"enabled", "template_id", "fallback_label"}, "self_prediction");
        config.self_prediction.enabled = sp.value("enabled", false);
        config.self_prediction.template_id = sp.value("template_id", "");
        if (sp.contains("fallback_label")) {
            config.self_prediction.fallback_label = sp["fallback_label"].get<std::string>();
        }
    }
    if (doc.contains("limits")) {
        const nlohmann::json& limits = doc["limits"];
        reject_unknown_keys(limits, {"max_examples", "max_prompt_chars", "parallelism"}, "limits");
        if (limits.contains("max_examples") && !limits["max_examples"].is_null()) {
            config.limits.max_examples = limits["max_examples"].get<std::size_t>();
        }
        config.limits.max_prompt_chars =
            limits.value("max_prompt_chars", static_cast<std::size_t>(0));
        config.limits.parallelism = limits.value("parallelism", static_cast<std::size_t>(1));
        if (config.limits.parallelism == 0) {
            throw Error(ErrorCode::ConstraintViolation, "limits.parallelism must be >= 1");
        }
    }
    config.seed = doc.value("seed", static_cast<std::uint64_t>(0));
    config.output_dir = doc.value("output_dir", "out");
    if (doc.contains("cache_dir")) config.cache_dir = doc["cache_dir"].get<std::string>();
    config.timestamp = doc.value("timestamp", "");

    apply_env_overrides(config.generation, "PARC_GENERATION_ENDPOINT",
                        "PARC_GENERATION_TIMEOUT_MS");
    apply_env_overrides(config.fill_mask, "PARC_FILL_MASK_ENDPOINT", "PARC_FILL_MASK_TIMEOUT_MS");
    apply_env_overrides(config.embedding, "PARC_EMBEDDING_ENDPOINT", "PARC_EMBEDDING_TIMEOUT_MS");

    // Cross-field constraints.
    if (config.dataset_path.empty()) {
        throw Error(ErrorCode::ConstraintViolation, "config needs a dataset_path");
    }
    if (config.template_registry.empty()) {
        throw Error(ErrorCode::ConstraintViolation, "config needs a template_registry");
    }
    if (config.template_ids.empty()) {
        throw Error(ErrorCode::ConstraintViolation, "config needs at least one template id");
    }
    if (config.k_values.empty()) {
        throw Error(ErrorCode::ConstraintViolation, "k_values must be non-empty");
    }
    bool needs_retrieval = false;
    for (int k : config.k_values) {
        if (k < 0) {
            throw Error(ErrorCode::ConstraintViolation, "k values must be >= 0");
        }
        needs_retrieval = needs_retrieval || k > 0;
    }
    if (needs_retrieval && !config.pool_path) {
        throw Error(ErrorCode::ConstraintViolation, "k > 0 requires a pool_path");
    }
    if (needs_retrieval && !config.embedding) {
        throw Error(ErrorCode::ConstraintViolation, "k > 0 requires an embedding backend");
    }
    if (config.task == TaskKind::classification) {
        if (config.label_options.empty()) {
            throw Error(ErrorCode::ConstraintViolation, "classification requires label_options");
        }
        if (config.fallback_label && !config.label_options.has_label(*config.fallback_label)) {
            throw Error(ErrorCode::ConstraintViolation,
                        "fallback_label '" + *config.fallback_label + "' is not a task label");
        }
    } else {
        if (config.target_lang.empty()) {
            throw Error(ErrorCode::ConstraintViolation, "summarization requires target_lang");
        }
        if (!config.generation) {
            throw Error(ErrorCode::ConstraintViolation,
                        "summarization requires a generation backend");
        }
    }
    if (config.self_prediction.enabled) {
        if (config.task != TaskKind::classification) {
            throw Error(ErrorCode::ConstraintViolation,
                        "self-prediction applies to classification pools only");
        }
        if (config.self_prediction.template_id.empty()) {
            throw Error(ErrorCode::ConstraintViolation, "self_prediction needs a template_id");
        }
    }
    return config;
}

inline nlohmann::json config_to_json(const ExperimentConfig& config) {
    using namespace config_detail;
    nlohmann::json doc;
    doc["task"] = std::string(to_string(config.task));
    doc["dataset_path"] = config.dataset_path;
    if (config.pool_path) doc["pool_path"] = *config.pool_path;
    doc["template_registry"] = config.template_registry;
    doc["template_ids"] = config.template_ids;
    doc["k_values"] = config.k_values;
    nlohmann::json backends = nlohmann::json::object();
    if (config.generation) backends["generation"] = backend_to_json(*config.generation);
    if (config.fill_mask) backends["fill_mask"] = backend_to_json(*config.fill_mask);
    if (config.embedding) backends["embedding"] = backend_to_json(*config.embedding);
    if (!backends.empty()) doc["backends"] = backends;
    if (!config.label_options.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const LabelOption& option : config.label_options.options()) {
            arr.push_back({{"label", option.label}, {"surfaces", option.surfaces}});
        }
        doc["label_options"] = arr;
    }
    if (config.fallback_label) doc["fallback_label"] = *config.fallback_label;
    if (!config.target_lang.empty()) doc["target_lang"] = config.target_lang;
    if (config.self_prediction.enabled) {
        nlohmann::json sp{{"enabled", true}, {"template_id", config.self_prediction.template_id}};
        if (config.self_prediction.fallback_label) {
            sp["fallback_label"] = *config.self_prediction.fallback_label;
        }
        doc["self_prediction"] = sp;
    }
    nlohmann::json limits = nlohmann::json::object();
    if (config.limits.max_examples) limits["max_examples"] = *config.limits.max_examples;
    limits["max_prompt_chars"] = config.limits.max_prompt_chars;
    limits["parallelism"] = config.limits.parallelism;
    doc["limits"] = limits;
    doc["seed"] = config.seed;
    doc["output_dir"] = config.output_dir;
    if (config.cache_dir) doc["cache_dir"] = *config.cache_dir;
    if (!config.timestamp.empty()) doc["timestamp"] = config.timestamp;
    return doc;
}

// Hash of the canonical serialization; names report files and ties
// manifests to the exact configuration that produced them.
inline std::string config_hash(const ExperimentConfig& config) {
    return to_hex16(fnv1a64(config_to_json(config).dump()));
}

// `--override path.to.key=value` support. The value is parsed as JSON when
// possible, else taken as a raw string. Missing intermediate objects are
// created.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
    std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorCode::SchemaError, "override must look like key.path=value");
    }
    std::string path = assignment.substr(0, eq);
    std::string raw = assignment.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    nlohmann::json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        std::size_t dot = path.find('.', start);
        std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) {
            throw Error(ErrorCode::SchemaError, "override path has an empty segment");
        }
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key) || !(*node)[key].is_object()) {
            (*node)[key] = nlohmann::json::object();
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

inline nlohmann::json load_config_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
    }
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(ErrorCode::SchemaError, "config '" + path + "' is not valid JSON");
    }
    return doc;
}

inline ExperimentConfig load_config(const std::string& path,
                                    const std::vector<std::string>& overrides = {}) {
    nlohmann::json doc = load_config_json(path);
    for (const std::string& assignment : overrides) {
        apply_override(doc, assignment);
    }
    return parse_config(doc);
}

}  // namespace parc
