#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parc/backend.hpp"
#include "parc/config.hpp"
#include "parc/dataset.hpp"
#include "parc/embedding_cache.hpp"
#include "parc/errors.hpp"
#include "parc/manifest.hpp"
#include "parc/metrics.hpp"
#include "parc/parallel.hpp"
#include "parc/pool.hpp"
#include "parc/pool_cache.hpp"
#include "parc/prompt.hpp"
#include "parc/prompt_template.hpp"
#include "parc/retrieval.hpp"
#include "parc/rouge.hpp"
#include "parc/self_predict.hpp"

namespace parc {

struct RunOptions {
    // Render prompts but call no backend (in-process mocks excepted).
    bool dry_run = false;
    // Record failed cells and continue instead of aborting; sweep mode.
    bool tolerate_cell_failures = false;
};

// Component-wise arithmetic mean; the standard per-example aggregation.
inline RougeScores mean_rouge(const std::vector<RougeScores>& scores) {
    RougeScores mean;
    if (scores.empty()) return mean;
    auto add = [](RougeComponent& acc, const RougeComponent& c) {
        acc.precision += c.precision;
        acc.recall += c.recall;
        acc.f1 += c.f1;
    };
    for (const RougeScores& s : scores) {
        add(mean.r1, s.r1);
        add(mean.r2, s.r2);
        add(mean.rl, s.rl);
        add(mean.rlsum, s.rlsum);
    }
    auto div = [&](RougeComponent& c) {
        c.precision /= static_cast<double>(scores.size());
        c.recall /= static_cast<double>(scores.size());
        c.f1 /= static_cast<double>(scores.size());
    };
    div(mean.r1);
    div(mean.r2);
    div(mean.rl);
    div(mean.rlsum);
    return mean;
}

namespace runner_detail {

inline bool is_recordable_failure(ErrorCode code) {
    return code == ErrorCode::TransportError || code == ErrorCode::Timeout ||
           code == ErrorCode::BackendRejection || code == ErrorCode::CandidateTokenizationError;
}

inline std::string example_id_for(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06zu", index);
    return buf;
}

// Accepts both pool formats: the binary cache (by magic) and line-delimited
// records.
inline SentencePool load_any_pool(const std::string& path, std::size_t dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open pool '" + path + "'");
    }
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() >= 8 && std::memcmp(data.data(), "PARCPOOL", 8) == 0) {
        return deserialize_pool(data);
    }
    return build_pool(parse_pool_records(data), dim);
}

// Fills in missing entry embeddings through the cache; returns a new pool.
inline SentencePool embed_pool_entries(const SentencePool& pool, const Backend& backend,
                                       EmbeddingCache& cache, bool offline) {
    std::vector<std::size_t> missing;
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!pool.entries()[i].embedding) {
            missing.push_back(i);
            texts.push_back(pool.entries()[i].text);
        }
    }
    if (missing.empty()) return pool;
    std::vector<EmbeddingVector> vectors = cache.embed(backend, texts, offline);
    std::vector<PoolEntry> entries = pool.entries();
    for (std::size_t j = 0; j < missing.size(); ++j) {
        entries[missing[j]].embedding = normalize(vectors[j]);
    }
    return SentencePool(std::move(entries), pool.dim());
}

struct PipelineState {
    ExperimentConfig config;
    TemplateRegistry registry;
    std::vector<QueryExample> dataset;
    std::optional<SentencePool> pool;
    std::vector<EmbeddingVector> query_embeddings;
    std::optional<Backend> generation;
    std::optional<Backend> fill_mask;
    std::optional<Backend> embedding;
    RenderContext ctx;
    bool needs_retrieval = false;
};

// Self-predicted pools are persisted per (pool, backend, template,
// fallback) so the costly labeling pass runs once.
inline SentencePool cached_self_predict(const PipelineState& state, const SentencePool& pool,
                                        const RunOptions& opts) {
    const SelfPredictionConfig& sp = state.config.self_prediction;
    const PromptTemplate& t = state.registry.require(sp.template_id);
    const std::optional<Backend>& backend =
        t.style == TemplateStyle::masked ? state.fill_mask : state.generation;
    if (!backend) {
        throw Error(ErrorCode::ConstraintViolation,
                    "self-prediction template '" + t.id + "' has no matching backend configured");
    }
    std::string key = to_hex16(fnv1a64(to_hex16(pool_checksum(pool)) + "|" +
                                       backend_key(backend->descriptor()) + "|" + t.id + "|" +
                                       sp.fallback_label.value_or("")));
    std::string dir = state.config.effective_cache_dir();
    std::filesystem::create_directories(dir);
    std::string path = (std::filesystem::path(dir) / ("selfpred-" + key + ".pool")).string();
    if (std::filesystem::exists(path)) {
        return load_pool(path);
    }
    if (opts.dry_run && !backend->is_mock()) {
        throw Error(ErrorCode::ConstraintViolation,
                    "dry run cannot self-predict against a remote backend; run `self-predict` "
                    "first to populate the cache");
    }
    SentencePool labeled = self_predict_labels(pool, *backend, t, state.config.label_options,
                                               sp.fallback_label, state.ctx);
    save_pool(labeled, path);
    return labeled;
}

inline PipelineState prepare(const ExperimentConfig& config, const RunOptions& opts) {
    PipelineState state;
    state.config = config;
    state.registry = load_template_registry(config.template_registry);
    state.dataset = load_dataset(config.dataset_path, config.task, config.limits.max_examples);
    if (state.dataset.empty()) {
        throw Error(ErrorCode::SchemaError, "dataset '" + config.dataset_path + "' is empty");
    }
    if (!config.target_lang.empty()) state.ctx.target_lang = config.target_lang;
    if (config.generation) state.generation.emplace(*config.generation, config.seed);
    if (config.fill_mask) state.fill_mask.emplace(*config.fill_mask, config.seed);
    if (config.embedding) state.embedding.emplace(*config.embedding, config.seed);

    for (int k : config.k_values) state.needs_retrieval = state.needs_retrieval || k > 0;
    if (state.needs_retrieval) {
        std::size_t dim = state.embedding->descriptor().embedding_dim;
        SentencePool pool = load_any_pool(*config.pool_path, dim);
        if (pool.dim() != dim) {
            throw Error(ErrorCode::DimensionMismatch,
                        "pool dim " + std::to_string(pool.dim()) +
                            " != embedding backend dim " + std::to_string(dim));
        }
        EmbeddingCache cache(config.effective_cache_dir(), state.embedding->descriptor());
        pool = embed_pool_entries(pool, *state.embedding, cache, opts.dry_run);
        if (config.self_prediction.enabled) {
            pool = cached_self_predict(state, pool, opts);
        }
        state.pool = std::move(pool);

        std::vector<std::string> texts;
        texts.reserve(state.dataset.size());
        for (const QueryExample& q : state.dataset) texts.push_back(q.text);
        state.query_embeddings = cache.embed(*state.embedding, texts, opts.dry_run);
    }
    return state;
}

struct CellOutcome {
    CellResult cell;
    bool any_example_failed = false;
    std::vector<std::string> prompts;  // dry run only
};

inline CellOutcome run_cell(PipelineState& state, const std::string& template_id, int k,
                            const RunOptions& opts) {
    const ExperimentConfig& config = state.config;
    CellOutcome outcome;
    CellResult& cell = outcome.cell;
    cell.template_id = template_id;
    cell.k = k;

    const PromptTemplate& t = state.registry.require(template_id);
    bool classification = config.task == TaskKind::classification;

    LabelOptionSet options;
    std::vector<std::string> task_labels;
    const Verbalizer* verbalizer = nullptr;
    const Backend* backend = nullptr;
    if (classification) {
        task_labels = config.label_options.labels();
        options = t.options.empty() ? config.label_options : LabelOptionSet(t.options);
        std::vector<std::string> a = options.labels();
        std::vector<std::string> b = task_labels;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) {
            throw Error(ErrorCode::LabelSetMismatch,
                        "template '" + t.id + "' options do not cover the task label set");
        }
    }
    if (t.style == TemplateStyle::masked) {
        if (!state.fill_mask) {
            throw Error(ErrorCode::ConstraintViolation,
                        "masked template '" + t.id + "' needs a fill_mask backend");
        }
        backend = &*state.fill_mask;
        if (!t.verbalizer) {
            throw Error(ErrorCode::VerbalizerMiss,
                        "masked template '" + t.id + "' ships no verbalizer");
        }
        verbalizer = &*t.verbalizer;
        if (classification) verbalizer->require_covers(task_labels);
    } else {
        if (!state.generation) {
            throw Error(ErrorCode::ConstraintViolation,
                        "generative template '" + t.id + "' needs a generation backend");
        }
        backend = &*state.generation;
    }

    std::size_t n = state.dataset.size();
    cell.examples.resize(n);
    outcome.prompts.resize(opts.dry_run ? n : 0);
    std::vector<std::optional<std::string>> mapped(n);
    std::atomic<bool> any_failure{false};

    PromptBudget budget{config.limits.max_prompt_chars};
    parallel_for(n, config.limits.parallelism, [&](std::size_t i) {
        const QueryExample& q = state.dataset[i];
        ExampleRecord& record = cell.examples[i];
        record.example_id = example_id_for(i);
        try {
            AssembledPrompt prompt;
            if (k > 0) {
                RetrievalResult retrieval =
                    retrieve_top_k(state.query_embeddings[i], *state.pool, static_cast<std::size_t>(k));
                for (const RetrievalHit& hit : retrieval.hits) {
                    record.retrieved.push_back({hit.entry_id, hit.similarity});
                }
                prompt = assemble_prompt(q, retrieval, *state.pool, t, t.verbalizer, state.ctx,
                                         budget);
            } else {
                prompt = render_zero_shot(q, t, state.ctx);
            }
            record.prompt_checksum = to_hex16(fnv1a64(prompt.full_text));
            record.prompt_truncated = prompt.truncated;
            if (opts.dry_run) {
                outcome.prompts[i] = std::move(prompt.full_text);
                return;
            }

            if (t.style == TemplateStyle::masked) {
                auto scores =
                    backend->fill_mask(prompt.full_text, verbalizer->words(), t.mask_marker);
                const WordScore& best = best_candidate(scores);
                record.raw_output = best.word;
                if (classification) {
                    record.mapped_label = verbalizer->invert(best.word);
                    record.parse_status = ParseStatus::matched;
                }
            } else {
                std::string raw = backend->generate(prompt.full_text);
                record.raw_output = raw;
                if (classification) {
                    Prediction prediction =
                        map_generation_to_label(raw, options, config.fallback_label);
                    record.mapped_label = prediction.mapped_label;
                    record.parse_status = prediction.parse_status;
                }
            }
            if (!classification) {
                record.rouge = rouge_scores(record.raw_output, *q.reference_summary);
            }
        } catch (const Error& e) {
            if (!is_recordable_failure(e.code())) {
                throw Error(e.code(), "template '" + template_id + "' k=" + std::to_string(k) +
                                          " example " + record.example_id + ": " + e.what());
            }
            record.error = e.what();
            record.raw_output.clear();
            if (classification) {
                record.mapped_label.reset();
                record.parse_status = ParseStatus::unparsed;
            } else {
                record.rouge = rouge_scores("", *q.reference_summary);
            }
            any_failure = true;
        }
        mapped[i] = record.mapped_label;
    });
    outcome.any_example_failed = any_failure.load();

    if (!opts.dry_run) {
        if (classification) {
            std::vector<std::string> gold;
            gold.reserve(n);
            for (const QueryExample& q : state.dataset) gold.push_back(*q.gold_label);
            ConfusionMatrix cm = confusion_matrix(gold, mapped, task_labels);
            cell.classification = ClassificationCellReport{classification_report(cm), cm};
        } else {
            std::vector<RougeScores> all;
            all.reserve(n);
            for (const ExampleRecord& record : cell.examples) all.push_back(*record.rouge);
            cell.rouge = mean_rouge(all);
        }
    }
    return outcome;
}

inline void write_prompts_file(const ExperimentConfig& config, const CellOutcome& outcome,
                               const std::string& hash) {
    std::filesystem::create_directories(config.output_dir);
    std::string path = (std::filesystem::path(config.output_dir) /
                        ("prompts-" + hash + "-" + outcome.cell.template_id + "-k" +
                         std::to_string(outcome.cell.k) + ".txt"))
                           .string();
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write prompts file '" + path + "'");
    }
    for (std::size_t i = 0; i < outcome.prompts.size(); ++i) {
        out << "### example " << outcome.cell.examples[i].example_id << "\n"
            << outcome.prompts[i] << "\n\n";
    }
}

}  // namespace runner_detail

// Runs every (template, k) cell of the experiment and persists the manifest
// under output_dir. Transport failures downgrade single examples to
// unparsed and flag the run incomplete; other module errors persist a
// partial manifest and propagate (unless cell failures are tolerated, as in
// sweeps).
inline RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& opts = {}) {
    using namespace runner_detail;
    PipelineState state = prepare(config, opts);

    RunManifest manifest;
    manifest.task = std::string(to_string(config.task));
    manifest.config_hash = config_hash(config);
    manifest.seed = config.seed;
    manifest.timestamp = config.timestamp;
    manifest.dry_run = opts.dry_run;
    nlohmann::json config_doc = config_to_json(config);
    manifest.backends = config_doc.value("backends", nlohmann::json::object());
    if (state.pool) manifest.pool_checksum = to_hex16(pool_checksum(*state.pool));

    if (config.task == TaskKind::summarization) {
        std::vector<RougeScores> lead;
        lead.reserve(state.dataset.size());
        for (const QueryExample& q : state.dataset) {
            lead.push_back(rouge_scores(lead_n(q.text, 64), *q.reference_summary));
        }
        manifest.lead64 = mean_rouge(lead);
    }

    for (const std::string& template_id : config.template_ids) {
        for (int k : config.k_values) {
            try {
                CellOutcome outcome = run_cell(state, template_id, k, opts);
                manifest.incomplete = manifest.incomplete || outcome.any_example_failed;
                if (opts.dry_run) {
                    write_prompts_file(config, outcome, manifest.config_hash);
                }
                manifest.cells.push_back(std::move(outcome.cell));
            } catch (const Error& e) {
                CellResult failed;
                failed.template_id = template_id;
                failed.k = k;
                failed.failed = true;
                failed.error = e.what();
                manifest.cells.push_back(std::move(failed));
                manifest.incomplete = true;
                if (!opts.tolerate_cell_failures) {
                    write_report(manifest, config.output_dir);
                    throw;
                }
                std::cerr << "warning: cell template='" << template_id << "' k=" << k
                          << " failed: " << e.what() << "\n";
            }
        }
    }
    write_report(manifest, config.output_dir);
    return manifest;
}

inline RunManifest run_classification(const ExperimentConfig& config, const RunOptions& opts = {}) {
    if (config.task != TaskKind::classification) {
        throw Error(ErrorCode::ConstraintViolation, "config task is not classification");
    }
    return run_experiment(config, opts);
}

inline RunManifest run_summarization(const ExperimentConfig& config, const RunOptions& opts = {}) {
    if (config.task != TaskKind::summarization) {
        throw Error(ErrorCode::ConstraintViolation, "config task is not summarization");
    }
    return run_experiment(config, opts);
}

// Multi-template sweep: per-template zero-shot anchors plus per-k deltas,
// ready for the box-plot statistic. Failed cells are warned about and
// excluded from the delta table.
inline RunManifest sweep(const ExperimentConfig& config, RunOptions opts = {}) {
    if (config.task != TaskKind::classification) {
        throw Error(ErrorCode::ConstraintViolation, "sweep applies to classification tasks");
    }
    opts.tolerate_cell_failures = true;
    RunManifest manifest = run_experiment(config, opts);

    std::vector<F1Cell> cells;
    for (const CellResult& cell : manifest.cells) {
        if (cell.failed || !cell.classification) continue;
        cells.push_back({cell.template_id, cell.k, cell.classification->report.macro_avg.f1});
    }
    manifest.delta_table = f1_delta_table(cells);
    write_report(manifest, config.output_dir);
    return manifest;
}

// Standalone ingestion helper behind the `embed-pool` subcommand.
inline SentencePool embed_pool_file(const std::string& pool_path, const Backend& backend,
                                    const std::string& cache_dir) {
    using namespace runner_detail;
    SentencePool pool = load_any_pool(pool_path, backend.descriptor().embedding_dim);
    EmbeddingCache cache(cache_dir, backend.descriptor());
    return embed_pool_entries(pool, backend, cache, /*offline=*/false);
}

}  // namespace parc
