// Command-line front end for the retrieval-augmented prompting pipeline.
// Each pipeline stage is independently invocable:
//
//   parc embed-pool    embed a sentence pool and write the binary cache
//   parc self-predict  label an unlabeled pool by zero-shot prediction
//   parc run           execute an experiment config end to end
//   parc sweep         multi-template run plus the delta table
//   parc report        pretty-print a manifest as tables
//
// Exit codes: 0 success, 1 config error, 2 incomplete run, 3 transport
// failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parc/parc.hpp"

namespace {

int exit_code_for(const parc::Error& error) {
    switch (error.code()) {
        case parc::ErrorCode::TransportError:
        case parc::ErrorCode::Timeout:
        case parc::ErrorCode::BackendRejection:
            return 3;
        default:
            return 1;
    }
}

void print_classification_cell(const parc::CellResult& cell) {
    const auto& report = cell.classification->report;
    const auto& matrix = cell.classification->matrix;
    std::printf("%-16s %9s %9s %9s %9s\n", "", "precision", "recall", "f1-score", "support");
    for (std::size_t i = 0; i < report.labels.size(); ++i) {
        const auto& m = report.per_class[i];
        std::printf("%-16s %9.2f %9.2f %9.2f %9zu\n", report.labels[i].c_str(), m.precision,
                    m.recall, m.f1, m.support);
    }
    std::size_t total = matrix.total();
    std::printf("%-16s %9s %9s %9.2f %9zu\n", "accuracy", "", "", report.accuracy, total);
    std::printf("%-16s %9.2f %9.2f %9.2f %9zu\n", "macro avg", report.macro_avg.precision,
                report.macro_avg.recall, report.macro_avg.f1, total);
    std::printf("%-16s %9.2f %9.2f %9.2f %9zu\n", "weighted avg", report.weighted_avg.precision,
                report.weighted_avg.recall, report.weighted_avg.f1, total);

    std::printf("\nconfusion (rows=gold, cols=predicted%s):\n",
                matrix.has_unparsed() ? " + unparsed" : "");
    std::printf("%-16s", "");
    for (const std::string& label : matrix.labels()) std::printf(" %12s", label.c_str());
    if (matrix.has_unparsed()) std::printf(" %12s", "unparsed");
    std::printf("\n");
    for (std::size_t g = 0; g < matrix.labels().size(); ++g) {
        std::printf("%-16s", matrix.labels()[g].c_str());
        for (std::size_t p = 0; p < matrix.labels().size(); ++p) {
            std::printf(" %12zu", matrix.count(g, p));
        }
        if (matrix.has_unparsed()) std::printf(" %12zu", matrix.unparsed_count(g));
        std::printf("\n");
    }
}

void print_rouge_row(const std::string& name, const parc::RougeScores& scores) {
    std::printf("%-24s %8.2f %8.2f %8.2f %8.2f\n", name.c_str(), scores.r1.f1 * 100.0,
                scores.r2.f1 * 100.0, scores.rl.f1 * 100.0, scores.rlsum.f1 * 100.0);
}

void print_manifest(const parc::RunManifest& manifest) {
    std::printf("task: %s   config: %s   seed: %llu\n", manifest.task.c_str(),
                manifest.config_hash.c_str(),
                static_cast<unsigned long long>(manifest.seed));
    if (manifest.pool_checksum) std::printf("pool checksum: %s\n", manifest.pool_checksum->c_str());
    if (manifest.incomplete) std::printf("NOTE: run is incomplete\n");
    if (manifest.dry_run) std::printf("NOTE: dry run, no predictions\n");

    bool rouge_header = false;
    if (manifest.lead64) {
        std::printf("\n%-24s %8s %8s %8s %8s\n", "", "R-1", "R-2", "R-L", "R-LSum");
        rouge_header = true;
        print_rouge_row("LEAD-64", *manifest.lead64);
    }
    for (const parc::CellResult& cell : manifest.cells) {
        if (cell.rouge) {
            if (!rouge_header) {
                std::printf("\n%-24s %8s %8s %8s %8s\n", "", "R-1", "R-2", "R-L", "R-LSum");
                rouge_header = true;
            }
            print_rouge_row(cell.template_id + " k=" + std::to_string(cell.k), *cell.rouge);
        }
    }
    for (const parc::CellResult& cell : manifest.cells) {
        if (cell.rouge) continue;
        std::printf("\n== template %s k=%d ==\n", cell.template_id.c_str(), cell.k);
        if (cell.failed) {
            std::printf("FAILED: %s\n", cell.error.c_str());
            continue;
        }
        if (cell.classification) {
            print_classification_cell(cell);
        } else {
            std::printf("(no report: dry run)\n");
        }
    }
    if (!manifest.delta_table.empty()) {
        std::printf("\ndelta vs zero-shot (macro F1):\n");
        std::printf("%-24s %4s %8s %8s\n", "template", "k", "F1", "dF1");
        for (const parc::DeltaRow& row : manifest.delta_table) {
            std::printf("%-24s %4d %8.2f %+8.2f\n", row.template_id.c_str(), row.k, row.f1,
                        row.delta_display);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-lingual retrieval-augmented prompting toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    bool dry_run = false;
    long long limit = -1;

    auto add_config_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file")->required();
        cmd->add_option("--override", overrides,
                        "dotted-path config override, e.g. limits.parallelism=4");
    };

    CLI::App* embed_cmd = app.add_subcommand("embed-pool", "embed a pool and write a pool cache");
    std::string pool_in;
    std::string out_path;
    add_config_flags(embed_cmd);
    embed_cmd->add_option("--pool", pool_in, "pool file (defaults to config pool_path)");
    embed_cmd->add_option("--out", out_path, "output pool cache path")->required();

    CLI::App* selfpred_cmd =
        app.add_subcommand("self-predict", "label a pool by zero-shot self-prediction");
    std::string selfpred_template;
    add_config_flags(selfpred_cmd);
    selfpred_cmd->add_option("--pool", pool_in, "pool file (defaults to config pool_path)");
    selfpred_cmd->add_option("--template", selfpred_template,
                             "template id (defaults to config self_prediction.template_id)");
    selfpred_cmd->add_option("--out", out_path, "output pool cache path")->required();

    CLI::App* run_cmd = app.add_subcommand("run", "run an experiment end to end");
    add_config_flags(run_cmd);
    run_cmd->add_flag("--dry-run", dry_run, "render prompts, call no backend");
    run_cmd->add_option("--limit", limit, "evaluate only the first N examples");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run all cells and emit the delta table");
    add_config_flags(sweep_cmd);
    sweep_cmd->add_option("--limit", limit, "evaluate only the first N examples");

    CLI::App* report_cmd = app.add_subcommand("report", "pretty-print a manifest");
    std::string manifest_path;
    report_cmd->add_option("manifest", manifest_path, "manifest file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (limit >= 0) {
            overrides.push_back("limits.max_examples=" + std::to_string(limit));
        }

        if (report_cmd->parsed()) {
            print_manifest(parc::read_report(manifest_path));
            return 0;
        }

        parc::ExperimentConfig config = parc::load_config(config_path, overrides);

        if (embed_cmd->parsed()) {
            if (!config.embedding) {
                throw parc::Error(parc::ErrorCode::ConstraintViolation,
                                  "embed-pool needs an embedding backend in the config");
            }
            std::string source = !pool_in.empty()
                                     ? pool_in
                                     : config.pool_path.value_or("");
            if (source.empty()) {
                throw parc::Error(parc::ErrorCode::ConstraintViolation,
                                  "no pool file given (--pool or config pool_path)");
            }
            parc::Backend backend(*config.embedding, config.seed);
            parc::SentencePool pool =
                parc::embed_pool_file(source, backend, config.effective_cache_dir());
            parc::save_pool(pool, out_path);
            std::printf("embedded %zu/%zu entries -> %s\n", pool.embedded_count(), pool.size(),
                        out_path.c_str());
            return 0;
        }

        if (selfpred_cmd->parsed()) {
            std::string source = !pool_in.empty() ? pool_in : config.pool_path.value_or("");
            if (source.empty()) {
                throw parc::Error(parc::ErrorCode::ConstraintViolation,
                                  "no pool file given (--pool or config pool_path)");
            }
            std::string template_id = !selfpred_template.empty()
                                          ? selfpred_template
                                          : config.self_prediction.template_id;
            if (template_id.empty()) {
                throw parc::Error(parc::ErrorCode::ConstraintViolation,
                                  "no template id given (--template or self_prediction config)");
            }
            parc::TemplateRegistry registry =
                parc::load_template_registry(config.template_registry);
            const parc::PromptTemplate& t = registry.require(template_id);
            const auto& descriptor =
                t.style == parc::TemplateStyle::masked ? config.fill_mask : config.generation;
            if (!descriptor) {
                throw parc::Error(parc::ErrorCode::ConstraintViolation,
                                  "no backend configured for template style");
            }
            parc::Backend backend(*descriptor, config.seed);
            parc::SentencePool pool = parc::runner_detail::load_any_pool(
                source, config.embedding ? config.embedding->embedding_dim : 768);
            parc::RenderContext ctx;
            if (!config.target_lang.empty()) ctx.target_lang = config.target_lang;
            parc::SentencePool labeled =
                parc::self_predict_labels(pool, backend, t, config.label_options,
                                          config.self_prediction.fallback_label, ctx);
            parc::save_pool(labeled, out_path);
            std::printf("labeled %zu entries -> %s\n", labeled.size(), out_path.c_str());
            return 0;
        }

        parc::RunManifest manifest;
        if (run_cmd->parsed()) {
            parc::RunOptions opts;
            opts.dry_run = dry_run;
            manifest = parc::run_experiment(config, opts);
        } else {
            manifest = parc::sweep(config);
        }
        std::printf("manifest: %s/manifest-%s.json%s\n", config.output_dir.c_str(),
                    manifest.config_hash.c_str(), manifest.incomplete ? " (incomplete)" : "");
        return manifest.incomplete ? 2 : 0;
    } catch (const parc::Error& error) {
        std::cerr << "error: " << error.what() << "\n";
        return exit_code_for(error);
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
}
