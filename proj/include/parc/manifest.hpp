#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parc/errors.hpp"
#include "parc/metrics.hpp"
#include "parc/prediction.hpp"
#include "parc/rouge.hpp"

namespace parc {

inline std::string format_2dec(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

struct RetrievedRef {
    std::string id;
    double similarity = 0.0;
};

// One scored example inside a (template, k) cell.
struct ExampleRecord {
    std::string example_id;
    std::vector<RetrievedRef> retrieved;
    std::string prompt_checksum;  // hex FNV-1a of the assembled prompt bytes
    bool prompt_truncated = false;
    std::string raw_output;
    std::optional<std::string> mapped_label;
    std::optional<ParseStatus> parse_status;
    std::optional<RougeScores> rouge;
    std::string error;  // transport failure detail; empty on success
};

struct ClassificationCellReport {
    ClassificationReport report;
    ConfusionMatrix matrix;
};

struct CellResult {
    std::string template_id;
    int k = 0;
    bool failed = false;
    std::string error;
    std::vector<ExampleRecord> examples;
    std::optional<ClassificationCellReport> classification;
    std::optional<RougeScores> rouge;  // mean over examples
};

// Full reproducibility ledger for one run: configuration identity, pool
// provenance, every per-example decision, and the final reports.
// (config, seed, mock backends) determine these bytes completely.
struct RunManifest {
    int schema_version = 1;
    std::string task;
    std::string config_hash;
    std::uint64_t seed = 0;
    nlohmann::json backends = nlohmann::json::object();
    std::optional<std::string> pool_checksum;
    std::string timestamp;
    bool incomplete = false;
    bool dry_run = false;
    std::vector<CellResult> cells;
    std::optional<RougeScores> lead64;
    std::vector<DeltaRow> delta_table;
};

namespace manifest_detail {

inline nlohmann::json rouge_to_json(const RougeScores& scores) {
    auto component = [](const RougeComponent& c) {
        return nlohmann::json{{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
    };
    return nlohmann::json{
        {"r1", component(scores.r1)},
        {"r2", component(scores.r2)},
        {"rl", component(scores.rl)},
        {"rlsum", component(scores.rlsum)},
        {"display",
         {{"r1", format_2dec(scores.r1.f1 * 100.0)},
          {"r2", format_2dec(scores.r2.f1 * 100.0)},
          {"rl", format_2dec(scores.rl.f1 * 100.0)},
          {"rlsum", format_2dec(scores.rlsum.f1 * 100.0)}}}};
}

inline RougeScores rouge_from_json(const nlohmann::json& doc) {
    auto component = [](const nlohmann::json& c) {
        return RougeComponent{c.at("precision").get<double>(), c.at("recall").get<double>(),
                              c.at("f1").get<double>()};
    };
    RougeScores scores;
    scores.r1 = component(doc.at("r1"));
    scores.r2 = component(doc.at("r2"));
    scores.rl = component(doc.at("rl"));
    scores.rlsum = component(doc.at("rlsum"));
    return scores;
}

inline nlohmann::json classification_to_json(const ClassificationCellReport& cell) {
    const ClassificationReport& r = cell.report;
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        per_class.push_back({{"label", r.labels[i]},
                             {"precision", r.per_class[i].precision},
                             {"recall", r.per_class[i].recall},
                             {"f1", r.per_class[i].f1},
                             {"support", r.per_class[i].support}});
    }
    auto avg = [](const AverageMetrics& a) {
        return nlohmann::json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
    };
    return nlohmann::json{
        {"labels", r.labels},
        {"per_class", per_class},
        {"accuracy", r.accuracy},
        {"macro_avg", avg(r.macro_avg)},
        {"weighted_avg", avg(r.weighted_avg)},
        {"confusion", {{"labels", cell.matrix.labels()}, {"rows", cell.matrix.counts()}}},
        {"display",
         {{"accuracy", format_2dec(r.accuracy)},
          {"macro_f1", format_2dec(r.macro_avg.f1)},
          {"weighted_f1", format_2dec(r.weighted_avg.f1)}}}};
}

inline ClassificationCellReport classification_from_json(const nlohmann::json& doc) {
    ClassificationCellReport cell;
    ClassificationReport& r = cell.report;
    r.labels = doc.at("labels").get<std::vector<std::string>>();
    for (const nlohmann::json& item : doc.at("per_class")) {
        PerClassMetrics m;
        m.precision = item.at("precision").get<double>();
        m.recall = item.at("recall").get<double>();
        m.f1 = item.at("f1").get<double>();
        m.support = item.at("support").get<std::size_t>();
        r.per_class.push_back(m);
    }
    r.accuracy = doc.at("accuracy").get<double>();
    auto avg = [](const nlohmann::json& a) {
        return AverageMetrics{a.at("precision").get<double>(), a.at("recall").get<double>(),
                              a.at("f1").get<double>()};
    };
    r.macro_avg = avg(doc.at("macro_avg"));
    r.weighted_avg = avg(doc.at("weighted_avg"));
    cell.matrix = ConfusionMatrix(
        doc.at("confusion").at("labels").get<std::vector<std::string>>(),
        doc.at("confusion").at("rows").get<std::vector<std::vector<std::size_t>>>());
    return cell;
}

inline nlohmann::json example_to_json(const ExampleRecord& record) {
    nlohmann::json retrieved = nlohmann::json::array();
    for (const RetrievedRef& ref : record.retrieved) {
        retrieved.push_back({{"id", ref.id}, {"similarity", ref.similarity}});
    }
    nlohmann::json doc{{"example_id", record.example_id},
                       {"retrieved", retrieved},
                       {"prompt_checksum", record.prompt_checksum},
                       {"prompt_truncated", record.prompt_truncated},
                       {"raw_output", record.raw_output}};
    if (record.mapped_label) doc["mapped_label"] = *record.mapped_label;
    if (record.parse_status) doc["parse_status"] = std::string(to_string(*record.parse_status));
    if (record.rouge) doc["rouge"] = rouge_to_json(*record.rouge);
    if (!record.error.empty()) doc["error"] = record.error;
    return doc;
}

inline ExampleRecord example_from_json(const nlohmann::json& doc) {
    ExampleRecord record;
    record.example_id = doc.at("example_id").get<std::string>();
    for (const nlohmann::json& item : doc.at("retrieved")) {
        record.retrieved.push_back(
            {item.at("id").get<std::string>(), item.at("similarity").get<double>()});
    }
    record.prompt_checksum = doc.at("prompt_checksum").get<std::string>();
    record.prompt_truncated = doc.value("prompt_truncated", false);
    record.raw_output = doc.value("raw_output", "");
    if (doc.contains("mapped_label")) record.mapped_label = doc["mapped_label"].get<std::string>();
    if (doc.contains("parse_status")) {
        record.parse_status = parse_status_from_string(doc["parse_status"].get<std::string>());
    }
    if (doc.contains("rouge")) record.rouge = rouge_from_json(doc["rouge"]);
    record.error = doc.value("error", "");
    return record;
}

inline nlohmann::json delta_row_to_json(const DeltaRow& row) {
    return nlohmann::json{{"template_id", row.template_id},
                          {"k", row.k},
                          {"f1", row.f1},
                          {"zero_shot_f1", row.zero_shot_f1},
                          {"delta", row.delta},
                          {"delta_display", row.delta_display}};
}

inline DeltaRow delta_row_from_json(const nlohmann::json& doc) {
    DeltaRow row;
    row.template_id = doc.at("template_id").get<std::string>();
    row.k = doc.at("k").get<int>();
    row.f1 = doc.at("f1").get<double>();
    row.zero_shot_f1 = doc.at("zero_shot_f1").get<double>();
    row.delta = doc.at("delta").get<double>();
    row.delta_display = doc.at("delta_display").get<double>();
    return row;
}

}  // namespace manifest_detail

inline nlohmann::json manifest_to_json(const RunManifest& manifest) {
    using namespace manifest_detail;
    nlohmann::json cells = nlohmann::json::array();
    for (const CellResult& cell : manifest.cells) {
        nlohmann::json examples = nlohmann::json::array();
        for (const ExampleRecord& record : cell.examples) {
            examples.push_back(example_to_json(record));
        }
        nlohmann::json doc{{"template_id", cell.template_id},
                           {"k", cell.k},
                           {"failed", cell.failed},
                           {"examples", examples}};
        if (!cell.error.empty()) doc["error"] = cell.error;
        if (cell.classification) doc["report"] = classification_to_json(*cell.classification);
        if (cell.rouge) doc["rouge"] = rouge_to_json(*cell.rouge);
        cells.push_back(std::move(doc));
    }
    nlohmann::json doc{{"schema_version", manifest.schema_version},
                       {"task", manifest.task},
                       {"config_hash", manifest.config_hash},
                       {"seed", manifest.seed},
                       {"backends", manifest.backends},
                       {"timestamp", manifest.timestamp},
                       {"incomplete", manifest.incomplete},
                       {"dry_run", manifest.dry_run},
                       {"cells", cells}};
    if (manifest.pool_checksum) doc["pool_checksum"] = *manifest.pool_checksum;
    if (manifest.lead64) doc["lead64"] = rouge_to_json(*manifest.lead64);
    if (!manifest.delta_table.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const DeltaRow& row : manifest.delta_table) rows.push_back(delta_row_to_json(row));
        doc["delta_table"] = rows;
    }
    return doc;
}

inline RunManifest manifest_from_json(const nlohmann::json& doc) {
    using namespace manifest_detail;
    RunManifest manifest;
    manifest.schema_version = doc.at("schema_version").get<int>();
    if (manifest.schema_version != 1) {
        throw Error(ErrorCode::SchemaError,
                    "unknown manifest schema version " + std::to_string(manifest.schema_version));
    }
    manifest.task = doc.at("task").get<std::string>();
    manifest.config_hash = doc.at("config_hash").get<std::string>();
    manifest.seed = doc.at("seed").get<std::uint64_t>();
    manifest.backends = doc.value("backends", nlohmann::json::object());
    if (doc.contains("pool_checksum")) {
        manifest.pool_checksum = doc["pool_checksum"].get<std::string>();
    }
    manifest.timestamp = doc.value("timestamp", "");
    manifest.incomplete = doc.value("incomplete", false);
    manifest.dry_run = doc.value("dry_run", false);
    for (const nlohmann::json& cell_doc : doc.at("cells")) {
        CellResult cell;
        cell.template_id = cell_doc.at("template_id").get<std::string>();
        cell.k = cell_doc.at("k").get<int>();
        cell.failed = cell_doc.value("failed", false);
        cell.error = cell_doc.value("error", "");
        for (const nlohmann::json& example : cell_doc.at("examples")) {
            cell.examples.push_back(example_from_json(example));
        }
        if (cell_doc.contains("report")) {
            cell.classification = classification_from_json(cell_doc["report"]);
        }
        if (cell_doc.contains("rouge")) cell.rouge = rouge_from_json(cell_doc["rouge"]);
        manifest.cells.push_back(std::move(cell));
    }
    if (doc.contains("lead64")) manifest.lead64 = rouge_from_json(doc["lead64"]);
    if (doc.contains("delta_table")) {
        for (const nlohmann::json& row : doc["delta_table"]) {
            manifest.delta_table.push_back(delta_row_from_json(row));
        }
    }
    return manifest;
}

inline bool operator==(const RunManifest& a, const RunManifest& b) {
    return manifest_to_json(a) == manifest_to_json(b);
}

// Report file names derive from the config hash, so reruns of one config
// overwrite their own report and never clobber a different configuration's.
inline std::string write_report(const RunManifest& manifest, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::string path =
        (std::filesystem::path(dir) / ("manifest-" + manifest.config_hash + ".json")).string();
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write report '" + path + "'");
    }
    out << manifest_to_json(manifest).dump(2) << '\n';
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
    }
    return path;
}

inline RunManifest read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open report '" + path + "'");
    }
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(ErrorCode::SchemaError, "report '" + path + "' is not valid JSON");
    }
    return manifest_from_json(doc);
}

}  // namespace parc
