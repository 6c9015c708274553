// Command-line front end. Everything goes through the C API in down.h; the
// core library is only reached via libdown.

#include "down.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

using nlohmann::json;

struct EngineHandle {
    down_engine* ptr = nullptr;
    ~EngineHandle() { down_engine_close(ptr); }
};
struct DatasetHandle {
    down_dataset* ptr = nullptr;
    ~DatasetHandle() { down_dataset_close(ptr); }
};
struct BatchHandle {
    down_batch* ptr = nullptr;
    ~BatchHandle() { down_batch_close(ptr); }
};
struct CStr {
    char* ptr = nullptr;
    ~CStr() { down_free(ptr); }
};

int report(down_status status) {
    std::cerr << "error: " << down_last_error() << "\n";
    return static_cast<int>(status);
}

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << content;
    return static_cast<bool>(out);
}

// Precedence: CLI flag > environment variable > config file > default.
// Environment values are applied first so explicit flags can overwrite them.
int apply_overrides(down_engine* engine, const CLI::App& cmd,
                    const std::optional<double>& threshold,
                    const std::optional<long long>& seed, const std::string& aggregation,
                    const std::string& backend, const std::optional<int>& max_inflight) {
    struct EnvKey {
        const char* env;
        const char* key;
    };
    static const EnvKey env_keys[] = {
        {"DOWN_THRESHOLD", "threshold"},
        {"DOWN_SEED", "seed"},
        {"DOWN_AGGREGATION", "aggregation"},
    };
    for (const auto& [env, key] : env_keys) {
        if (const char* value = std::getenv(env); value && *value) {
            if (const auto st = down_engine_set(engine, key, value); st != DOWN_OK) {
                return report(st);
            }
        }
    }
    const auto set_if = [&](const char* flag, const char* key, const std::string& value) -> int {
        if (cmd.count(flag) == 0) return 0;
        if (const auto st = down_engine_set(engine, key, value.c_str()); st != DOWN_OK) {
            return report(st);
        }
        return 0;
    };
    if (threshold) {
        if (int rc = set_if("--threshold", "threshold", std::to_string(*threshold))) return rc;
    }
    if (seed) {
        if (int rc = set_if("--seed", "seed", std::to_string(*seed))) return rc;
    }
    if (!aggregation.empty()) {
        if (int rc = set_if("--aggregation", "aggregation", aggregation)) return rc;
    }
    if (!backend.empty()) {
        if (int rc = set_if("--backend", "backend", backend)) return rc;
    }
    if (max_inflight) {
        if (int rc = set_if("--max-inflight", "max_inflight", std::to_string(*max_inflight))) {
            return rc;
        }
    }
    return 0;
}

std::string metrics_path_for(const std::string& out_path) {
    std::filesystem::path p(out_path);
    p.replace_extension(".metrics.json");
    return p.string();
}

std::string format_selection(const std::string& result_json) {
    const json j = json::parse(result_json);
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%8s %10s %10s %10s %10s\n", "theta", "acc", "skip",
                  "penalty", "score");
    out += line;
    for (const auto& sc : j["scores"]) {
        std::snprintf(line, sizeof(line), "%8.3f %10.4f %10.4f %10.4f %10.4f\n",
                      sc["theta"].get<double>(), sc["accuracy"].get<double>(),
                      sc["skip_rate"].get<double>(), sc["penalty"].get<double>(),
                      sc["score"].get<double>());
        out += line;
    }
    std::snprintf(line, sizeof(line), "theta* = %.3f\n", j["theta_star"].get<double>());
    out += line;
    return out;
}

std::string format_shift(const std::string& report_json) {
    const json j = json::parse(report_json);
    if (j["changed"].get<long long>() == 0) {
        return "no changes: every final answer matches its initial answer\n";
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "changed answers:     %lld\n"
                  "correct->incorrect:  %lld (%.2f%%)\n"
                  "incorrect->correct:  %lld (%.2f%%)\n",
                  j["changed"].get<long long>(), j["correct_to_incorrect"].get<long long>(),
                  j["pct_c2i"].get<double>(), j["incorrect_to_correct"].get<long long>(),
                  j["pct_i2c"].get<double>());
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive multiagent debate runner"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(down_version()));

    std::string config_path, dataset_path, protocol, out_path, aggregation, backend_tag;
    std::string stats_path, transcripts_path;
    std::optional<double> threshold;
    std::optional<long long> seed;
    std::optional<int> max_inflight;

    auto* run = app.add_subcommand("run", "run a protocol over a dataset and report metrics");
    run->add_option("--config", config_path, "engine config JSON")->required();
    run->add_option("--dataset", dataset_path, "dataset JSONL")->required();
    run->add_option("--protocol", protocol,
                    "down|single-cot|self-refine|self-consistency|debate|mad|"
                    "conditional:debate|conditional:mad")
        ->required();
    run->add_option("--out", out_path, "transcripts JSONL output path")->required();
    run->add_option("--threshold", threshold, "engagement gate threshold");
    run->add_option("--seed", seed, "run seed");
    run->add_option("--aggregation", aggregation, "vote|judge");
    run->add_option("--backend", backend_tag, "use this backend tag on every agent slot");
    run->add_option("--max-inflight", max_inflight, "parallel query cap");

    auto* select =
        app.add_subcommand("select-threshold", "score candidate thresholds and pick theta*");
    select->add_option("--config", config_path, "engine config JSON")->required();
    select->add_option("--dataset", dataset_path, "dataset JSONL (sweeps candidates)");
    select->add_option("--stats", stats_path, "precomputed stats JSON [{theta,k,m,N},...]");
    select->add_option("--out", out_path, "write selection result JSON here");
    select->add_option("--threshold", threshold, "engagement gate threshold");
    select->add_option("--seed", seed, "run seed");
    select->add_option("--aggregation", aggregation, "vote|judge");
    select->add_option("--backend", backend_tag, "use this backend tag on every agent slot");
    select->add_option("--max-inflight", max_inflight, "parallel query cap");

    auto* shift = app.add_subcommand("shift", "response-shift analysis of saved transcripts");
    shift->add_option("--transcripts", transcripts_path, "transcripts JSONL")->required();
    shift->add_option("--dataset", dataset_path, "dataset JSONL")->required();
    shift->add_option("--out", out_path, "write report JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : DOWN_ERR_CONFIG;
    }

    if (shift->parsed()) {
        CStr report_json;
        if (const auto st = down_shift_report(transcripts_path.c_str(), dataset_path.c_str(),
                                              &report_json.ptr);
            st != DOWN_OK) {
            return report(st);
        }
        std::cout << format_shift(report_json.ptr);
        if (!out_path.empty() && !write_file(out_path, report_json.ptr)) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return DOWN_ERR_IO;
        }
        return 0;
    }

    EngineHandle engine;
    if (const auto st = down_engine_open(config_path.c_str(), &engine.ptr); st != DOWN_OK) {
        return report(st);
    }
    const CLI::App& cmd = run->parsed() ? *run : *select;
    if (int rc = apply_overrides(engine.ptr, cmd, threshold, seed, aggregation, backend_tag,
                                 max_inflight)) {
        return rc;
    }

    if (run->parsed()) {
        DatasetHandle dataset;
        if (const auto st = down_dataset_open(dataset_path.c_str(), &dataset.ptr); st != DOWN_OK) {
            return report(st);
        }
        BatchHandle batch;
        if (const auto st = down_run(engine.ptr, dataset.ptr, protocol.c_str(), &batch.ptr);
            st != DOWN_OK) {
            return report(st);
        }
        CStr transcripts, metrics_json, table;
        if (const auto st = down_batch_transcripts_jsonl(batch.ptr, &transcripts.ptr);
            st != DOWN_OK) {
            return report(st);
        }
        if (const auto st = down_batch_metrics_json(batch.ptr, &metrics_json.ptr); st != DOWN_OK) {
            return report(st);
        }
        if (const auto st = down_batch_metrics_table(batch.ptr, &table.ptr); st != DOWN_OK) {
            return report(st);
        }
        if (!write_file(out_path, transcripts.ptr)) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return DOWN_ERR_IO;
        }
        const std::string metrics_path = metrics_path_for(out_path);
        if (!write_file(metrics_path, metrics_json.ptr)) {
            std::cerr << "error: cannot write " << metrics_path << "\n";
            return DOWN_ERR_IO;
        }
        std::cout << table.ptr;
        return 0;
    }

    // select-threshold
    std::string stats_json;
    if (!stats_path.empty()) {
        std::ifstream in(stats_path);
        if (!in) {
            std::cerr << "error: cannot open stats file " << stats_path << "\n";
            return DOWN_ERR_IO;
        }
        stats_json.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } else if (!dataset_path.empty()) {
        DatasetHandle dataset;
        if (const auto st = down_dataset_open(dataset_path.c_str(), &dataset.ptr); st != DOWN_OK) {
            return report(st);
        }
        CStr swept;
        if (const auto st = down_sweep(engine.ptr, dataset.ptr, &swept.ptr); st != DOWN_OK) {
            return report(st);
        }
        stats_json = swept.ptr;
    } else {
        std::cerr << "error: select-threshold needs --dataset or --stats\n";
        return DOWN_ERR_CONFIG;
    }

    CStr result;
    if (const auto st = down_select_threshold(engine.ptr, stats_json.c_str(), &result.ptr);
        st != DOWN_OK) {
        return report(st);
    }
    std::cout << format_selection(result.ptr);
    if (!out_path.empty() && !write_file(out_path, result.ptr)) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return DOWN_ERR_IO;
    }
    return 0;
}
