#include "down.h"

#include "backend.hpp"
#include "config.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "threshold.hpp"
#include "types.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

using namespace down;

struct down_engine {
    std::unique_ptr<Engine> impl;
};

struct down_dataset {
    std::vector<Query> queries;
};

struct down_batch {
    std::vector<Transcript> transcripts;
    std::vector<Query> queries;  // copied so metrics survive dataset_close
};

namespace {

thread_local std::string g_last_error;

down_status status_from(const Error& e) {
    switch (e.kind()) {
        case Error::Kind::invalid_argument: return DOWN_ERR_INVALID_ARGUMENT;
        case Error::Kind::config: return DOWN_ERR_CONFIG;
        case Error::Kind::dataset: return DOWN_ERR_DATASET;
        case Error::Kind::backend: return DOWN_ERR_BACKEND;
        case Error::Kind::parse: return DOWN_ERR_PARSE;
        case Error::Kind::io: return DOWN_ERR_IO;
        case Error::Kind::internal: break;
    }
    return DOWN_ERR_INTERNAL;
}

down_status fail(down_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Runs `fn` and maps the library's exception hierarchy onto status codes.
template <typename Fn>
down_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        return fail(status_from(e), e.what());
    } catch (const BackendError& e) {
        return fail(DOWN_ERR_BACKEND, e.what());
    } catch (const std::bad_alloc&) {
        return fail(DOWN_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(DOWN_ERR_INTERNAL, e.what());
    }
}

down_status copy_out(const std::string& text, char** out) {
    if (!out) return fail(DOWN_ERR_INVALID_ARGUMENT, "null output pointer");
    char* buf = static_cast<char*>(::operator new(text.size() + 1, std::nothrow));
    if (!buf) return fail(DOWN_ERR_INTERNAL, "out of memory");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
    return DOWN_OK;
}

} // namespace

extern "C" {

const char* down_version(void) { return "0.1.0"; }

const char* down_last_error(void) { return g_last_error.c_str(); }

void down_free(char* ptr) { ::operator delete(ptr); }

down_status down_engine_open(const char* config_path, down_engine** out) {
    if (!config_path || !out) return fail(DOWN_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto engine = std::make_unique<Engine>(engine_config_from_file(config_path));
        *out = new down_engine{std::move(engine)};
        return DOWN_OK;
    });
}

down_status down_engine_open_json(const char* config_json, down_engine** out) {
    if (!config_json || !out) return fail(DOWN_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto engine = std::make_unique<Engine>(engine_config_from_json(config_json));
        *out = new down_engine{std::move(engine)};
        return DOWN_OK;
    });
}

down_status down_engine_set(down_engine* engine, const char* key, const char* value) {
    if (!engine || !key || !value) return fail(DOWN_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        engine->impl->set_option(key, value);
        return DOWN_OK;
    });
}

down_status down_engine_config_json(const down_engine* engine, char** out) {
    if (!engine) return fail(DOWN_ERR_INVALID_ARGUMENT, "null engine");
    return guarded([&] {
        const EngineConfig& cfg = engine->impl->config();
        nlohmann::json j{
            {"run",
             {{"num_agents", cfg.run.num_agents},
              {"num_rounds", cfg.run.num_rounds},
              {"threshold", cfg.run.threshold},
              {"aggregation", to_string(cfg.run.aggregation)},
              {"temperature", cfg.run.temperature},
              {"max_tokens", cfg.run.max_tokens},
              {"confidence_source", to_string(cfg.run.confidence_source)},
              {"mixed_agents", cfg.run.mixed_agents},
              {"seed", cfg.run.seed},
              {"self_refine_calls", cfg.run.self_refine_calls},
              {"self_consistency_samples", cfg.run.self_consistency_samples},
              {"self_consistency_temperature", cfg.run.self_consistency_temperature},
              {"mad_max_iterations", cfg.run.mad_max_iterations},
              {"max_inflight", cfg.run.max_inflight}}},
            {"selection",
             {{"z", cfg.selection.z},
              {"s_min", cfg.selection.s_min},
              {"lambda", cfg.selection.lambda},
              {"epsilon", cfg.selection.epsilon},
              {"candidates", cfg.candidate_thresholds}}},
            {"agent_pool", cfg.agent_pool},
        };
        return copy_out(j.dump(), out);
    });
}

void down_engine_close(down_engine* engine) { delete engine; }

down_status down_dataset_open(const char* jsonl_path, down_dataset** out) {
    if (!jsonl_path || !out) return fail(DOWN_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto dataset = std::make_unique<down_dataset>();
        dataset->queries = load_dataset(jsonl_path);
        *out = dataset.release();
        return DOWN_OK;
    });
}

size_t down_dataset_size(const down_dataset* dataset) {
    return dataset ? dataset->queries.size() : 0;
}

void down_dataset_close(down_dataset* dataset) { delete dataset; }

down_status down_run(down_engine* engine, const down_dataset* dataset, const char* protocol,
                     down_batch** out) {
    if (!engine || !dataset || !protocol || !out) {
        return fail(DOWN_ERR_INVALID_ARGUMENT, "null argument");
    }
    return guarded([&] {
        auto batch = std::make_unique<down_batch>();
        batch->queries = dataset->queries;
        batch->transcripts = engine->impl->run_batch(dataset->queries, protocol);

        // Total wipe-out (e.g. endpoint down) surfaces as a backend error.
        if (!batch->transcripts.empty()) {
            const bool all_failed =
                std::all_of(batch->transcripts.begin(), batch->transcripts.end(),
                            [](const Transcript& t) { return t.failed(); });
            if (all_failed) {
                return fail(DOWN_ERR_BACKEND, "every query failed: " +
                                                  *batch->transcripts.front().failure);
            }
        }
        *out = batch.release();
        return DOWN_OK;
    });
}

down_status down_batch_transcripts_jsonl(const down_batch* batch, char** out) {
    if (!batch) return fail(DOWN_ERR_INVALID_ARGUMENT, "null batch");
    return guarded([&] { return copy_out(transcripts_to_jsonl(batch->transcripts), out); });
}

down_status down_batch_metrics_json(const down_batch* batch, char** out) {
    if (!batch) return fail(DOWN_ERR_INVALID_ARGUMENT, "null batch");
    return guarded(
        [&] { return copy_out(metrics_to_json(evaluate(batch->transcripts, batch->queries)), out); });
}

down_status down_batch_metrics_table(const down_batch* batch, char** out) {
    if (!batch) return fail(DOWN_ERR_INVALID_ARGUMENT, "null batch");
    return guarded(
        [&] { return copy_out(metrics_table(evaluate(batch->transcripts, batch->queries)), out); });
}

void down_batch_close(down_batch* batch) { delete batch; }

down_status down_sweep(down_engine* engine, const down_dataset* dataset, char** out) {
    if (!engine || !dataset) return fail(DOWN_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto stats = engine->impl->sweep_thresholds(
            dataset->queries, engine->impl->config().candidate_thresholds);
        return copy_out(threshold_stats_to_json(stats), out);
    });
}

down_status down_select_threshold(const down_engine* engine, const char* stats_json, char** out) {
    if (!engine || !stats_json) return fail(DOWN_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto stats = threshold_stats_from_json(stats_json);
        const auto result = select_threshold(stats, engine->impl->config().selection);
        return copy_out(selection_result_to_json(result), out);
    });
}

down_status down_shift_report(const char* transcripts_path, const char* dataset_path, char** out) {
    if (!transcripts_path || !dataset_path) {
        return fail(DOWN_ERR_INVALID_ARGUMENT, "null argument");
    }
    return guarded([&] {
        const auto transcripts = transcripts_from_jsonl_file(transcripts_path);
        const auto queries = load_dataset(dataset_path);
        return copy_out(shift_report_to_json(shift_analysis(transcripts, queries)), out);
    });
}

down_status down_wilson_lower_bound(int64_t k, int64_t n, double z, double* out) {
    if (!out) return fail(DOWN_ERR_INVALID_ARGUMENT, "null output pointer");
    return guarded([&] {
        *out = wilson_lower_bound(k, n, z);
        return DOWN_OK;
    });
}

} // extern "C"
