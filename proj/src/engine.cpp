#include "engine.hpp"

#include "answer.hpp"
#include "confidence.hpp"
#include "errors.hpp"
#include "rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace down {

namespace {

std::unique_ptr<Backend> build_backend(const BackendSpec& spec) {
    if (spec.type == "scripted") {
        return std::make_unique<ScriptedBackend>(spec.tag, spec.script_path);
    }
    OpenAIBackendConfig cfg;
    cfg.tag = spec.tag;
    cfg.base_url = spec.base_url;
    cfg.model = spec.model;
    cfg.api_key_env = spec.api_key_env;
    cfg.max_retries = spec.max_retries;
    cfg.retry_backoff_ms = spec.retry_backoff_ms;
    cfg.timeout_sec = spec.timeout_sec;
    return std::make_unique<OpenAIBackend>(cfg);
}

// Runs `count` jobs on up to `parallelism` threads; exceptions are captured
// and rethrown on the caller thread after all workers join.
template <typename Job>
void parallel_for(size_t count, int parallelism, Job&& job) {
    const size_t workers =
        std::min<size_t>(std::max(parallelism, 1), std::max<size_t>(count, 1));
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

bool is_known_protocol(const std::string& protocol) {
    return protocol == kProtocolDown || protocol == kProtocolSingleCot ||
           protocol == kProtocolSelfRefine || protocol == kProtocolSelfConsistency ||
           protocol == kProtocolDebate || protocol == kProtocolMad ||
           protocol == kProtocolConditionalDebate || protocol == kProtocolConditionalMad;
}

Engine::Engine(EngineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate_and_fill();
    for (const auto& spec : cfg_.backends) {
        backends_.emplace(spec.tag, build_backend(spec));
    }
}

void Engine::set_option(const std::string& key, const std::string& value) {
    apply_config_override(cfg_, key, value);
}

Backend& Engine::backend_by_tag(const std::string& tag) const {
    const auto it = backends_.find(tag);
    if (it == backends_.end()) throw config_error("unknown backend tag '" + tag + "'");
    return *it->second;
}

std::vector<Backend*> Engine::agents_for(const Query& query) const {
    const auto& pool = cfg_.agent_pool;
    const int initial =
        pick_initial_agent(static_cast<int>(pool.size()), query.id, cfg_.run.seed,
                           cfg_.run.mixed_agents);
    std::vector<Backend*> agents;
    agents.reserve(pool.size());
    agents.push_back(&backend_by_tag(pool[static_cast<size_t>(initial - 1)]));
    for (size_t i = 0; i < pool.size(); ++i) {
        if (static_cast<int>(i) + 1 == initial) continue;
        agents.push_back(&backend_by_tag(pool[i]));
    }
    return agents;
}

Transcript Engine::run_query(const Query& query, const std::string& protocol) {
    const auto agents = agents_for(query);
    const uint64_t seed = derive_seed(cfg_.run.seed, query.id);
    const RunConfig& run = cfg_.run;
    if (protocol == kProtocolDown) return run_down(query, agents, run, seed);
    if (protocol == kProtocolSingleCot) return run_single_cot(query, *agents[0], run, seed);
    if (protocol == kProtocolSelfRefine) return run_self_refine(query, *agents[0], run, seed);
    if (protocol == kProtocolSelfConsistency) {
        return run_self_consistency(query, *agents[0], run, seed);
    }
    if (protocol == kProtocolDebate) return run_debate(query, agents, run, seed);
    if (protocol == kProtocolMad) return run_mad(query, agents, run, seed);
    if (protocol == kProtocolConditionalDebate) {
        return run_conditional(InnerProtocol::debate, query, agents, run, seed);
    }
    if (protocol == kProtocolConditionalMad) {
        return run_conditional(InnerProtocol::mad, query, agents, run, seed);
    }
    throw config_error("unknown protocol '" + protocol + "'");
}

std::vector<Transcript> Engine::run_batch(std::span<const Query> queries,
                                          const std::string& protocol) {
    if (!is_known_protocol(protocol)) throw config_error("unknown protocol '" + protocol + "'");
    std::vector<Transcript> out(queries.size());
    parallel_for(queries.size(), cfg_.run.max_inflight,
                 [&](size_t i) { out[i] = run_query(queries[i], protocol); });
    return out;
}

std::vector<ThresholdStats> Engine::sweep_thresholds(std::span<const Query> queries,
                                                     std::span<const double> thetas) {
    if (thetas.empty()) throw invalid_argument_error("sweep_thresholds: empty candidate set");
    if (queries.empty()) throw invalid_argument_error("sweep_thresholds: empty query set");

    struct PerQuery {
        bool ok = false;
        double confidence = 0.0;
        bool initial_correct = false;
        bool debate_correct = false;  // meaningful only when debate ran
        bool debate_ran = false;
    };
    std::vector<PerQuery> rows(queries.size());

    parallel_for(queries.size(), cfg_.run.max_inflight, [&](size_t i) {
        const Query& query = queries[i];
        if (!query.gold) throw dataset_error("query '" + query.id + "' has no gold answer");
        const std::string gold = normalize_answer(*query.gold, query.choices);
        const auto agents = agents_for(query);
        const uint64_t seed = derive_seed(cfg_.run.seed, query.id);

        PerQuery row;
        AgentResponse initial;
        try {
            initial = run_initial_turn(query, *agents[0], cfg_.run);
        } catch (const BackendError&) {
            rows[i] = row;  // dropped from all candidates
            return;
        }
        row.confidence = initial.confidence;
        row.initial_correct = initial.answer == gold;

        // The continuation is threshold-independent; generate it once iff any
        // candidate triggers debate for this query.
        const bool any_debate = std::any_of(thetas.begin(), thetas.end(), [&](double theta) {
            return should_debate(initial.confidence, theta);
        });
        if (any_debate) {
            const Transcript cont =
                run_down_continuation(query, agents, cfg_.run, seed, initial);
            if (cont.failed()) {
                rows[i] = row;
                return;
            }
            row.debate_ran = true;
            row.debate_correct = cont.final_answer == gold;
        }
        row.ok = true;
        rows[i] = row;
    });

    std::vector<ThresholdStats> stats;
    stats.reserve(thetas.size());
    const int64_t total = static_cast<int64_t>(
        std::count_if(rows.begin(), rows.end(), [](const PerQuery& r) { return r.ok; }));
    for (double theta : thetas) {
        ThresholdStats s;
        s.theta = theta;
        s.N = total;
        for (const auto& row : rows) {
            if (!row.ok) continue;
            const bool debate = should_debate(row.confidence, theta);
            if (!debate) ++s.m;
            const bool correct = debate ? row.debate_correct : row.initial_correct;
            if (correct) ++s.k;
        }
        stats.push_back(s);
    }
    return stats;
}

} // namespace down
