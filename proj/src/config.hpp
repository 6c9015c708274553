#pragma once

#include "backend.hpp"
#include "threshold.hpp"
#include "types.hpp"

#include <string>
#include <vector>

namespace down {

struct BackendSpec {
    std::string tag;
    std::string type;  // "scripted" | "openai"
    // scripted
    std::string script_path;
    // openai
    std::string base_url;
    std::string model;
    std::string api_key_env;
    int max_retries = 3;
    int retry_backoff_ms = 250;
    int timeout_sec = 120;
};

// Everything a run needs: protocol knobs, threshold-selection parameters,
// backend definitions, and the per-agent-slot pool.
struct EngineConfig {
    RunConfig run;
    SelectionConfig selection;
    std::vector<double> candidate_thresholds{0.7, 0.8, 0.9};
    std::vector<BackendSpec> backends;
    std::vector<std::string> agent_pool;  // backend tags, one per agent slot

    // Normalizes the pool (defaults to the first backend on every slot) and
    // validates invariants. Throws Error{config} on any problem.
    void validate_and_fill();
};

EngineConfig engine_config_from_json(const std::string& text, const std::string& base_dir = "");
EngineConfig engine_config_from_file(const std::string& path);

// Applies a single "key=value"-style override (CLI flags and env vars).
// Accepted keys: threshold, seed, aggregation, confidence_source, backend,
// max_inflight, temperature, max_tokens, num_agents, mixed_agents.
void apply_config_override(EngineConfig& cfg, const std::string& key, const std::string& value);

} // namespace down
