#include "config.hpp"

#include "errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace down {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

RunConfig run_config_from_json(const json& j) {
    RunConfig cfg;
    read_if(j, "num_agents", cfg.num_agents);
    read_if(j, "num_rounds", cfg.num_rounds);
    read_if(j, "threshold", cfg.threshold);
    if (j.contains("aggregation")) {
        cfg.aggregation = aggregation_from_string(j["aggregation"].get<std::string>());
    }
    read_if(j, "temperature", cfg.temperature);
    read_if(j, "max_tokens", cfg.max_tokens);
    if (j.contains("confidence_source")) {
        cfg.confidence_source =
            confidence_source_from_string(j["confidence_source"].get<std::string>());
    }
    read_if(j, "mixed_agents", cfg.mixed_agents);
    read_if(j, "seed", cfg.seed);
    read_if(j, "self_refine_calls", cfg.self_refine_calls);
    read_if(j, "self_consistency_samples", cfg.self_consistency_samples);
    read_if(j, "self_consistency_temperature", cfg.self_consistency_temperature);
    read_if(j, "mad_max_iterations", cfg.mad_max_iterations);
    read_if(j, "max_inflight", cfg.max_inflight);
    return cfg;
}

BackendSpec backend_spec_from_json(const json& j, const std::string& base_dir) {
    BackendSpec spec;
    spec.tag = j.value("tag", "");
    spec.type = j.value("type", "");
    if (spec.tag.empty()) throw config_error("backend definition needs a 'tag'");
    if (spec.type == "scripted") {
        spec.script_path = j.value("script", "");
        if (spec.script_path.empty()) {
            throw config_error("scripted backend '" + spec.tag + "' needs a 'script' path");
        }
        if (!base_dir.empty() && fs::path(spec.script_path).is_relative()) {
            spec.script_path = (fs::path(base_dir) / spec.script_path).string();
        }
    } else if (spec.type == "openai") {
        spec.base_url = j.value("base_url", "");
        spec.model = j.value("model", "");
        spec.api_key_env = j.value("api_key_env", "");
        if (spec.base_url.empty() || spec.model.empty()) {
            throw config_error("openai backend '" + spec.tag + "' needs 'base_url' and 'model'");
        }
        read_if(j, "max_retries", spec.max_retries);
        read_if(j, "retry_backoff_ms", spec.retry_backoff_ms);
        read_if(j, "timeout_sec", spec.timeout_sec);
    } else {
        throw config_error("backend '" + spec.tag + "': unknown type '" + spec.type +
                           "' (expected scripted|openai)");
    }
    return spec;
}

} // namespace

void EngineConfig::validate_and_fill() {
    if (backends.empty()) throw config_error("no backends defined");
    for (const auto& b : backends) {
        const auto same_tag = std::count_if(backends.begin(), backends.end(),
                                            [&](const BackendSpec& o) { return o.tag == b.tag; });
        if (same_tag > 1) throw config_error("duplicate backend tag '" + b.tag + "'");
    }
    if (run.num_agents < 1) throw config_error("num_agents must be >= 1");
    if (run.num_rounds < 1) throw config_error("num_rounds must be >= 1");
    if (run.threshold < 0.0 || run.threshold > 1.0) {
        throw config_error("threshold must be in [0, 1]");
    }
    if (run.max_tokens < 1) throw config_error("max_tokens must be >= 1");
    if (run.temperature < 0.0) throw config_error("temperature must be >= 0");
    if (run.max_inflight < 1) throw config_error("max_inflight must be >= 1");
    if (selection.s_min < 0.0 || selection.s_min >= 0.5) {
        throw config_error("s_min must be in [0, 0.5)");
    }
    if (selection.lambda < 0.0) throw config_error("lambda must be >= 0");
    if (!(selection.epsilon > 0.0)) throw config_error("epsilon must be > 0");
    if (candidate_thresholds.empty()) throw config_error("candidate threshold set is empty");

    if (agent_pool.empty()) {
        agent_pool.assign(static_cast<size_t>(run.num_agents), backends.front().tag);
    }
    if (static_cast<int>(agent_pool.size()) != run.num_agents) {
        throw config_error("agent_pool size (" + std::to_string(agent_pool.size()) +
                           ") does not match num_agents (" + std::to_string(run.num_agents) + ")");
    }
    for (const auto& tag : agent_pool) {
        const bool known = std::any_of(backends.begin(), backends.end(),
                                       [&](const BackendSpec& b) { return b.tag == tag; });
        if (!known) throw config_error("agent_pool references unknown backend tag '" + tag + "'");
    }
}

EngineConfig engine_config_from_json(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    EngineConfig cfg;
    try {
        if (j.contains("run")) cfg.run = run_config_from_json(j["run"]);
        if (j.contains("selection")) {
            const json& s = j["selection"];
            read_if(s, "z", cfg.selection.z);
            read_if(s, "s_min", cfg.selection.s_min);
            read_if(s, "lambda", cfg.selection.lambda);
            read_if(s, "epsilon", cfg.selection.epsilon);
            read_if(s, "candidates", cfg.candidate_thresholds);
        }
        if (j.contains("backends")) {
            for (const auto& b : j["backends"]) {
                cfg.backends.push_back(backend_spec_from_json(b, base_dir));
            }
        }
        read_if(j, "agent_pool", cfg.agent_pool);
    } catch (const json::exception& e) {
        throw config_error(std::string("bad config structure: ") + e.what());
    }
    cfg.validate_and_fill();
    return cfg;
}

EngineConfig engine_config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return engine_config_from_json(buffer.str(), fs::path(path).parent_path().string());
}

void apply_config_override(EngineConfig& cfg, const std::string& key, const std::string& value) {
    const auto parse_double = [&](const std::string& what) {
        try {
            size_t pos = 0;
            const double v = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw config_error("override " + what + ": '" + value + "' is not a number");
        }
    };
    const auto parse_int = [&](const std::string& what) {
        try {
            size_t pos = 0;
            const long v = std::stol(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw config_error("override " + what + ": '" + value + "' is not an integer");
        }
    };

    if (key == "threshold") {
        cfg.run.threshold = parse_double(key);
    } else if (key == "seed") {
        cfg.run.seed = static_cast<uint64_t>(parse_int(key));
    } else if (key == "aggregation") {
        cfg.run.aggregation = aggregation_from_string(value);
    } else if (key == "confidence_source") {
        cfg.run.confidence_source = confidence_source_from_string(value);
    } else if (key == "backend") {
        cfg.agent_pool.assign(static_cast<size_t>(cfg.run.num_agents), value);
    } else if (key == "max_inflight") {
        cfg.run.max_inflight = static_cast<int>(parse_int(key));
    } else if (key == "temperature") {
        cfg.run.temperature = parse_double(key);
    } else if (key == "max_tokens") {
        cfg.run.max_tokens = static_cast<int>(parse_int(key));
    } else if (key == "num_agents") {
        cfg.run.num_agents = static_cast<int>(parse_int(key));
        cfg.agent_pool.clear();  // re-derived in validate_and_fill
    } else if (key == "mixed_agents") {
        if (value == "true" || value == "1") {
            cfg.run.mixed_agents = true;
        } else if (value == "false" || value == "0") {
            cfg.run.mixed_agents = false;
        } else {
            throw config_error("override mixed_agents: expected true|false");
        }
    } else {
        throw invalid_argument_error("unknown config override key '" + key + "'");
    }
    cfg.validate_and_fill();
}

} // namespace down
