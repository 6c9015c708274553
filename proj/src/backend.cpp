#include "backend.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include "httplib.h"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace down {

using nlohmann::json;

namespace {

std::string script_key(const std::string& query_id, int agent_id, int round,
                       const std::string& variant) {
    return query_id + "\x1f" + std::to_string(agent_id) + "\x1f" + std::to_string(round) +
           "\x1f" + variant;
}

std::string describe_key(const GenerationRequest& r) {
    return "(query_id=" + r.query_id + ", agent_id=" + std::to_string(r.agent_id) +
           ", round=" + std::to_string(r.round) + ", variant=" + r.variant + ")";
}

} // namespace

ScriptedBackend::ScriptedBackend(std::string tag, const std::string& script_path)
    : tag_(std::move(tag)) {
    std::ifstream in(script_path);
    if (!in) throw io_error("cannot open script file: " + script_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw parse_error("script " + script_path + " line " + std::to_string(line_no) +
                              ": " + e.what());
        }
        try {
            const auto key = script_key(j.at("query_id").get<std::string>(),
                                        j.at("agent_id").get<int>(), j.at("round").get<int>(),
                                        j.at("variant").get<std::string>());
            Entry entry;
            entry.text = j.at("text").get<std::string>();
            if (j.contains("token_probs") && !j["token_probs"].is_null()) {
                entry.token_probs = j["token_probs"].get<TokenProbSequence>();
                for (double p : *entry.token_probs) {
                    if (!(p > 0.0) || p > 1.0) {
                        throw parse_error("script " + script_path + " line " +
                                          std::to_string(line_no) +
                                          ": token_probs must lie in (0, 1]");
                    }
                }
            }
            entries_[key] = std::move(entry);
        } catch (const json::exception& e) {
            throw parse_error("script " + script_path + " line " + std::to_string(line_no) +
                              ": " + e.what());
        }
    }
}

GenerationResult ScriptedBackend::generate(const GenerationRequest& request) {
    const auto it =
        entries_.find(script_key(request.query_id, request.agent_id, request.round, request.variant));
    if (it == entries_.end()) {
        throw BackendError(BackendErrorKind::missing_script,
                           "missing script entry " + describe_key(request));
    }
    GenerationResult result;
    result.text = it->second.text;
    if (request.want_token_probs) result.token_probs = it->second.token_probs;
    result.provider_meta["backend"] = "scripted";
    return result;
}

OpenAIBackend::OpenAIBackend(OpenAIBackendConfig cfg) : cfg_(std::move(cfg)) {
    // Split base_url into scheme://host[:port] and a path prefix.
    const auto scheme_end = cfg_.base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw config_error("backend '" + cfg_.tag + "': base_url must start with http://");
    }
    const auto path_start = cfg_.base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host_ = cfg_.base_url;
    } else {
        host_ = cfg_.base_url.substr(0, path_start);
        path_prefix_ = cfg_.base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
    if (host_.rfind("https://", 0) == 0) {
        throw config_error("backend '" + cfg_.tag + "': https endpoints are not supported in "
                           "this build; use an http endpoint or a local proxy");
    }
}

GenerationResult OpenAIBackend::generate(const GenerationRequest& request) {
    int attempt = 0;
    for (;;) {
        try {
            return generate_once(request);
        } catch (const BackendError& e) {
            if (!e.retryable() || attempt >= cfg_.max_retries) throw;
            const auto delay = std::chrono::milliseconds(cfg_.retry_backoff_ms << attempt);
            std::this_thread::sleep_for(delay);
            ++attempt;
        }
    }
}

GenerationResult OpenAIBackend::generate_once(const GenerationRequest& request) {
    json body{
        {"model", cfg_.model},
        {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    if (request.want_token_probs) body["logprobs"] = true;

    httplib::Client client(host_);
    client.set_connection_timeout(cfg_.timeout_sec);
    client.set_read_timeout(cfg_.timeout_sec);
    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    const auto res = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                                 "application/json");
    if (!res) {
        throw BackendError(BackendErrorKind::transport,
                           "backend '" + cfg_.tag + "': connection to " + host_ +
                               " failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 429) {
        throw BackendError(BackendErrorKind::rate_limit,
                           "backend '" + cfg_.tag + "': rate limited (429)");
    }
    if (res->status >= 500) {
        throw BackendError(BackendErrorKind::transport, "backend '" + cfg_.tag + "': server error " +
                                                            std::to_string(res->status));
    }
    if (res->status != 200) {
        throw BackendError(BackendErrorKind::bad_request,
                           "backend '" + cfg_.tag + "': HTTP " + std::to_string(res->status) +
                               ": " + res->body);
    }

    json parsed;
    try {
        parsed = json::parse(res->body);
    } catch (const json::exception& e) {
        throw BackendError(BackendErrorKind::malformed_response,
                           "backend '" + cfg_.tag + "': non-JSON response: " + e.what());
    }

    GenerationResult result;
    try {
        const json& choice = parsed.at("choices").at(0);
        result.text = choice.at("message").at("content").get<std::string>();
        if (request.want_token_probs && choice.contains("logprobs") &&
            !choice["logprobs"].is_null() && choice["logprobs"].contains("content")) {
            TokenProbSequence probs;
            for (const auto& tok : choice["logprobs"]["content"]) {
                // Providers occasionally emit slightly positive logprobs from
                // float noise; cap the probability at 1.
                probs.push_back(std::min(std::exp(tok.at("logprob").get<double>()), 1.0));
            }
            if (!probs.empty()) result.token_probs = std::move(probs);
        }
        if (parsed.contains("model") && parsed["model"].is_string()) {
            result.provider_meta["model"] = parsed["model"].get<std::string>();
        }
        if (parsed.contains("id") && parsed["id"].is_string()) {
            result.provider_meta["id"] = parsed["id"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw BackendError(BackendErrorKind::malformed_response,
                           "backend '" + cfg_.tag + "': unexpected response shape: " + e.what());
    }
    return result;
}

int pick_initial_agent(int pool_size, const std::string& query_id, uint64_t seed, bool mixed) {
    if (pool_size < 1) throw invalid_argument_error("pick_initial_agent: empty pool");
    if (!mixed) return 1;
    uint64_t state = derive_seed(seed, query_id);
    const uint64_t draw = splitmix64(state);
    return 1 + static_cast<int>(bounded(draw, static_cast<uint64_t>(pool_size)));
}

} // namespace down
