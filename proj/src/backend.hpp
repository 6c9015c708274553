#pragma once

#include "confidence.hpp"
#include "types.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace down {

struct GenerationRequest {
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 512;
    bool want_token_probs = false;
    std::string agent_tag;

    // Turn identity, used by the scripted backend as its lookup key and
    // carried as metadata otherwise.
    std::string query_id;
    int agent_id = 1;
    int round = 1;
    std::string variant;  // initial | update | judge | refine | sample | affirmative | negative | moderator
};

struct GenerationResult {
    std::string text;
    std::optional<TokenProbSequence> token_probs;
    std::map<std::string, std::string> provider_meta;
};

enum class BackendErrorKind {
    transport,           // connection failure, 5xx — retryable
    rate_limit,          // 429 — retryable
    malformed_response,  // provider returned something unreadable
    missing_script,      // scripted backend has no entry for the key
    bad_request,         // provider rejected the request (other 4xx)
};

class BackendError : public std::runtime_error {
public:
    BackendError(BackendErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    BackendErrorKind kind() const { return kind_; }
    bool retryable() const {
        return kind_ == BackendErrorKind::transport || kind_ == BackendErrorKind::rate_limit;
    }

private:
    BackendErrorKind kind_;
};

// Generation contract. Implementations must be safe for concurrent generate
// calls.
class Backend {
public:
    virtual ~Backend() = default;
    virtual GenerationResult generate(const GenerationRequest& request) = 0;
    virtual const std::string& tag() const = 0;
};

// Deterministic test double: exact-match lookup over a JSONL script keyed by
// (query_id, agent_id, round, variant). Immutable after load.
class ScriptedBackend : public Backend {
public:
    ScriptedBackend(std::string tag, const std::string& script_path);

    GenerationResult generate(const GenerationRequest& request) override;
    const std::string& tag() const override { return tag_; }
    size_t size() const { return entries_.size(); }

private:
    struct Entry {
        std::string text;
        std::optional<TokenProbSequence> token_probs;
    };
    std::string tag_;
    std::map<std::string, Entry> entries_;
};

// OpenAI-compatible chat-completions client. POSTs to
// {base_url}/chat/completions and, when token probabilities are requested,
// converts choices[0].logprobs.content[*].logprob via exp().
struct OpenAIBackendConfig {
    std::string tag;
    std::string base_url;  // e.g. http://127.0.0.1:8080/v1
    std::string model;
    std::string api_key_env;  // name of the env var holding the key
    int max_retries = 3;
    int retry_backoff_ms = 250;
    int timeout_sec = 120;
};

class OpenAIBackend : public Backend {
public:
    explicit OpenAIBackend(OpenAIBackendConfig cfg);

    GenerationResult generate(const GenerationRequest& request) override;
    const std::string& tag() const override { return cfg_.tag; }

private:
    GenerationResult generate_once(const GenerationRequest& request);

    OpenAIBackendConfig cfg_;
    std::string host_;         // scheme://host[:port]
    std::string path_prefix_;  // e.g. /v1
};

// Index (1-based) of the agent that produces the initial response. Pure in
// (pool_size, query_id, seed, mixed); uniform over the pool when mixed.
int pick_initial_agent(int pool_size, const std::string& query_id, uint64_t seed, bool mixed);

} // namespace down
