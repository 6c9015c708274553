#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace down {

// One benchmark item.
struct Query {
    std::string id;
    std::string text;
    std::optional<std::vector<std::string>> choices;
    std::optional<std::string> gold;
};

// One model turn. `answer` is always the normalized form of whatever was
// extracted from `raw_text`; `call_index` is the turn's position in the
// query's call sequence (1-based).
struct AgentResponse {
    int agent_id = 1;
    int round = 1;
    std::string reason;
    std::string answer;
    double confidence = 0.0;
    std::string raw_text;
    int call_index = 1;
};

enum class Aggregation { vote, judge };
enum class ConfidenceSource { token_prob, verbalized };

std::string to_string(Aggregation a);
std::string to_string(ConfidenceSource s);
Aggregation aggregation_from_string(const std::string& s);
ConfidenceSource confidence_source_from_string(const std::string& s);

struct RunConfig {
    int num_agents = 3;
    int num_rounds = 2;
    double threshold = 0.8;
    Aggregation aggregation = Aggregation::vote;
    double temperature = 0.0;
    int max_tokens = 512;
    ConfidenceSource confidence_source = ConfidenceSource::verbalized;
    bool mixed_agents = false;
    uint64_t seed = 0;

    // Baseline budgets / knobs.
    int self_refine_calls = 6;
    int self_consistency_samples = 9;
    // The global temperature is 0.0; self-consistency needs sample diversity,
    // so it gets its own knob.
    double self_consistency_temperature = 0.7;
    int mad_max_iterations = 3;

    int max_inflight = 4;
};

// Full per-query record of a protocol run. `responses` is grouped by round;
// a judge turn, when taken, is recorded separately in `judge_response` and
// contributes 1 to `agent_calls`.
struct Transcript {
    std::string query_id;
    std::string protocol;
    bool skipped = false;
    std::optional<double> threshold_used;
    std::vector<std::vector<AgentResponse>> responses;
    std::optional<AgentResponse> judge_response;
    bool judge_fallback = false;
    std::string final_answer;
    int agent_calls = 0;
    uint64_t seed = 0;
    std::optional<std::string> failure;

    bool failed() const { return failure.has_value(); }

    // Round-1 answer of the initial agent (call_index 1), empty if none.
    const AgentResponse* initial_response() const;
};

// JSONL round-trip. One JSON object per transcript line.
std::string transcript_to_json(const Transcript& t);
Transcript transcript_from_json(const std::string& line);

std::string query_to_json(const Query& q);
Query query_from_json(const std::string& line);

} // namespace down
