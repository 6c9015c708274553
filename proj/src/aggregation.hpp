#pragma once

#include "backend.hpp"
#include "types.hpp"

#include <span>
#include <string>
#include <utility>

namespace down {

// Most frequent normalized answer. Ties break toward the answer with the
// highest max-confidence supporter, then the lowest supporting agent index,
// then the earliest call. Always returns an answer present in the input.
std::string majority_vote(std::span<const AgentResponse> responses);

struct JudgeOutcome {
    std::string final_answer;
    AgentResponse judge_response;
    bool fell_back_to_vote = false;  // judge output was unparseable
};

// One judge call over the final-round responses. The judge's answer is
// authoritative; an unparseable judge output falls back to majority_vote.
JudgeOutcome judge_decide(const Query& query, std::span<const AgentResponse> responses,
                          Backend& judge_backend, const RunConfig& cfg, int agent_id, int round,
                          int call_index);

} // namespace down
