#pragma once

#include "types.hpp"

#include <span>
#include <string>

namespace down {
namespace prompts {

// Canonical prompt templates. These are also stored verbatim under
// resources/prompts/ so tests can diff the two copies byte-for-byte.
extern const char* const kTopicPlaceholder;      // "[debate topic]"
extern const char* const kResponsesPlaceholder;  // "[agent responses]"
extern const char* const kInitialTemplate;
extern const char* const kInitialWithConfidenceTemplate;
extern const char* const kUpdateInstruction;
extern const char* const kJudgeTemplate;

// Question text plus a lettered options block when the query has choices.
std::string render_topic(const Query& query);

std::string render_initial_prompt(const Query& query, bool with_confidence);

// Peer responses are rendered in agent-index order, each with its confidence
// attached (2 decimal places) when with_confidence is set; the caller must
// exclude the receiving agent's own response.
std::string render_update_prompt(const Query& query, std::span<const AgentResponse> peers,
                                 bool with_confidence);

std::string render_judge_prompt(const Query& query, std::span<const AgentResponse> responses);

// Auxiliary prompts for the baselines (not part of the canonical template set).
std::string render_refine_prompt(const Query& query, const AgentResponse& own);
std::string render_mad_affirmative_prompt(const Query& query,
                                          std::span<const AgentResponse> history);
std::string render_mad_negative_prompt(const Query& query, const AgentResponse& affirmative,
                                       std::span<const AgentResponse> history);
std::string render_mad_moderator_prompt(const Query& query, const AgentResponse& affirmative,
                                        const AgentResponse& negative,
                                        std::span<const AgentResponse> history);

std::string format_confidence(double confidence);  // fixed 2 decimals

} // namespace prompts
} // namespace down
