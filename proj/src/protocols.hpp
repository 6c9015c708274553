#pragma once

#include "backend.hpp"
#include "types.hpp"

#include <span>
#include <string>

namespace down {

enum class InnerProtocol { debate, mad };

// Protocol identifiers as they appear in transcripts and on the CLI.
inline constexpr const char* kProtocolDown = "down";
inline constexpr const char* kProtocolSingleCot = "single-cot";
inline constexpr const char* kProtocolSelfRefine = "self-refine";
inline constexpr const char* kProtocolSelfConsistency = "self-consistency";
inline constexpr const char* kProtocolDebate = "debate";
inline constexpr const char* kProtocolMad = "mad";
inline constexpr const char* kProtocolConditionalDebate = "conditional:debate";
inline constexpr const char* kProtocolConditionalMad = "conditional:mad";

// The adaptive pipeline: initial response with confidence, engagement gate,
// two confidence-guided debate rounds, vote or judge finalization.
// agents[0] produces the initial response.
Transcript run_down(const Query& query, std::span<Backend* const> agents, const RunConfig& cfg,
                    uint64_t seed);

Transcript run_single_cot(const Query& query, Backend& agent, const RunConfig& cfg,
                          uint64_t seed);

// Initial answer plus (self_refine_calls - 1) sequential self-feedback turns.
Transcript run_self_refine(const Query& query, Backend& agent, const RunConfig& cfg,
                           uint64_t seed);

// self_consistency_samples independent samples, majority vote.
Transcript run_self_consistency(const Query& query, Backend& agent, const RunConfig& cfg,
                                uint64_t seed);

// Full debate baseline: every agent answers each round, seeing the other
// agents' previous-round responses (without confidence scores).
Transcript run_debate(const Query& query, std::span<Backend* const> agents, const RunConfig& cfg,
                      uint64_t seed);

// Affirmative/negative debaters plus a moderator who decides or continues,
// capped at mad_max_iterations.
Transcript run_mad(const Query& query, std::span<Backend* const> agents, const RunConfig& cfg,
                   uint64_t seed);

// The engagement gate applied in front of an existing debate protocol.
Transcript run_conditional(InnerProtocol inner, const Query& query,
                           std::span<Backend* const> agents, const RunConfig& cfg, uint64_t seed);

// Step 1 in isolation, for sweeps that cache initial responses across
// threshold candidates.
AgentResponse run_initial_turn(const Query& query, Backend& agent, const RunConfig& cfg);

// The debate continuation of run_down given an already-generated initial
// response (gate already decided). Returns a non-skipped transcript.
Transcript run_down_continuation(const Query& query, std::span<Backend* const> agents,
                                 const RunConfig& cfg, uint64_t seed,
                                 const AgentResponse& initial);

} // namespace down
