#include "protocols.hpp"

#include "aggregation.hpp"
#include "answer.hpp"
#include "confidence.hpp"
#include "errors.hpp"
#include "model_output.hpp"
#include "prompts.hpp"

#include <optional>
#include <vector>

namespace down {

namespace {

// Shared per-run turn bookkeeping: executes one generation, parses it into
// an AgentResponse, and keeps the call counter honest (failed generations
// are not counted as recorded calls).
struct Run {
    const Query& query;
    const RunConfig& cfg;
    int calls_made = 0;

    AgentResponse turn(Backend& backend, std::string prompt, int agent_id, int round,
                       const std::string& variant,
                       std::optional<double> temperature_override = std::nullopt) {
        GenerationRequest request;
        request.prompt = std::move(prompt);
        request.temperature = temperature_override.value_or(cfg.temperature);
        request.max_tokens = cfg.max_tokens;
        request.want_token_probs = cfg.confidence_source == ConfidenceSource::token_prob;
        request.agent_tag = backend.tag();
        request.query_id = query.id;
        request.agent_id = agent_id;
        request.round = round;
        request.variant = variant;

        const GenerationResult gen = backend.generate(request);
        const ParsedOutput parsed = parse_model_output(gen.text);

        AgentResponse response;
        response.agent_id = agent_id;
        response.round = round;
        response.reason = parsed.reason;
        response.answer = resolve_answer(parsed, query.choices);
        response.confidence = resolve_confidence(cfg.confidence_source, gen.token_probs, gen.text);
        response.raw_text = gen.text;
        response.call_index = ++calls_made;
        return response;
    }
};

Transcript make_transcript(const Query& query, const char* protocol, uint64_t seed) {
    Transcript t;
    t.query_id = query.id;
    t.protocol = protocol;
    t.seed = seed;
    t.final_answer = kUnparseable;
    return t;
}

void finish_failed(Transcript& t, const Run& run, const BackendError& e) {
    t.failure = e.what();
    t.agent_calls = run.calls_made;
}

void require_agents(std::span<Backend* const> agents, const RunConfig& cfg, size_t minimum) {
    if (agents.size() < minimum) {
        throw invalid_argument_error("protocol requires at least " + std::to_string(minimum) +
                                     " agents");
    }
    if (static_cast<int>(agents.size()) != cfg.num_agents) {
        throw invalid_argument_error("agent list does not match cfg.num_agents");
    }
}

std::vector<AgentResponse> peers_excluding(const std::vector<AgentResponse>& round, int agent_id) {
    std::vector<AgentResponse> peers;
    peers.reserve(round.size());
    for (const auto& r : round) {
        if (r.agent_id != agent_id) peers.push_back(r);
    }
    return peers;
}

// Plain multiagent debate rounds. When `preset_initial` is given it stands in
// for agent 1's round-1 response (the conditional wrapper reuses the gate's
// initial response). Finalizes by majority vote over the last round. Rounds
// are recorded as they complete so a failed transcript keeps its partials.
void debate_rounds(Transcript& t, Run& run, std::span<Backend* const> agents,
                   const AgentResponse* preset_initial) {
    const auto& cfg = run.cfg;
    t.responses.emplace_back();
    if (preset_initial) t.responses.back().push_back(*preset_initial);
    for (size_t i = preset_initial ? 1 : 0; i < agents.size(); ++i) {
        const int agent_id = static_cast<int>(i) + 1;
        t.responses.back().push_back(run.turn(
            *agents[i], prompts::render_initial_prompt(run.query, false), agent_id, 1, "initial"));
    }

    for (int round = 2; round <= cfg.num_rounds; ++round) {
        const std::vector<AgentResponse> previous = t.responses.back();
        t.responses.emplace_back();
        for (size_t i = 0; i < agents.size(); ++i) {
            const int agent_id = static_cast<int>(i) + 1;
            const auto peers = peers_excluding(previous, agent_id);
            t.responses.back().push_back(
                run.turn(*agents[i], prompts::render_update_prompt(run.query, peers, false),
                         agent_id, round, "update"));
        }
    }
    t.final_answer = majority_vote(t.responses.back());
    t.agent_calls = run.calls_made;
}

// MAD iterations. `round_offset` shifts the recorded round numbers so the
// conditional wrapper can keep the gate's initial response as round 1.
void mad_iterations(Transcript& t, Run& run, std::span<Backend* const> agents, int round_offset) {
    const auto& cfg = run.cfg;
    std::vector<AgentResponse> history;
    for (int iter = 1; iter <= cfg.mad_max_iterations; ++iter) {
        const int round = iter + round_offset;
        t.responses.emplace_back();
        AgentResponse affirmative = run.turn(
            *agents[0], prompts::render_mad_affirmative_prompt(run.query, history), 1, round,
            "affirmative");
        t.responses.back().push_back(affirmative);
        AgentResponse negative = run.turn(
            *agents[1], prompts::render_mad_negative_prompt(run.query, affirmative, history), 2,
            round, "negative");
        t.responses.back().push_back(negative);
        AgentResponse moderator = run.turn(
            *agents[2],
            prompts::render_mad_moderator_prompt(run.query, affirmative, negative, history), 3,
            round, "moderator");
        t.responses.back().push_back(moderator);

        history.push_back(affirmative);
        history.push_back(negative);
        history.push_back(moderator);

        t.final_answer = moderator.answer;
        t.agent_calls = run.calls_made;

        // A missing or false continuation signal is a final decision.
        const auto parsed = parse_model_output(moderator.raw_text);
        if (!parsed.continue_debate.has_value() || !*parsed.continue_debate) break;
    }
}

AgentResponse initial_turn(Run& run, Backend& backend) {
    const bool verbalized = run.cfg.confidence_source == ConfidenceSource::verbalized;
    return run.turn(backend, prompts::render_initial_prompt(run.query, verbalized), 1, 1,
                    "initial");
}

} // namespace

AgentResponse run_initial_turn(const Query& query, Backend& agent, const RunConfig& cfg) {
    Run run{query, cfg};
    return initial_turn(run, agent);
}

Transcript run_down_continuation(const Query& query, std::span<Backend* const> agents,
                                 const RunConfig& cfg, uint64_t seed,
                                 const AgentResponse& initial) {
    require_agents(agents, cfg, 2);
    Transcript t = make_transcript(query, kProtocolDown, seed);
    t.threshold_used = cfg.threshold;
    Run run{query, cfg};
    run.calls_made = initial.call_index;
    try {
        const bool verbalized = cfg.confidence_source == ConfidenceSource::verbalized;

        // Round 1: the initial response is reused, never regenerated; only
        // the remaining agents answer.
        t.responses.push_back({initial});
        for (size_t i = 1; i < agents.size(); ++i) {
            const int agent_id = static_cast<int>(i) + 1;
            t.responses.back().push_back(
                run.turn(*agents[i], prompts::render_initial_prompt(query, verbalized), agent_id,
                         1, "initial"));
        }
        const std::vector<AgentResponse> round1 = t.responses.back();

        // Round 2: every agent sees the other agents' round-1 responses with
        // their confidence scores attached.
        t.responses.emplace_back();
        for (size_t i = 0; i < agents.size(); ++i) {
            const int agent_id = static_cast<int>(i) + 1;
            const auto peers = peers_excluding(round1, agent_id);
            t.responses.back().push_back(run.turn(*agents[i],
                                                  prompts::render_update_prompt(query, peers, true),
                                                  agent_id, 2, "update"));
        }
        t.agent_calls = run.calls_made;

        if (cfg.aggregation == Aggregation::vote) {
            t.final_answer = majority_vote(t.responses.back());
        } else {
            const auto outcome =
                judge_decide(query, t.responses.back(), *agents[0], cfg, cfg.num_agents + 1, 3,
                             run.calls_made + 1);
            run.calls_made += 1;
            t.judge_response = outcome.judge_response;
            t.judge_fallback = outcome.fell_back_to_vote;
            t.final_answer = outcome.final_answer;
        }
        t.agent_calls = run.calls_made;
    } catch (const BackendError& e) {
        finish_failed(t, run, e);
    }
    return t;
}

Transcript run_down(const Query& query, std::span<Backend* const> agents, const RunConfig& cfg,
                    uint64_t seed) {
    require_agents(agents, cfg, 2);
    if (cfg.num_rounds != 2) {
        throw config_error("the adaptive debate pipeline runs exactly 2 rounds");
    }
    Transcript t = make_transcript(query, kProtocolDown, seed);
    t.threshold_used = cfg.threshold;
    Run run{query, cfg};

    AgentResponse initial;
    try {
        initial = initial_turn(run, *agents[0]);
    } catch (const BackendError& e) {
        finish_failed(t, run, e);
        return t;
    }

    if (!should_debate(initial.confidence, cfg.threshold)) {
        t.skipped = true;
        t.responses.push_back({initial});
        t.final_answer = initial.answer;
        t.agent_calls = run.calls_made;
        return t;
    }
    return run_down_continuation(query, agents, cfg, seed, initial);
}

Transcript run_single_cot(const Query& query, Backend& agent, const RunConfig& cfg,
                          uint64_t seed) {
    Transcript t = make_transcript(query, kProtocolSingleCot, seed);
    Run run{query, cfg};
    try {
        AgentResponse response =
            run.turn(agent, prompts::render_initial_prompt(query, false), 1, 1, "initial");
        t.responses.push_back({response});
        t.final_answer = response.answer;
        t.agent_calls = run.calls_made;
    } catch (const BackendError& e) {
        finish_failed(t, run, e);
    }
    return t;
}

Transcript run_self_refine(const Query& query, Backend& agent, const RunConfig& cfg,
                           uint64_t seed) {
    if (cfg.self_refine_calls < 2) {
        throw config_error("self-refine needs a budget of at least 2 calls");
    }
    Transcript t = make_transcript(query, kProtocolSelfRefine, seed);
    Run run{query, cfg};
    try {
        AgentResponse latest =
            run.turn(agent, prompts::render_initial_prompt(query, false), 1, 1, "initial");
        t.responses.push_back({latest});
        for (int call = 2; call <= cfg.self_refine_calls; ++call) {
            latest = run.turn(agent, prompts::render_refine_prompt(query, latest), 1, call,
                              "refine");
            t.responses.push_back({latest});
        }
        t.final_answer = latest.answer;
        t.agent_calls = run.calls_made;
    } catch (const BackendError& e) {
        finish_failed(t, run, e);
    }
    return t;
}

Transcript run_self_consistency(const Query& query, Backend& agent, const RunConfig& cfg,
                                uint64_t seed) {
    if (cfg.self_consistency_samples < 1) {
        throw config_error("self-consistency needs at least 1 sample");
    }
    Transcript t = make_transcript(query, kProtocolSelfConsistency, seed);
    Run run{query, cfg};
    try {
        std::vector<AgentResponse> samples;
        samples.reserve(cfg.self_consistency_samples);
        for (int s = 1; s <= cfg.self_consistency_samples; ++s) {
            samples.push_back(run.turn(agent, prompts::render_initial_prompt(query, false), 1, s,
                                       "sample", cfg.self_consistency_temperature));
            t.responses.push_back({samples.back()});
        }
        t.final_answer = majority_vote(samples);
        t.agent_calls = run.calls_made;
    } catch (const BackendError& e) {
        finish_failed(t, run, e);
    }
    return t;
}

Transcript run_debate(const Query& query, std::span<Backend* const> agents, const RunConfig& cfg,
                      uint64_t seed) {
    require_agents(agents, cfg, 2);
    Transcript t = make_transcript(query, kProtocolDebate, seed);
    Run run{query, cfg};
    try {
        debate_rounds(t, run, agents, nullptr);
    } catch (const BackendError& e) {
        finish_failed(t, run, e);
    }
    return t;
}

Transcript run_mad(const Query& query, std::span<Backend* const> agents, const RunConfig& cfg,
                   uint64_t seed) {
    require_agents(agents, cfg, 3);
    if (cfg.mad_max_iterations < 1) throw config_error("mad_max_iterations must be >= 1");
    Transcript t = make_transcript(query, kProtocolMad, seed);
    Run run{query, cfg};
    try {
        mad_iterations(t, run, agents, 0);
    } catch (const BackendError& e) {
        finish_failed(t, run, e);
    }
    return t;
}

Transcript run_conditional(InnerProtocol inner, const Query& query,
                           std::span<Backend* const> agents, const RunConfig& cfg, uint64_t seed) {
    require_agents(agents, cfg, inner == InnerProtocol::mad ? 3 : 2);
    const char* protocol =
        inner == InnerProtocol::mad ? kProtocolConditionalMad : kProtocolConditionalDebate;
    Transcript t = make_transcript(query, protocol, seed);
    t.threshold_used = cfg.threshold;
    Run run{query, cfg};

    AgentResponse initial;
    try {
        initial = initial_turn(run, *agents[0]);
    } catch (const BackendError& e) {
        finish_failed(t, run, e);
        return t;
    }

    if (!should_debate(initial.confidence, cfg.threshold)) {
        t.skipped = true;
        t.responses.push_back({initial});
        t.final_answer = initial.answer;
        t.agent_calls = run.calls_made;
        return t;
    }

    try {
        if (inner == InnerProtocol::debate) {
            // The initial response doubles as agent 1's round-1 answer.
            debate_rounds(t, run, agents, &initial);
        } else {
            // MAD's role structure has no slot for the initial response;
            // it is recorded as round 1 and the iterations start fresh.
            t.responses.push_back({initial});
            mad_iterations(t, run, agents, 1);
        }
    } catch (const BackendError& e) {
        finish_failed(t, run, e);
    }
    return t;
}

} // namespace down
