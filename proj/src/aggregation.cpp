#include "aggregation.hpp"

#include "answer.hpp"
#include "errors.hpp"
#include "model_output.hpp"
#include "prompts.hpp"

#include <map>

namespace down {

namespace {

struct VoteBucket {
    int count = 0;
    double max_confidence = -1.0;
    int min_agent_id = 0;
    int min_call_index = 0;
};

} // namespace

std::string majority_vote(std::span<const AgentResponse> responses) {
    if (responses.empty()) throw invalid_argument_error("majority_vote: no responses");
    std::map<std::string, VoteBucket> buckets;
    for (const auto& r : responses) {
        auto [it, inserted] = buckets.try_emplace(r.answer);
        VoteBucket& b = it->second;
        if (inserted) {
            b.min_agent_id = r.agent_id;
            b.min_call_index = r.call_index;
        } else {
            b.min_agent_id = std::min(b.min_agent_id, r.agent_id);
            b.min_call_index = std::min(b.min_call_index, r.call_index);
        }
        ++b.count;
        b.max_confidence = std::max(b.max_confidence, r.confidence);
    }

    const std::string* winner = nullptr;
    const VoteBucket* winner_bucket = nullptr;
    for (const auto& [answer, bucket] : buckets) {
        if (!winner) {
            winner = &answer;
            winner_bucket = &bucket;
            continue;
        }
        const bool better =
            bucket.count > winner_bucket->count ||
            (bucket.count == winner_bucket->count &&
             (bucket.max_confidence > winner_bucket->max_confidence ||
              (bucket.max_confidence == winner_bucket->max_confidence &&
               (bucket.min_agent_id < winner_bucket->min_agent_id ||
                (bucket.min_agent_id == winner_bucket->min_agent_id &&
                 bucket.min_call_index < winner_bucket->min_call_index)))));
        if (better) {
            winner = &answer;
            winner_bucket = &bucket;
        }
    }
    return *winner;
}

JudgeOutcome judge_decide(const Query& query, std::span<const AgentResponse> responses,
                          Backend& judge_backend, const RunConfig& cfg, int agent_id, int round,
                          int call_index) {
    if (responses.empty()) throw invalid_argument_error("judge_decide: no responses");

    GenerationRequest request;
    request.prompt = prompts::render_judge_prompt(query, responses);
    request.temperature = cfg.temperature;
    request.max_tokens = cfg.max_tokens;
    request.want_token_probs = cfg.confidence_source == ConfidenceSource::token_prob;
    request.agent_tag = judge_backend.tag();
    request.query_id = query.id;
    request.agent_id = agent_id;
    request.round = round;
    request.variant = "judge";

    const GenerationResult gen = judge_backend.generate(request);
    const ParsedOutput parsed = parse_model_output(gen.text);

    JudgeOutcome outcome;
    outcome.judge_response.agent_id = agent_id;
    outcome.judge_response.round = round;
    outcome.judge_response.reason = parsed.reason;
    outcome.judge_response.raw_text = gen.text;
    outcome.judge_response.call_index = call_index;
    outcome.judge_response.answer = resolve_answer(parsed, query.choices);
    outcome.judge_response.confidence =
        resolve_confidence(cfg.confidence_source, gen.token_probs, gen.text);

    if (is_unparseable(outcome.judge_response.answer)) {
        outcome.final_answer = majority_vote(responses);
        outcome.fell_back_to_vote = true;
    } else {
        outcome.final_answer = outcome.judge_response.answer;
    }
    return outcome;
}

} // namespace down
