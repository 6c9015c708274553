#include "prompts.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace down {
namespace prompts {

const char* const kTopicPlaceholder = "[debate topic]";
const char* const kResponsesPlaceholder = "[agent responses]";

// The JSON-format instruction shared by the initial templates.
static const char* const kFormatSuffix =
    R"(Please output your answer in json format, with the format as follows: {\"base_reason\": \"\", \"base_answer\": \"\"}. Please strictly output in JSON format, do not output irrelevant content.)";

static const char* const kFormatSuffixWithConfidence =
    R"(Please output your answer in json format, with the format as follows: {\"base_reason\": \"\", \"base_answer\": \"\", \"confidence_score\":range of 0-1}. Please strictly output in JSON format, do not output irrelevant content.)";

const char* const kInitialTemplate =
    R"([debate topic] Please output your answer in json format, with the format as follows: {\"base_reason\": \"\", \"base_answer\": \"\"}. Please strictly output in JSON format, do not output irrelevant content.)";

const char* const kInitialWithConfidenceTemplate =
    R"([debate topic] Please output your answer in json format, with the format as follows: {\"base_reason\": \"\", \"base_answer\": \"\", \"confidence_score\":range of 0-1}. Please strictly output in JSON format, do not output irrelevant content.)";

const char* const kUpdateInstruction =
    "Using the solutions from other agents as additional information, can you provide your "
    "answer to the problem?";

const char* const kJudgeTemplate =
    "Based on the following responses, generate an updated response that most accurately "
    "addresses the given query. Query: [debate topic] Responses: [agent responses]. Summarize "
    "your reasons for selecting this side and provide the final answer.";

static const char* const kModeratorFormatSuffix =
    R"(Please output your answer in json format, with the format as follows: {\"moderator_reason\": \"\", \"moderator_answer\": \"\", \"continue_debate\": true or false}. Set continue_debate to true only if another round of debate is needed. Please strictly output in JSON format, do not output irrelevant content.)";

namespace {

std::string replace_once(std::string text, const std::string& placeholder,
                         const std::string& value) {
    const size_t pos = text.find(placeholder);
    if (pos == std::string::npos) return text;
    text.replace(pos, placeholder.size(), value);
    return text;
}

std::string solution_block(const AgentResponse& r) {
    std::string block = r.reason;
    if (!block.empty()) block += " ";
    block += "Answer: " + r.answer;
    return block;
}

std::string role_name(int agent_id) {
    switch (agent_id) {
        case 1: return "Affirmative";
        case 2: return "Negative";
        default: return "Moderator";
    }
}

std::string mad_history_block(std::span<const AgentResponse> history) {
    if (history.empty()) return {};
    std::string out = "Debate so far:\n";
    for (const auto& r : history) {
        out += role_name(r.agent_id) + " (round " + std::to_string(r.round) +
               "): " + solution_block(r) + "\n";
    }
    out += "\n";
    return out;
}

} // namespace

std::string format_confidence(double confidence) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", confidence);
    return buf;
}

std::string render_topic(const Query& query) {
    std::string topic = query.text;
    if (query.choices && !query.choices->empty()) {
        topic += "\nOptions:";
        char letter = 'A';
        for (const auto& choice : *query.choices) {
            topic += "\n";
            topic += letter;
            topic += ") " + choice;
            ++letter;
        }
    }
    return topic;
}

std::string render_initial_prompt(const Query& query, bool with_confidence) {
    const char* tmpl = with_confidence ? kInitialWithConfidenceTemplate : kInitialTemplate;
    return replace_once(tmpl, kTopicPlaceholder, render_topic(query));
}

std::string render_update_prompt(const Query& query, std::span<const AgentResponse> peers,
                                 bool with_confidence) {
    if (peers.empty()) throw invalid_argument_error("render_update_prompt: no peer responses");
    std::vector<const AgentResponse*> ordered;
    ordered.reserve(peers.size());
    for (const auto& p : peers) ordered.push_back(&p);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const AgentResponse* a, const AgentResponse* b) {
                         return a->agent_id < b->agent_id;
                     });

    std::string prompt = render_topic(query);
    prompt += "\n\nThese are the solutions to the problem from other agents:\n\n";
    for (const AgentResponse* p : ordered) {
        prompt += "Agent " + std::to_string(p->agent_id) + " solution: " + solution_block(*p);
        if (with_confidence) {
            prompt += " [confidence score: " + format_confidence(p->confidence) + "]";
        }
        prompt += "\n\n";
    }
    prompt += kUpdateInstruction;
    prompt += " ";
    prompt += with_confidence ? kFormatSuffixWithConfidence : kFormatSuffix;
    return prompt;
}

std::string render_judge_prompt(const Query& query, std::span<const AgentResponse> responses) {
    if (responses.empty()) throw invalid_argument_error("render_judge_prompt: no responses");
    std::string joined;
    for (const auto& r : responses) {
        joined += "Agent " + std::to_string(r.agent_id) + ": " + solution_block(r) + " ";
    }
    if (!joined.empty()) joined.pop_back();
    std::string prompt = replace_once(kJudgeTemplate, kTopicPlaceholder, render_topic(query));
    prompt = replace_once(prompt, kResponsesPlaceholder, joined);
    prompt += " ";
    prompt += kFormatSuffix;
    return prompt;
}

std::string render_refine_prompt(const Query& query, const AgentResponse& own) {
    std::string prompt = render_topic(query);
    prompt += "\n\nYour previous response was: " + solution_block(own);
    prompt +=
        "\n\nReview your previous response, identify any mistakes in the reasoning, and provide "
        "an improved answer to the problem. ";
    prompt += kFormatSuffix;
    return prompt;
}

std::string render_mad_affirmative_prompt(const Query& query,
                                          std::span<const AgentResponse> history) {
    std::string prompt = render_topic(query);
    prompt += "\n\n" + mad_history_block(history);
    prompt +=
        "You are the affirmative debater. State your answer to the question and argue for it. ";
    prompt += kFormatSuffix;
    return prompt;
}

std::string render_mad_negative_prompt(const Query& query, const AgentResponse& affirmative,
                                       std::span<const AgentResponse> history) {
    std::string prompt = render_topic(query);
    prompt += "\n\n" + mad_history_block(history);
    prompt += "The affirmative debater argued: " + solution_block(affirmative);
    prompt +=
        "\n\nYou are the negative debater. You disagree with the affirmative side; present the "
        "opposing perspective and your own answer. ";
    prompt += kFormatSuffix;
    return prompt;
}

std::string render_mad_moderator_prompt(const Query& query, const AgentResponse& affirmative,
                                        const AgentResponse& negative,
                                        std::span<const AgentResponse> history) {
    std::string prompt = render_topic(query);
    prompt += "\n\n" + mad_history_block(history);
    prompt += "Affirmative side: " + solution_block(affirmative);
    prompt += "\nNegative side: " + solution_block(negative);
    prompt +=
        "\n\nYou are the moderator. Weigh both sides and select the most plausible answer, or "
        "request another round of debate if neither side is convincing. ";
    prompt += kModeratorFormatSuffix;
    return prompt;
}

} // namespace prompts
} // namespace down
