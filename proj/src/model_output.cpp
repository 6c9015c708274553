#include "model_output.hpp"

#include "answer.hpp"
#include "confidence.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace down {

using nlohmann::json;

namespace {

const char* const kAnswerKeys[] = {"base_answer", "moderator_answer", "debate_answer",
                                   "final_answer", "answer"};
const char* const kReasonKeys[] = {"base_reason", "moderator_reason", "debate_reason", "reason"};

std::string stringify(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    return value.dump();
}

} // namespace

ParsedOutput parse_model_output(const std::string& raw_text) {
    ParsedOutput out;
    std::string object_text;
    try {
        object_text = extract_first_json_object(raw_text);
    } catch (const MalformedOutputError&) {
        // No JSON at all: treat the whole output as the answer candidate so
        // choice matching can still rescue it.
        out.raw_answer = raw_text;
        return out;
    }
    const json obj = json::parse(object_text);
    out.from_json = true;
    for (const char* key : kAnswerKeys) {
        if (obj.contains(key) && !obj[key].is_null()) {
            out.raw_answer = stringify(obj[key]);
            break;
        }
    }
    for (const char* key : kReasonKeys) {
        if (obj.contains(key) && obj[key].is_string()) {
            out.reason = obj[key].get<std::string>();
            break;
        }
    }
    if (obj.contains("continue_debate") && obj["continue_debate"].is_boolean()) {
        out.continue_debate = obj["continue_debate"].get<bool>();
    }
    try {
        out.verbalized_confidence = parse_verbalized_confidence(raw_text);
    } catch (const std::runtime_error&) {
        // absent or unusable; leave empty
    }
    return out;
}

std::string resolve_answer(const ParsedOutput& parsed,
                           const std::optional<std::vector<std::string>>& choices) {
    const std::string normalized = normalize_answer(parsed.raw_answer, choices);
    if (parsed.from_json) return normalized;
    if (choices && !choices->empty()) return normalized;  // choice mapping is already strict
    const bool single_token =
        !normalized.empty() &&
        normalized.find_first_of(" \t\n") == std::string::npos;
    return single_token ? normalized : kUnparseable;
}

double resolve_confidence(ConfidenceSource source,
                          const std::optional<std::vector<double>>& token_probs,
                          const std::string& raw_text) {
    if (source == ConfidenceSource::token_prob && token_probs && !token_probs->empty()) {
        return mean_token_confidence(*token_probs);
    }
    try {
        return parse_verbalized_confidence(raw_text);
    } catch (const std::runtime_error&) {
        return 0.0;  // unknown certainty: gate conservatively toward debate
    }
}

} // namespace down
