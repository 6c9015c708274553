#pragma once

#include "types.hpp"

#include <optional>
#include <string>

namespace down {

// Structured view of one raw model output. Field lookups are tolerant of the
// role-specific key names used across the prompt set.
struct ParsedOutput {
    bool from_json = false;                      // answer came from a JSON field
    std::string reason;
    std::string raw_answer;                      // empty when nothing extractable
    std::optional<double> verbalized_confidence; // clamped to [0,1] when present
    std::optional<bool> continue_debate;         // moderator continuation signal
};

ParsedOutput parse_model_output(const std::string& raw_text);

// Canonical answer for a parsed output. A JSON-declared answer is normalized
// as-is; free text only counts when the choices map it or it folds to a
// single bare token, so prose responses score as unparseable.
std::string resolve_answer(const ParsedOutput& parsed,
                           const std::optional<std::vector<std::string>>& choices);

// Confidence of a response given the configured source. Falls back from
// token probabilities to the verbalized score, and to 0 (always debates)
// when neither is available.
double resolve_confidence(ConfidenceSource source,
                          const std::optional<std::vector<double>>& token_probs,
                          const std::string& raw_text);

} // namespace down
