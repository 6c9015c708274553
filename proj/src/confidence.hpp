#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace down {

// Per-token probabilities of a generated response, one entry per completion
// token, each in (0, 1].
using TokenProbSequence = std::vector<double>;

// The model output did not contain a parseable JSON object.
struct MalformedOutputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A JSON object was found but its confidence_score field is missing or not
// numeric. Distinct from MalformedOutputError so callers can choose fallbacks.
struct ConfidenceFieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The backend produced no per-token probabilities, so logprob-based
// confidence is unavailable; callers may fall back to verbalized confidence.
struct ConfidenceUnavailableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// softmax(logits)[index], computed with max-subtraction. Outputs over all
// indices sum to 1 within 1e-12 and are invariant under shifting every logit
// by a constant.
double softmax_prob(std::span<const double> logits, size_t index);

// Mean of the per-token probabilities: the confidence of a response under
// the token-probability source. Throws ConfidenceUnavailableError on an
// empty sequence.
double mean_token_confidence(const TokenProbSequence& seq);

// Extracts the first JSON object from a model output, tolerating surrounding
// prose and code fences. Throws MalformedOutputError if none parses.
std::string extract_first_json_object(const std::string& raw_text);

// Reads the "confidence_score" field from the first JSON object in raw_text,
// clamped to [0, 1]. Numeric strings ("0.91") are accepted.
double parse_verbalized_confidence(const std::string& raw_text);

// The debate-engagement gate: collaboration runs iff confidence <= threshold.
bool should_debate(double confidence, double threshold);

} // namespace down
