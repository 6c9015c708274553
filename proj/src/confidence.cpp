#include "confidence.hpp"

#include "errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace down {

using nlohmann::json;

double softmax_prob(std::span<const double> logits, size_t index) {
    if (logits.empty()) throw invalid_argument_error("softmax_prob: empty logits");
    if (index >= logits.size()) throw invalid_argument_error("softmax_prob: index out of range");
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - max_logit);
    return std::exp(logits[index] - max_logit) / denom;
}

double mean_token_confidence(const TokenProbSequence& seq) {
    if (seq.empty()) {
        throw ConfidenceUnavailableError(
            "token-probability confidence unavailable: backend returned no per-token probabilities");
    }
    double sum = 0.0;
    for (double p : seq) sum += p;
    return sum / static_cast<double>(seq.size());
}

std::string extract_first_json_object(const std::string& raw_text) {
    // Scan candidate '{' positions and bracket-match with string awareness;
    // accept the first span that parses.
    for (size_t start = raw_text.find('{'); start != std::string::npos;
         start = raw_text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (size_t i = start; i < raw_text.size(); ++i) {
            const char c = raw_text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    std::string candidate = raw_text.substr(start, i - start + 1);
                    if (json::accept(candidate)) return candidate;
                    break;
                }
            }
        }
    }
    throw MalformedOutputError("no JSON object found in model output");
}

double parse_verbalized_confidence(const std::string& raw_text) {
    const json obj = json::parse(extract_first_json_object(raw_text));
    if (!obj.contains("confidence_score")) {
        throw ConfidenceFieldError("confidence_score field missing");
    }
    const json& field = obj["confidence_score"];
    double value = 0.0;
    if (field.is_number()) {
        value = field.get<double>();
    } else if (field.is_string()) {
        const std::string s = field.get<std::string>();
        char* end = nullptr;
        value = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || (end && *end != '\0')) {
            throw ConfidenceFieldError("confidence_score is not numeric: '" + s + "'");
        }
    } else {
        throw ConfidenceFieldError("confidence_score is not numeric");
    }
    if (std::isnan(value)) throw ConfidenceFieldError("confidence_score is NaN");
    return std::clamp(value, 0.0, 1.0);
}

bool should_debate(double confidence, double threshold) {
    return confidence <= threshold;
}

} // namespace down
