#include "answer.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace down {

namespace {

bool is_strippable(unsigned char c) {
    return std::isspace(c) || (std::ispunct(c) && c != '\'');
}

std::vector<std::string> tokenize(const std::string& folded) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : folded) {
        if (std::isalnum(c) || c == '\'') {
            cur.push_back(static_cast<char>(c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

bool contains_token_subsequence(const std::vector<std::string>& haystack,
                                const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return true;
    }
    return false;
}

} // namespace

std::string fold_answer(const std::string& raw) {
    size_t begin = 0;
    size_t end = raw.size();
    while (begin < end && is_strippable(static_cast<unsigned char>(raw[begin]))) ++begin;
    while (end > begin && is_strippable(static_cast<unsigned char>(raw[end - 1]))) --end;
    std::string out;
    out.reserve(end - begin);
    for (size_t i = begin; i < end; ++i) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
    }
    return out;
}

std::string normalize_answer(const std::string& raw,
                             const std::optional<std::vector<std::string>>& choices) {
    const std::string folded = fold_answer(raw);
    if (folded.empty()) return kUnparseable;

    if (!choices || choices->empty()) return folded;

    // Bare option letter: "b" -> second choice.
    if (folded.size() == 1 && folded[0] >= 'a' && folded[0] <= 'z') {
        size_t idx = static_cast<size_t>(folded[0] - 'a');
        if (idx < choices->size()) return fold_answer((*choices)[idx]);
    }

    // Exact option text.
    for (const auto& choice : *choices) {
        if (folded == fold_answer(choice)) return fold_answer(choice);
    }

    // Unique choice embedded in the answer ("the answer is london").
    const auto raw_tokens = tokenize(folded);
    std::string hit;
    int hits = 0;
    for (const auto& choice : *choices) {
        const std::string choice_folded = fold_answer(choice);
        if (contains_token_subsequence(raw_tokens, tokenize(choice_folded))) {
            ++hits;
            hit = choice_folded;
        }
    }
    if (hits == 1) return hit;

    return kUnparseable;
}

bool is_unparseable(const std::string& canonical) {
    return canonical == kUnparseable;
}

} // namespace down
