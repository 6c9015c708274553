#pragma once

#include <optional>
#include <string>
#include <vector>

namespace down {

// Marker returned when no canonical answer can be recovered from a model
// output. It is a fixed point of normalize_answer, counts as incorrect when
// scoring, and forms its own bucket in majority votes.
inline constexpr const char* kUnparseable = "unparseable";

// Lowercases, trims, and strips surrounding punctuation. Does not consult
// answer choices.
std::string fold_answer(const std::string& raw);

// Canonicalizes a raw answer string. With choices, a bare option letter
// ("A", "(b)") or the option text itself maps to the option's canonical
// (folded) text; otherwise the choice texts are searched as token
// subsequences of the raw answer and a unique hit wins. Returns
// kUnparseable when nothing applies.
std::string normalize_answer(const std::string& raw,
                             const std::optional<std::vector<std::string>>& choices = std::nullopt);

bool is_unparseable(const std::string& canonical);

} // namespace down
