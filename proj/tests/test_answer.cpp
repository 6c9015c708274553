#include "answer.hpp"
#include "testutil.hpp"

#include "doctest.h"

#include <optional>
#include <string>
#include <vector>

using namespace down;

namespace {
const std::vector<std::string> kCities{"Paris", "London"};
}

TEST_CASE("folding trims, lowercases, strips surrounding punctuation") {
    CHECK(normalize_answer("Yes.") == "yes");
    CHECK(normalize_answer("YES") == "yes");
    CHECK(normalize_answer("  No!  ") == "no");
    CHECK(normalize_answer("\"London\"") == "london");
    CHECK(normalize_answer("42") == "42");
    CHECK(normalize_answer("Mixed Case Words") == "mixed case words");
}

TEST_CASE("unparseable marker instead of silent empty output") {
    CHECK(normalize_answer("!!!") == kUnparseable);
    CHECK(normalize_answer("   ") == kUnparseable);
    CHECK(is_unparseable(normalize_answer("...")));
    CHECK_FALSE(is_unparseable(normalize_answer("yes")));
}

TEST_CASE("option letters map to option text") {
    CHECK(normalize_answer("B", kCities) == "london");
    CHECK(normalize_answer("a", kCities) == "paris");
    CHECK(normalize_answer("(B)", kCities) == "london");
    // Out-of-range letter is not a mapping.
    CHECK(normalize_answer("D", kCities) == kUnparseable);
}

TEST_CASE("option text matches exactly or as a unique token subsequence") {
    CHECK(normalize_answer("London", kCities) == "london");
    CHECK(normalize_answer("london!", kCities) == "london");
    CHECK(normalize_answer("the answer is london", kCities) == "london");
    CHECK(normalize_answer("I would say London here.", kCities) == "london");
    // Ambiguous or absent mentions do not map.
    CHECK(normalize_answer("paris or london", kCities) == kUnparseable);
    CHECK(normalize_answer("berlin", kCities) == kUnparseable);
    // Token matching does not fire on substrings inside words.
    CHECK(normalize_answer("unknown", std::vector<std::string>{"yes", "no"}) == kUnparseable);
}

TEST_CASE("multiword choices match as token subsequences") {
    const std::vector<std::string> choices{"the curator", "the guard"};
    CHECK(normalize_answer("It must have been the curator.", choices) == "the curator");
    CHECK(normalize_answer("the guard", choices) == "the guard");
}

namespace {

std::string random_string(testutil::Rng& rng) {
    static const char charset[] =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,!?\"'()-";
    const int len = rng.uniform_int(0, 24);
    std::string s;
    for (int i = 0; i < len; ++i) {
        s.push_back(charset[rng.uniform_int(0, sizeof(charset) - 2)]);
    }
    return s;
}

} // namespace

TEST_CASE("normalize_answer is idempotent") {
    testutil::Rng rng(0xA11CE);
    const std::optional<std::vector<std::string>> with_choices[] = {std::nullopt,
                                                                    std::optional(kCities)};
    for (int i = 0; i < 2000; ++i) {
        const std::string raw = random_string(rng);
        for (const auto& choices : with_choices) {
            const std::string once = normalize_answer(raw, choices);
            CHECK(normalize_answer(once, choices) == once);
        }
    }
}

TEST_CASE("normalize_answer is case-insensitive") {
    testutil::Rng rng(0xBEE5);
    for (int i = 0; i < 2000; ++i) {
        std::string raw = random_string(rng);
        std::string upper = raw;
        for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        CHECK(normalize_answer(raw) == normalize_answer(upper));
        CHECK(normalize_answer(raw, kCities) == normalize_answer(upper, kCities));
    }
}
