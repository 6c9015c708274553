#pragma once

#include "threshold.hpp"
#include "types.hpp"

#include <span>
#include <string>
#include <vector>

namespace down {

// Accuracy / cost metrics over a batch. Failure-marked transcripts are
// excluded from every rate and reported separately in `failures`.
struct Metrics {
    double accuracy = 0.0;
    double avg_agent_calls = 0.0;
    double skip_rate = 0.0;
    int64_t n = 0;  // evaluated (non-failed) transcripts
    int64_t failures = 0;
};

// Response-shift breakdown over queries whose final answer differs from the
// initial prediction. Percentages are over the classified changes, so they
// sum to 100 whenever any change is classifiable.
struct ShiftReport {
    int64_t changed = 0;
    int64_t correct_to_incorrect = 0;
    int64_t incorrect_to_correct = 0;
    double pct_c2i = 0.0;
    double pct_i2c = 0.0;
};

// JSONL dataset loader: one {id, text, choices?, gold} object per line.
// Validates id uniqueness and gold/choice consistency; errors carry the
// offending line number.
std::vector<Query> load_dataset(const std::string& path);

Metrics evaluate(std::span<const Transcript> transcripts, std::span<const Query> queries);

ShiftReport shift_analysis(std::span<const Transcript> transcripts,
                           std::span<const Query> queries);

std::string metrics_to_json(const Metrics& m);
std::string metrics_table(const Metrics& m);
std::string shift_report_to_json(const ShiftReport& r);
std::string shift_report_table(const ShiftReport& r);

std::string transcripts_to_jsonl(std::span<const Transcript> transcripts);
std::vector<Transcript> transcripts_from_jsonl_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace down
