#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace down {

// Per-candidate-threshold counts from a sweep: k correct finals, m skipped
// queries, N total. Accuracy k/N and skip rate m/N are always derived.
struct ThresholdStats {
    double theta = 0.0;
    int64_t k = 0;
    int64_t m = 0;
    int64_t N = 0;
};

struct SelectionConfig {
    double z = 1.645;       // one-sided 95% normal quantile
    double s_min = 0.1;     // symmetric skip-rate margin
    double lambda = 15.0;   // penalty weight
    double epsilon = 1e-9;  // min-max stabilizer
};

// Per-candidate breakdown of the selection score.
struct ThresholdScore {
    double theta = 0.0;
    double accuracy = 0.0;
    double skip_rate = 0.0;
    double penalty = 0.0;
    double norm_accuracy = 0.0;
    double norm_skip_rate = 0.0;
    double score = 0.0;
};

struct SelectionResult {
    double theta_star = 0.0;
    size_t best_index = 0;
    double wilson_bound = 0.0;  // lower bound on the max observed accuracy
    std::vector<ThresholdScore> scores;
};

// One-sided Wilson lower bound on a binomial proportion:
//   (2k + z^2 - z*sqrt(z^2 + 4k(1 - k/N))) / (2(N + z^2)).
// Always <= k/N, with equality iff z = 0.
double wilson_lower_bound(int64_t k, int64_t n, double z);

// Soft penalty: accuracy below the Wilson region plus skip rate outside
// [s_min, 1 - s_min].
double penalty(double accuracy, double wilson_max, double skip_rate, double s_min);

// (v - min) / (max - min + epsilon) per element.
std::vector<double> minmax_normalize(const std::vector<double>& values, double epsilon);

// Scores every candidate and picks the argmax of
// norm_accuracy + norm_skip_rate - lambda * penalty,
// breaking score ties toward the smaller theta.
SelectionResult select_threshold(const std::vector<ThresholdStats>& stats,
                                 const SelectionConfig& cfg);

// JSON round-tripping for the CLI ("[{theta,k,m,N},...]" and the result).
std::vector<ThresholdStats> threshold_stats_from_json(const std::string& text);
std::string threshold_stats_to_json(const std::vector<ThresholdStats>& stats);
std::string selection_result_to_json(const SelectionResult& result);
std::string selection_result_table(const SelectionResult& result);

} // namespace down
