#include "threshold.hpp"

#include "errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace down {

using nlohmann::json;

double wilson_lower_bound(int64_t k, int64_t n, double z) {
    if (n < 1) throw invalid_argument_error("wilson_lower_bound: N must be >= 1");
    if (k < 0 || k > n) throw invalid_argument_error("wilson_lower_bound: k must be in [0, N]");
    if (z < 0.0) throw invalid_argument_error("wilson_lower_bound: z must be >= 0");
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    // Edge cases where the radicand collapses to z^2; evaluating the closed
    // forms keeps the algebraic identities exact in floating point.
    if (k == 0) return 0.0;
    if (k == n) return nd / (nd + z * z);
    const double radicand = z * z + 4.0 * kd * (1.0 - kd / nd);
    return (2.0 * kd + z * z - z * std::sqrt(radicand)) / (2.0 * (nd + z * z));
}

double penalty(double accuracy, double wilson_max, double skip_rate, double s_min) {
    return std::max(0.0, wilson_max - accuracy) +
           std::max(0.0, s_min - skip_rate) +
           std::max(0.0, skip_rate - (1.0 - s_min));
}

std::vector<double> minmax_normalize(const std::vector<double>& values, double epsilon) {
    if (values.empty()) throw invalid_argument_error("minmax_normalize: empty input");
    if (!(epsilon > 0.0)) throw invalid_argument_error("minmax_normalize: epsilon must be > 0");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back((v - lo) / (hi - lo + epsilon));
    return out;
}

SelectionResult select_threshold(const std::vector<ThresholdStats>& stats,
                                 const SelectionConfig& cfg) {
    if (stats.empty()) throw invalid_argument_error("select_threshold: no candidates");
    const int64_t N = stats.front().N;
    int64_t k_max = 0;
    for (const auto& s : stats) {
        if (s.N != N) throw invalid_argument_error("select_threshold: inconsistent N across candidates");
        if (s.N < 1 || s.k < 0 || s.k > s.N || s.m < 0 || s.m > s.N) {
            throw invalid_argument_error("select_threshold: counts out of range");
        }
        k_max = std::max(k_max, s.k);
    }

    const double wilson_max = wilson_lower_bound(k_max, N, cfg.z);

    std::vector<double> accuracies, skip_rates;
    accuracies.reserve(stats.size());
    skip_rates.reserve(stats.size());
    for (const auto& s : stats) {
        accuracies.push_back(static_cast<double>(s.k) / static_cast<double>(N));
        skip_rates.push_back(static_cast<double>(s.m) / static_cast<double>(N));
    }
    const auto norm_acc = minmax_normalize(accuracies, cfg.epsilon);
    const auto norm_skip = minmax_normalize(skip_rates, cfg.epsilon);

    SelectionResult result;
    result.wilson_bound = wilson_max;
    result.scores.reserve(stats.size());
    for (size_t i = 0; i < stats.size(); ++i) {
        ThresholdScore sc;
        sc.theta = stats[i].theta;
        sc.accuracy = accuracies[i];
        sc.skip_rate = skip_rates[i];
        sc.penalty = penalty(accuracies[i], wilson_max, skip_rates[i], cfg.s_min);
        sc.norm_accuracy = norm_acc[i];
        sc.norm_skip_rate = norm_skip[i];
        sc.score = sc.norm_accuracy + sc.norm_skip_rate - cfg.lambda * sc.penalty;
        result.scores.push_back(sc);
    }

    size_t best = 0;
    for (size_t i = 1; i < result.scores.size(); ++i) {
        const auto& cand = result.scores[i];
        const auto& incumbent = result.scores[best];
        if (cand.score > incumbent.score ||
            (cand.score == incumbent.score && cand.theta < incumbent.theta)) {
            best = i;
        }
    }
    result.best_index = best;
    result.theta_star = result.scores[best].theta;
    return result;
}

std::vector<ThresholdStats> threshold_stats_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("bad threshold stats JSON: ") + e.what());
    }
    if (!j.is_array()) throw parse_error("threshold stats JSON must be an array");
    std::vector<ThresholdStats> out;
    for (const auto& row : j) {
        try {
            ThresholdStats s;
            s.theta = row.at("theta").get<double>();
            s.k = row.at("k").get<int64_t>();
            s.m = row.at("m").get<int64_t>();
            s.N = row.at("N").get<int64_t>();
            out.push_back(s);
        } catch (const json::exception& e) {
            throw parse_error(std::string("bad threshold stats row: ") + e.what());
        }
    }
    return out;
}

std::string threshold_stats_to_json(const std::vector<ThresholdStats>& stats) {
    json arr = json::array();
    for (const auto& s : stats) {
        arr.push_back(json{{"theta", s.theta}, {"k", s.k}, {"m", s.m}, {"N", s.N}});
    }
    return arr.dump();
}

std::string selection_result_to_json(const SelectionResult& result) {
    json scores = json::array();
    for (const auto& sc : result.scores) {
        scores.push_back(json{
            {"theta", sc.theta},
            {"accuracy", sc.accuracy},
            {"skip_rate", sc.skip_rate},
            {"penalty", sc.penalty},
            {"norm_accuracy", sc.norm_accuracy},
            {"norm_skip_rate", sc.norm_skip_rate},
            {"score", sc.score},
        });
    }
    return json{{"theta_star", result.theta_star},
                {"wilson_bound", result.wilson_bound},
                {"scores", std::move(scores)}}
        .dump();
}

std::string selection_result_table(const SelectionResult& result) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%8s %10s %10s %10s %10s\n", "theta", "acc", "skip", "penalty",
                  "score");
    out += line;
    for (const auto& sc : result.scores) {
        std::snprintf(line, sizeof(line), "%8.3f %10.4f %10.4f %10.4f %10.4f\n", sc.theta,
                      sc.accuracy, sc.skip_rate, sc.penalty, sc.score);
        out += line;
    }
    std::snprintf(line, sizeof(line), "theta* = %.3f\n", result.theta_star);
    out += line;
    return out;
}

} // namespace down
