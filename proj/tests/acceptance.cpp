// Acceptance suite: each criterion runs end to end, prints one PASS/FAIL
// line, and the process exits nonzero if any criterion fails.

#include "aggregation.hpp"
#include "answer.hpp"
#include "confidence.hpp"
#include "engine.hpp"
#include "harness.hpp"
#include "oracles.hpp"
#include "protocols.hpp"
#include "testutil.hpp"
#include "threshold.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace down;
using testutil::ScriptBuilder;
using testutil::TempDir;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }
};

double elapsed_sec(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- 1. Wilson bound exactness ----------------------------------------

void wilson_exactness(Check& c) {
    const auto start = std::chrono::steady_clock::now();
    for (int64_t n : {1, 10, 229, 1000}) {
        for (double z : {0.0, 1.645, 1.96}) {
            for (int64_t k = 0; k <= n; ++k) {
                const double got = wilson_lower_bound(k, n, z);
                const double want = oracle::wilson_lower_bound(k, n, z);
                c.expect(std::abs(got - want) <= 1e-9,
                         "wilson(" + std::to_string(k) + "," + std::to_string(n) + "," +
                             std::to_string(z) + ") off by " + std::to_string(got - want));
            }
            c.expect(wilson_lower_bound(0, n, z) == 0.0, "wilson(0,N,z) not exactly 0");
            c.expect(wilson_lower_bound(n, n, z) ==
                         static_cast<double>(n) / (static_cast<double>(n) + z * z),
                     "wilson(N,N,z) not exactly N/(N+z^2)");
        }
    }
    c.expect(elapsed_sec(start) < 1.0, "grid exceeded the 1 s budget");
}

// ---- 2. Threshold-selector oracle equivalence --------------------------

size_t brute_force_best(const std::vector<ThresholdStats>& stats, const SelectionConfig& cfg) {
    const double N = static_cast<double>(stats.front().N);
    double k_max = 0;
    for (const auto& s : stats) k_max = std::max(k_max, static_cast<double>(s.k));
    const double z = cfg.z;
    double wilson = 0.0;
    if (k_max > 0) {
        wilson = (2.0 * k_max + z * z - z * std::sqrt(z * z + 4.0 * k_max * (1.0 - k_max / N))) /
                 (2.0 * (N + z * z));
    }
    double a_lo = 1e300, a_hi = -1e300, s_lo = 1e300, s_hi = -1e300;
    for (const auto& s : stats) {
        a_lo = std::min(a_lo, s.k / N);
        a_hi = std::max(a_hi, s.k / N);
        s_lo = std::min(s_lo, s.m / N);
        s_hi = std::max(s_hi, s.m / N);
    }
    size_t best = 0;
    double best_score = 0.0, best_theta = 0.0;
    for (size_t i = 0; i < stats.size(); ++i) {
        const double a = stats[i].k / N, r = stats[i].m / N;
        const double pen = std::max(0.0, wilson - a) + std::max(0.0, cfg.s_min - r) +
                           std::max(0.0, r - (1.0 - cfg.s_min));
        const double score = (a - a_lo) / (a_hi - a_lo + cfg.epsilon) +
                             (r - s_lo) / (s_hi - s_lo + cfg.epsilon) - cfg.lambda * pen;
        if (i == 0 || score > best_score || (score == best_score && stats[i].theta < best_theta)) {
            best = i;
            best_score = score;
            best_theta = stats[i].theta;
        }
    }
    return best;
}

void selector_oracle_equivalence(Check& c) {
    const auto start = std::chrono::steady_clock::now();
    testutil::Rng rng(0xACCE97);
    const SelectionConfig cfg;  // z = 1.645, s_min = 0.1, lambda = 15
    int matches = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        const int count = rng.uniform_int(3, 7);
        std::vector<ThresholdStats> stats;
        for (int i = 0; i < count; ++i) {
            ThresholdStats s;
            s.theta = 0.4 + 0.05 * i;
            s.N = 229;
            s.k = rng.uniform_int(0, 229);
            s.m = rng.uniform_int(0, 229);
            stats.push_back(s);
        }
        if (select_threshold(stats, cfg).best_index == brute_force_best(stats, cfg)) ++matches;
    }
    c.expect(matches == trials,
             "argmax mismatch in " + std::to_string(trials - matches) + "/1000 tables");
    c.expect(elapsed_sec(start) < 5.0, "selector sweep exceeded the 5 s budget");
}

// ---- 3. Call-count laws -------------------------------------------------

EngineConfig scripted_engine_config(const std::string& script_path, double threshold,
                                    Aggregation aggregation) {
    EngineConfig cfg;
    cfg.run.threshold = threshold;
    cfg.run.aggregation = aggregation;
    cfg.run.seed = 11;
    cfg.run.max_inflight = 2;
    BackendSpec spec;
    spec.tag = "scripted";
    spec.type = "scripted";
    spec.script_path = script_path;
    cfg.backends.push_back(spec);
    return cfg;
}

void call_count_laws(Check& c) {
    const auto start = std::chrono::steady_clock::now();
    TempDir dir("acc-calls");
    const int total = 100;

    for (double target_skip : {0.0, 0.25, 0.5, 0.9, 1.0}) {
        const int skip_count = static_cast<int>(std::lround(target_skip * total));
        ScriptBuilder script;
        std::string dataset;
        for (int i = 1; i <= total; ++i) {
            const std::string qid = "q" + std::to_string(i);
            dataset += testutil::dataset_line(qid, "question?", "yes");
            const double confidence = i <= skip_count ? 0.9 : 0.5;  // gate at 0.8
            script.add(qid, 1, 1, "initial", "Yes", confidence);
            script.add(qid, 2, 1, "initial", "Yes", 0.6);
            script.add(qid, 3, 1, "initial", "Yes", 0.6);
            for (int agent = 1; agent <= 3; ++agent) script.add(qid, agent, 2, "update", "Yes", 0.9);
            script.add(qid, 4, 3, "judge", "Yes");
        }
        const auto script_path = script.write(dir.file("script.jsonl"));
        const auto dataset_path = testutil::write_file(dir.file("dataset.jsonl"), dataset);
        const auto queries = load_dataset(dataset_path);

        for (Aggregation aggregation : {Aggregation::vote, Aggregation::judge}) {
            Engine engine(scripted_engine_config(script_path, 0.8, aggregation));
            const auto transcripts = engine.run_batch(queries, "down");
            const Metrics m = evaluate(transcripts, queries);
            const double per_debate = aggregation == Aggregation::vote ? 6.0 : 7.0;
            const double law = 1.0 * m.skip_rate + per_debate * (1.0 - m.skip_rate);
            c.expect(m.failures == 0, "unexpected failures in the scripted batch");
            c.expect(std::abs(m.skip_rate - target_skip) <= 1e-12, "skip rate drifted from target");
            c.expect(std::abs(m.avg_agent_calls - law) <= 1e-12,
                     "AC " + std::to_string(m.avg_agent_calls) + " != law " + std::to_string(law) +
                         " at s=" + std::to_string(target_skip) +
                         (aggregation == Aggregation::vote ? " (vote)" : " (judge)"));
        }
    }
    c.expect(elapsed_sec(start) < 10.0, "call-count sweep exceeded the 10 s budget");
}

// ---- 4. Golden trace replay ----------------------------------------------

void golden_trace_replay(Check& c) {
    const std::string data_dir = DOWN_DATA_DIR;
    EngineConfig cfg =
        scripted_engine_config(data_dir + "/scripts/golden_trace.jsonl", 0.9, Aggregation::vote);
    Engine engine(cfg);
    const auto queries = load_dataset(data_dir + "/golden_trace.jsonl");

    const auto down_run = engine.run_batch(queries, "down");
    c.expect(down_run.size() == 1, "expected one transcript");
    c.expect(down_run[0].skipped == true, "confidence 0.95 must skip at theta 0.9");
    c.expect(down_run[0].agent_calls == 1, "skip path must cost exactly 1 call");
    c.expect(down_run[0].final_answer == "yes", "final answer must be yes");

    const auto mad_run = engine.run_batch(queries, "mad");
    c.expect(mad_run[0].final_answer == "no", "moderator decision must be no");
    c.expect(mad_run[0].agent_calls == 3, "one MAD iteration costs 3 calls");
    c.expect(!mad_run[0].failed(), "MAD replay must not fail");
}

// ---- 5. Gate monotonicity property --------------------------------------

void gate_monotonicity(Check& c) {
    testutil::Rng rng(0x6473);
    int violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = rng.uniform_int(1, 40);
        std::vector<double> confidences(n);
        for (double& v : confidences) v = rng.uniform();

        const int grid_size = rng.uniform_int(2, 6);
        std::vector<double> grid(grid_size);
        for (double& t : grid) t = rng.uniform();
        std::sort(grid.begin(), grid.end());

        int previous = n + 1;
        for (double theta : grid) {
            int skips = 0;
            for (double conf : confidences) {
                if (!should_debate(conf, theta)) ++skips;
            }
            if (skips > previous) ++violations;
            previous = skips;
        }
    }
    c.expect(violations == 0, std::to_string(violations) + " monotonicity violations");
}

// ---- 6. Vote properties --------------------------------------------------

void vote_properties(Check& c) {
    testutil::Rng rng(0x707E);
    const char* answers[] = {"yes", "no", "maybe", "london", "paris"};
    int violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = rng.uniform_int(1, 9);
        std::vector<AgentResponse> votes(n);
        for (int i = 0; i < n; ++i) {
            votes[i].agent_id = i + 1;
            votes[i].call_index = i + 1;
            votes[i].answer = answers[rng.uniform_int(0, 4)];
            votes[i].confidence = rng.uniform();
        }
        const std::string winner = majority_vote(votes);

        std::vector<AgentResponse> shuffled = votes;
        for (int i = n - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.uniform_int(0, i)]);
        if (majority_vote(shuffled) != winner) ++violations;

        std::vector<AgentResponse> extended = votes;
        AgentResponse dup;
        dup.agent_id = n + 1;
        dup.call_index = n + 1;
        dup.answer = winner;
        dup.confidence = 0.0;
        extended.push_back(dup);
        if (majority_vote(extended) != winner) ++violations;
    }
    c.expect(violations == 0, std::to_string(violations) + " vote property violations");
}

// ---- 7. Determinism of cmd_run -------------------------------------------

void cli_determinism(Check& c) {
    TempDir dir("acc-cli");
    ScriptBuilder script;
    std::string dataset;
    for (int i = 1; i <= 20; ++i) {
        const std::string qid = "q" + std::to_string(i);
        dataset += testutil::dataset_line(qid, "question?", "yes");
        script.add(qid, 1, 1, "initial", "Yes", i % 2 ? 0.9 : 0.5);
        script.add(qid, 2, 1, "initial", "No", 0.6);
        script.add(qid, 3, 1, "initial", "Yes", 0.7);
        for (int agent = 1; agent <= 3; ++agent) script.add(qid, agent, 2, "update", "Yes", 0.9);
        script.add(qid, 4, 3, "judge", "Yes");
    }
    script.write(dir.file("script.jsonl"));
    testutil::write_file(dir.file("dataset.jsonl"), dataset);
    const nlohmann::json config{
        {"run", {{"threshold", 0.8}, {"seed", 4242}, {"max_inflight", 4}}},
        {"backends",
         nlohmann::json::array(
             {{{"tag", "scripted"}, {"type", "scripted"}, {"script", dir.file("script.jsonl")}}})},
    };
    testutil::write_file(dir.file("config.json"), config.dump());

    const auto run_once = [&](const std::string& out_name) {
        const std::string cmd = std::string(DOWN_CLI_PATH) + " run --config " +
                                dir.file("config.json") + " --dataset " + dir.file("dataset.jsonl") +
                                " --protocol down --out " + dir.file(out_name) + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    c.expect(run_once("one.jsonl") == 0, "first CLI run failed");
    c.expect(run_once("two.jsonl") == 0, "second CLI run failed");

    const auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    const std::string one = slurp(dir.file("one.jsonl"));
    c.expect(!one.empty(), "first run produced no transcripts");
    c.expect(one == slurp(dir.file("two.jsonl")), "transcript bytes differ between identical runs");
}

// ---- 8. Shift-report consistency -----------------------------------------

void shift_consistency(Check& c) {
    testutil::Rng rng(0x547F);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = rng.uniform_int(2, 200);
        std::vector<Query> queries;
        std::vector<Transcript> transcripts;
        int want_changed = 0, want_c2i = 0, want_i2c = 0;
        for (int i = 0; i < n; ++i) {
            const std::string id = "q" + std::to_string(i);
            Query q;
            q.id = id;
            q.text = "question";
            q.gold = "yes";
            queries.push_back(q);

            const std::string initial = rng.uniform() < 0.5 ? "yes" : "no";
            const std::string final_answer = rng.uniform() < 0.5 ? "yes" : "no";
            Transcript t;
            t.query_id = id;
            t.protocol = "down";
            t.final_answer = final_answer;
            t.agent_calls = initial == final_answer ? 1 : 6;
            AgentResponse r;
            r.agent_id = 1;
            r.round = 1;
            r.answer = initial;
            r.call_index = 1;
            t.responses.push_back({r});
            transcripts.push_back(t);

            if (initial != final_answer) {
                ++want_changed;
                if (initial == "yes") ++want_c2i;
                if (final_answer == "yes") ++want_i2c;
            }
        }
        const ShiftReport report = shift_analysis(transcripts, queries);
        c.expect(report.changed == want_changed, "changed count mismatch");
        c.expect(report.correct_to_incorrect == want_c2i, "c2i count mismatch");
        c.expect(report.incorrect_to_correct == want_i2c, "i2c count mismatch");
        if (report.changed > 0) {
            c.expect(std::abs(report.pct_c2i + report.pct_i2c - 100.0) <= 1e-9,
                     "percentages do not sum to 100");
        }
    }
}

// ---- 9. Benchmark-scale results disclaimer ---------------------------------

void benchmark_scale_disclaimer(Check& c) {
    // Accuracy/AC comparisons at full benchmark scale require live LLM
    // fleets and are out of acceptance scope. The optional down_live_smoke
    // binary (enabled via DOWN_SMOKE_BASE_URL) checks structural properties
    // against any OpenAI-compatible endpoint instead.
    (void)c;
}

struct Criterion {
    const char* name;
    std::function<void(Check&)> fn;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"wilson-bound-exactness", wilson_exactness},
        {"threshold-selector-oracle-equivalence", selector_oracle_equivalence},
        {"call-count-laws-vote-and-judge", call_count_laws},
        {"golden-trace-replay", golden_trace_replay},
        {"gate-monotonicity-property", gate_monotonicity},
        {"vote-properties", vote_properties},
        {"cmd-run-determinism", cli_determinism},
        {"shift-report-consistency", shift_consistency},
        {"benchmark-scale-results-out-of-scope (optional live smoke: down_live_smoke)",
         benchmark_scale_disclaimer},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Check check;
        try {
            criterion.fn(check);
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail = std::string("exception: ") + e.what();
        }
        if (check.ok) {
            std::printf("[PASS] %s\n", criterion.name);
        } else {
            ++failures;
            std::printf("[FAIL] %s: %s\n", criterion.name, check.detail.c_str());
        }
    }
    if (failures) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
