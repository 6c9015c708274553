// Exercises the shared-library surface exactly as an FFI consumer would:
// only include/down.h, opaque handles, status codes, and JSON strings.

#include "down.h"

#include "doctest.h"
#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>

#include "testutil.hpp"

using nlohmann::json;
using testutil::ScriptBuilder;
using testutil::TempDir;

namespace {

struct Handles {
    down_engine* engine = nullptr;
    down_dataset* dataset = nullptr;
    down_batch* batch = nullptr;
    ~Handles() {
        down_batch_close(batch);
        down_dataset_close(dataset);
        down_engine_close(engine);
    }
};

std::string take(char* ptr) {
    std::string out = ptr ? ptr : "";
    down_free(ptr);
    return out;
}

// A complete scripted setup for q1..q3 with confidences {0.95, 0.5, 0.85}.
std::string make_config(TempDir& dir) {
    ScriptBuilder script;
    const double confidences[] = {0.95, 0.5, 0.85};
    for (int i = 1; i <= 3; ++i) {
        const std::string qid = "q" + std::to_string(i);
        script.add(qid, 1, 1, "initial", "Yes", confidences[i - 1]);
        script.add(qid, 2, 1, "initial", "Yes", 0.7);
        script.add(qid, 3, 1, "initial", "No", 0.6);
        for (int agent = 1; agent <= 3; ++agent) script.add(qid, agent, 2, "update", "Yes", 0.9);
        script.add(qid, 4, 3, "judge", "Yes");
    }
    script.write(dir.file("script.jsonl"));

    const json config{
        {"run", {{"threshold", 0.8}, {"seed", 7}, {"max_inflight", 2}}},
        {"backends",
         json::array({{{"tag", "scripted"},
                       {"type", "scripted"},
                       {"script", dir.file("script.jsonl")}}})},
    };
    return testutil::write_file(dir.file("config.json"), config.dump());
}

std::string make_dataset(TempDir& dir) {
    std::string lines;
    for (int i = 1; i <= 3; ++i) {
        lines += testutil::dataset_line("q" + std::to_string(i), "question?", "yes");
    }
    return testutil::write_file(dir.file("dataset.jsonl"), lines);
}

} // namespace

TEST_CASE("version and null-argument handling") {
    CHECK(std::string(down_version()).find('.') != std::string::npos);
    CHECK(down_engine_open(nullptr, nullptr) == DOWN_ERR_INVALID_ARGUMENT);
    CHECK(down_dataset_open(nullptr, nullptr) == DOWN_ERR_INVALID_ARGUMENT);
    double out = 0.0;
    CHECK(down_wilson_lower_bound(1, 1, 1.0, nullptr) == DOWN_ERR_INVALID_ARGUMENT);
    CHECK(down_wilson_lower_bound(1, 0, 1.0, &out) == DOWN_ERR_INVALID_ARGUMENT);
    CHECK(std::string(down_last_error()).size() > 0);
}

TEST_CASE("wilson primitive through the C boundary") {
    double out = 0.0;
    REQUIRE(down_wilson_lower_bound(163, 229, 1.645, &out) == DOWN_OK);
    CHECK(std::abs(out - 0.66030733855165839798) <= 1e-12);
    REQUIRE(down_wilson_lower_bound(0, 229, 1.645, &out) == DOWN_OK);
    CHECK(out == 0.0);
}

TEST_CASE("engine and dataset lifecycle with error codes") {
    TempDir dir("capi");
    Handles h;

    CHECK(down_engine_open(dir.file("missing.json").c_str(), &h.engine) == DOWN_ERR_CONFIG);
    testutil::write_file(dir.file("broken.json"), "{not json");
    CHECK(down_engine_open(dir.file("broken.json").c_str(), &h.engine) == DOWN_ERR_CONFIG);

    const auto config_path = make_config(dir);
    REQUIRE(down_engine_open(config_path.c_str(), &h.engine) == DOWN_OK);

    CHECK(down_dataset_open(dir.file("absent.jsonl").c_str(), &h.dataset) == DOWN_ERR_DATASET);
    CHECK(std::string(down_last_error()).find("absent.jsonl") != std::string::npos);
    REQUIRE(down_dataset_open(make_dataset(dir).c_str(), &h.dataset) == DOWN_OK);
    CHECK(down_dataset_size(h.dataset) == 3);
}

TEST_CASE("config echo and option overrides") {
    TempDir dir("capi");
    Handles h;
    REQUIRE(down_engine_open(make_config(dir).c_str(), &h.engine) == DOWN_OK);

    char* cfg_text = nullptr;
    REQUIRE(down_engine_config_json(h.engine, &cfg_text) == DOWN_OK);
    json cfg = json::parse(take(cfg_text));
    CHECK(cfg["run"]["threshold"] == 0.8);
    CHECK(cfg["run"]["seed"] == 7);

    CHECK(down_engine_set(h.engine, "threshold", "0.9") == DOWN_OK);
    CHECK(down_engine_set(h.engine, "aggregation", "judge") == DOWN_OK);
    CHECK(down_engine_set(h.engine, "seed", "99") == DOWN_OK);
    REQUIRE(down_engine_config_json(h.engine, &cfg_text) == DOWN_OK);
    cfg = json::parse(take(cfg_text));
    CHECK(cfg["run"]["threshold"] == 0.9);
    CHECK(cfg["run"]["aggregation"] == "judge");
    CHECK(cfg["run"]["seed"] == 99);

    CHECK(down_engine_set(h.engine, "no_such_key", "1") == DOWN_ERR_INVALID_ARGUMENT);
    CHECK(down_engine_set(h.engine, "threshold", "not-a-number") == DOWN_ERR_CONFIG);
    CHECK(down_engine_set(h.engine, "backend", "unknown-tag") == DOWN_ERR_CONFIG);
}

TEST_CASE("runs, metrics, sweeps, selection, and shift reports") {
    TempDir dir("capi");
    Handles h;
    REQUIRE(down_engine_open(make_config(dir).c_str(), &h.engine) == DOWN_OK);
    REQUIRE(down_dataset_open(make_dataset(dir).c_str(), &h.dataset) == DOWN_OK);

    CHECK(down_run(h.engine, h.dataset, "no-such-protocol", &h.batch) == DOWN_ERR_CONFIG);
    REQUIRE(down_run(h.engine, h.dataset, "down", &h.batch) == DOWN_OK);

    char* out = nullptr;
    REQUIRE(down_batch_transcripts_jsonl(h.batch, &out) == DOWN_OK);
    const std::string jsonl = take(out);
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 3);
    const json first = json::parse(jsonl.substr(0, jsonl.find('\n')));
    CHECK(first["query_id"] == "q1");
    CHECK(first["skipped"] == true);
    CHECK(first["agent_calls"] == 1);

    REQUIRE(down_batch_metrics_json(h.batch, &out) == DOWN_OK);
    const json metrics = json::parse(take(out));
    // q1 (0.95) and q3 (0.85) skip at theta 0.8; q2 debates.
    CHECK(metrics["skip_rate"] == doctest::Approx(2.0 / 3.0));
    CHECK(metrics["avg_agent_calls"] == doctest::Approx((1.0 + 6.0 + 1.0) / 3.0));
    CHECK(metrics["accuracy"] == doctest::Approx(1.0));
    CHECK(metrics["n"] == 3);
    CHECK(metrics["failures"] == 0);

    REQUIRE(down_batch_metrics_table(h.batch, &out) == DOWN_OK);
    CHECK(take(out).find("accuracy") != std::string::npos);

    // Sweep + select round trip.
    REQUIRE(down_sweep(h.engine, h.dataset, &out) == DOWN_OK);
    const std::string stats_json = take(out);
    const json stats = json::parse(stats_json);
    REQUIRE(stats.size() == 3);  // default candidate set {0.7, 0.8, 0.9}
    CHECK(stats[0]["theta"] == 0.7);
    CHECK(stats[0]["m"] == 2);  // q1 (0.95) and q3 (0.85) clear 0.7
    CHECK(stats[1]["m"] == 2);
    CHECK(stats[2]["m"] == 1);  // only q1 clears 0.9

    REQUIRE(down_select_threshold(h.engine, stats_json.c_str(), &out) == DOWN_OK);
    const json selection = json::parse(take(out));
    CHECK(selection.contains("theta_star"));
    CHECK(selection["scores"].size() == 3);
    // Equal accuracy everywhere; 0.7 and 0.8 tie on skip rate and the tie
    // breaks toward the smaller theta.
    CHECK(selection["theta_star"] == 0.7);

    CHECK(down_select_threshold(h.engine, "[]", &out) == DOWN_ERR_INVALID_ARGUMENT);
    CHECK(down_select_threshold(h.engine, "nonsense", &out) == DOWN_ERR_PARSE);

    // Shift report over the saved transcripts.
    const std::string transcripts_path = dir.file("transcripts.jsonl");
    testutil::write_file(transcripts_path, jsonl);
    REQUIRE(down_shift_report(transcripts_path.c_str(), make_dataset(dir).c_str(), &out) ==
            DOWN_OK);
    const json shift = json::parse(take(out));
    CHECK(shift["changed"] == 0);  // every scripted final matches its initial answer
}

TEST_CASE("shift report rejects id mismatches with a dataset error") {
    TempDir dir("capi");
    const std::string transcripts_path = dir.file("t.jsonl");
    // A transcript for a query id the dataset does not contain.
    down::Transcript t;
    t.query_id = "ghost";
    t.protocol = "down";
    t.final_answer = "yes";
    t.agent_calls = 1;
    testutil::write_file(transcripts_path, down::transcript_to_json(t) + "\n");
    const std::string dataset_path =
        testutil::write_file(dir.file("d.jsonl"), testutil::dataset_line("real", "q", "yes"));

    char* out = nullptr;
    CHECK(down_shift_report(transcripts_path.c_str(), dataset_path.c_str(), &out) ==
          DOWN_ERR_DATASET);
}

TEST_CASE("a fully failing backend surfaces as DOWN_ERR_BACKEND") {
    TempDir dir("capi");
    // Scripted backend with an empty script: every query misses.
    testutil::write_file(dir.file("empty.jsonl"), "");
    const json config{
        {"backends",
         json::array({{{"tag", "scripted"},
                       {"type", "scripted"},
                       {"script", dir.file("empty.jsonl")}}})},
    };
    const auto config_path = testutil::write_file(dir.file("config.json"), config.dump());

    Handles h;
    REQUIRE(down_engine_open(config_path.c_str(), &h.engine) == DOWN_OK);
    REQUIRE(down_dataset_open(make_dataset(dir).c_str(), &h.dataset) == DOWN_OK);
    CHECK(down_run(h.engine, h.dataset, "down", &h.batch) == DOWN_ERR_BACKEND);
    CHECK(std::string(down_last_error()).find("missing script entry") != std::string::npos);
}
