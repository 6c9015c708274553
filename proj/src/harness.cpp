#include "harness.hpp"

#include "answer.hpp"
#include "errors.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

namespace down {

using nlohmann::json;

std::vector<Query> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dataset_error("cannot open dataset file: " + path);
    std::vector<Query> queries;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Query q;
        try {
            q = query_from_json(line);
        } catch (const Error& e) {
            throw dataset_error(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::string where = path + " line " + std::to_string(line_no);
        if (q.id.empty()) throw dataset_error(where + ": empty query id");
        if (q.text.empty()) throw dataset_error(where + ": empty query text");
        if (!seen_ids.insert(q.id).second) {
            throw dataset_error(where + ": duplicate query id '" + q.id + "'");
        }
        if (q.choices) {
            if (q.choices->empty()) throw dataset_error(where + ": empty choices array");
            if (q.gold && is_unparseable(normalize_answer(*q.gold, q.choices))) {
                throw dataset_error(where + ": gold '" + *q.gold +
                                    "' does not match any choice");
            }
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

namespace {

std::unordered_map<std::string, const Query*> index_queries(std::span<const Query> queries) {
    std::unordered_map<std::string, const Query*> by_id;
    for (const auto& q : queries) by_id.emplace(q.id, &q);
    return by_id;
}

const Query& matching_query(const std::unordered_map<std::string, const Query*>& by_id,
                            const Transcript& t) {
    const auto it = by_id.find(t.query_id);
    if (it == by_id.end()) {
        throw dataset_error("transcript references unknown query id '" + t.query_id + "'");
    }
    return *it->second;
}

std::string gold_answer(const Query& q) {
    if (!q.gold) throw dataset_error("query '" + q.id + "' has no gold answer");
    return normalize_answer(*q.gold, q.choices);
}

} // namespace

Metrics evaluate(std::span<const Transcript> transcripts, std::span<const Query> queries) {
    const auto by_id = index_queries(queries);
    Metrics m;
    int64_t correct = 0;
    int64_t skipped = 0;
    double total_calls = 0.0;
    for (const auto& t : transcripts) {
        const Query& q = matching_query(by_id, t);
        if (t.failed()) {
            ++m.failures;
            continue;
        }
        ++m.n;
        if (t.final_answer == gold_answer(q)) ++correct;
        if (t.skipped) ++skipped;
        total_calls += t.agent_calls;
    }
    if (m.n > 0) {
        m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n);
        m.skip_rate = static_cast<double>(skipped) / static_cast<double>(m.n);
        m.avg_agent_calls = total_calls / static_cast<double>(m.n);
    }
    return m;
}

ShiftReport shift_analysis(std::span<const Transcript> transcripts,
                           std::span<const Query> queries) {
    const auto by_id = index_queries(queries);
    ShiftReport report;
    for (const auto& t : transcripts) {
        const Query& q = matching_query(by_id, t);
        if (t.failed()) continue;
        const AgentResponse* initial = t.initial_response();
        if (!initial) continue;
        if (initial->answer == t.final_answer) continue;
        ++report.changed;
        const std::string gold = gold_answer(q);
        const bool initial_correct = initial->answer == gold;
        const bool final_correct = t.final_answer == gold;
        if (initial_correct && !final_correct) ++report.correct_to_incorrect;
        if (!initial_correct && final_correct) ++report.incorrect_to_correct;
    }
    const int64_t classified = report.correct_to_incorrect + report.incorrect_to_correct;
    if (classified > 0) {
        report.pct_c2i =
            100.0 * static_cast<double>(report.correct_to_incorrect) / static_cast<double>(classified);
        report.pct_i2c =
            100.0 * static_cast<double>(report.incorrect_to_correct) / static_cast<double>(classified);
    }
    return report;
}

std::string metrics_to_json(const Metrics& m) {
    return json{{"accuracy", m.accuracy},
                {"avg_agent_calls", m.avg_agent_calls},
                {"skip_rate", m.skip_rate},
                {"n", m.n},
                {"failures", m.failures}}
        .dump();
}

std::string metrics_table(const Metrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%12s %12s %12s %8s %10s\n"
                  "%12.4f %12.4f %12.4f %8lld %10lld\n",
                  "accuracy", "avg_calls", "skip_rate", "n", "failures", m.accuracy,
                  m.avg_agent_calls, m.skip_rate, static_cast<long long>(m.n),
                  static_cast<long long>(m.failures));
    return buf;
}

std::string shift_report_to_json(const ShiftReport& r) {
    return json{{"changed", r.changed},
                {"correct_to_incorrect", r.correct_to_incorrect},
                {"incorrect_to_correct", r.incorrect_to_correct},
                {"pct_c2i", r.pct_c2i},
                {"pct_i2c", r.pct_i2c}}
        .dump();
}

std::string shift_report_table(const ShiftReport& r) {
    if (r.changed == 0) return "no changes: every final answer matches its initial answer\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "changed answers:     %lld\n"
                  "correct->incorrect:  %lld (%.2f%%)\n"
                  "incorrect->correct:  %lld (%.2f%%)\n",
                  static_cast<long long>(r.changed),
                  static_cast<long long>(r.correct_to_incorrect), r.pct_c2i,
                  static_cast<long long>(r.incorrect_to_correct), r.pct_i2c);
    return buf;
}

std::string transcripts_to_jsonl(std::span<const Transcript> transcripts) {
    std::string out;
    for (const auto& t : transcripts) {
        out += transcript_to_json(t);
        out += '\n';
    }
    return out;
}

std::vector<Transcript> transcripts_from_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open transcripts file: " + path);
    std::vector<Transcript> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(transcript_from_json(line));
        } catch (const Error& e) {
            throw parse_error(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open output file: " + path);
    out << content;
    if (!out) throw io_error("failed writing to: " + path);
}

} // namespace down
