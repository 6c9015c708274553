#include "types.hpp"

#include "errors.hpp"

#include "json.hpp"

namespace down {

using nlohmann::json;

std::string to_string(Aggregation a) {
    return a == Aggregation::vote ? "vote" : "judge";
}

std::string to_string(ConfidenceSource s) {
    return s == ConfidenceSource::token_prob ? "token_prob" : "verbalized";
}

Aggregation aggregation_from_string(const std::string& s) {
    if (s == "vote") return Aggregation::vote;
    if (s == "judge") return Aggregation::judge;
    throw config_error("unknown aggregation '" + s + "' (expected vote|judge)");
}

ConfidenceSource confidence_source_from_string(const std::string& s) {
    if (s == "token_prob") return ConfidenceSource::token_prob;
    if (s == "verbalized") return ConfidenceSource::verbalized;
    throw config_error("unknown confidence_source '" + s + "' (expected token_prob|verbalized)");
}

const AgentResponse* Transcript::initial_response() const {
    if (responses.empty() || responses.front().empty()) return nullptr;
    return &responses.front().front();
}

namespace {

json response_to_json(const AgentResponse& r) {
    return json{
        {"agent_id", r.agent_id},
        {"round", r.round},
        {"reason", r.reason},
        {"answer", r.answer},
        {"confidence", r.confidence},
        {"raw_text", r.raw_text},
        {"call_index", r.call_index},
    };
}

AgentResponse response_from_json(const json& j) {
    AgentResponse r;
    r.agent_id = j.at("agent_id").get<int>();
    r.round = j.at("round").get<int>();
    r.reason = j.at("reason").get<std::string>();
    r.answer = j.at("answer").get<std::string>();
    r.confidence = j.at("confidence").get<double>();
    r.raw_text = j.at("raw_text").get<std::string>();
    r.call_index = j.at("call_index").get<int>();
    return r;
}

} // namespace

std::string transcript_to_json(const Transcript& t) {
    json rounds = json::array();
    for (const auto& round : t.responses) {
        json one = json::array();
        for (const auto& r : round) one.push_back(response_to_json(r));
        rounds.push_back(std::move(one));
    }
    json j{
        {"query_id", t.query_id},
        {"protocol", t.protocol},
        {"skipped", t.skipped},
        {"responses", std::move(rounds)},
        {"final_answer", t.final_answer},
        {"agent_calls", t.agent_calls},
        {"seed", t.seed},
    };
    if (t.threshold_used) j["threshold_used"] = *t.threshold_used;
    if (t.judge_response) {
        j["judge_response"] = response_to_json(*t.judge_response);
        j["judge_fallback"] = t.judge_fallback;
    }
    if (t.failure) j["failure"] = *t.failure;
    return j.dump();
}

Transcript transcript_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw parse_error(std::string("bad transcript line: ") + e.what());
    }
    try {
        Transcript t;
        t.query_id = j.at("query_id").get<std::string>();
        t.protocol = j.at("protocol").get<std::string>();
        t.skipped = j.at("skipped").get<bool>();
        for (const auto& round : j.at("responses")) {
            std::vector<AgentResponse> one;
            for (const auto& r : round) one.push_back(response_from_json(r));
            t.responses.push_back(std::move(one));
        }
        t.final_answer = j.at("final_answer").get<std::string>();
        t.agent_calls = j.at("agent_calls").get<int>();
        t.seed = j.at("seed").get<uint64_t>();
        if (j.contains("threshold_used")) t.threshold_used = j["threshold_used"].get<double>();
        if (j.contains("judge_response")) {
            t.judge_response = response_from_json(j["judge_response"]);
            t.judge_fallback = j.value("judge_fallback", false);
        }
        if (j.contains("failure")) t.failure = j["failure"].get<std::string>();
        return t;
    } catch (const json::exception& e) {
        throw parse_error(std::string("bad transcript fields: ") + e.what());
    }
}

std::string query_to_json(const Query& q) {
    json j{{"id", q.id}, {"text", q.text}};
    if (q.choices) j["choices"] = *q.choices;
    if (q.gold) j["gold"] = *q.gold;
    return j.dump();
}

Query query_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw parse_error(std::string("bad query line: ") + e.what());
    }
    try {
        Query q;
        q.id = j.at("id").get<std::string>();
        q.text = j.at("text").get<std::string>();
        if (j.contains("choices") && !j["choices"].is_null()) {
            q.choices = j["choices"].get<std::vector<std::string>>();
        }
        if (j.contains("gold") && !j["gold"].is_null()) {
            q.gold = j["gold"].get<std::string>();
        }
        return q;
    } catch (const json::exception& e) {
        throw parse_error(std::string("bad query fields: ") + e.what());
    }
}

} // namespace down
