#pragma once

#include "backend.hpp"
#include "config.hpp"
#include "harness.hpp"
#include "protocols.hpp"

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace down {

// Owns the instantiated backends and drives protocols over datasets.
class Engine {
public:
    explicit Engine(EngineConfig cfg);

    const EngineConfig& config() const { return cfg_; }

    // Applies a runtime override (see apply_config_override) and re-resolves
    // the agent pool against the built backends.
    void set_option(const std::string& key, const std::string& value);

    // Runs one protocol over one query with the per-query derived seed.
    Transcript run_query(const Query& query, const std::string& protocol);

    // Order-stable batch execution, fanned out up to run.max_inflight.
    std::vector<Transcript> run_batch(std::span<const Query> queries,
                                      const std::string& protocol);

    // Runs the initial turn once per query, then replays the engagement gate
    // for every candidate threshold, generating the debate continuation at
    // most once per query.
    std::vector<ThresholdStats> sweep_thresholds(std::span<const Query> queries,
                                                 std::span<const double> thetas);

private:
    std::vector<Backend*> agents_for(const Query& query) const;
    Backend& backend_by_tag(const std::string& tag) const;

    EngineConfig cfg_;
    std::unordered_map<std::string, std::unique_ptr<Backend>> backends_;
};

bool is_known_protocol(const std::string& protocol);

} // namespace down
