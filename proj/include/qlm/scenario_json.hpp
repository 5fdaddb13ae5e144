#pragma once

#include <cstdint>
#include <string>

#include "qlm/engine.hpp"

namespace qlm {

// A scenario plus the runner knobs carried in the same config object.
struct RunConfig {
    Scenario scenario;
    std::int64_t trials = 100;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 -> available parallelism
};

// Parses a config/scenario JSON object. Unknown or ill-typed keys raise
// Config errors naming the key. `base_dir` anchors relative replay paths.
RunConfig config_from_json_text(const std::string& text, const std::string& base_dir = "");

// Canonical echo of the scenario (stable key order); re-parses to an
// identical scenario.
std::string scenario_to_json_text(const Scenario& scenario);
std::string config_to_json_text(const RunConfig& config);

// FNV-1a over the canonical scenario text.
std::uint64_t scenario_hash(const Scenario& scenario);

// Run metadata: seed scheme, generator identity, scenario echo + hash.
std::string make_meta_json(const RunConfig& config);

}  // namespace qlm
