#include "qlm/scenario_json.hpp"

#include <filesystem>

#include "json.hpp"
#include "qlm/rng.hpp"

namespace qlm {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void config_fail(const std::string& key, const std::string& why) {
    throw_error(ErrorCode::Config, "config key '" + key + "': " + why);
}

// `label` is the dotted path used in error messages; `key` is the actual
// member name looked up in the object.
const ordered_json& need(const ordered_json& j, const std::string& key, const std::string& label) {
    auto it = j.find(key);
    if (it == j.end()) config_fail(label, "missing");
    return *it;
}
const ordered_json& need(const ordered_json& j, const std::string& key) { return need(j, key, key); }

std::int64_t need_int(const ordered_json& j, const std::string& key, const std::string& label) {
    const ordered_json& v = need(j, key, label);
    if (!v.is_number_integer()) config_fail(label, "expected an integer");
    return v.get<std::int64_t>();
}

std::int64_t int_or(const ordered_json& j, const std::string& key, std::int64_t fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_integer()) config_fail(key, "expected an integer");
    return it->get<std::int64_t>();
}

double need_num(const ordered_json& j, const std::string& key, const std::string& label) {
    const ordered_json& v = need(j, key, label);
    if (!v.is_number()) config_fail(label, "expected a number");
    return v.get<double>();
}
double need_num(const ordered_json& j, const std::string& key) { return need_num(j, key, key); }

std::string need_str(const ordered_json& j, const std::string& key, const std::string& label) {
    const ordered_json& v = need(j, key, label);
    if (!v.is_string()) config_fail(label, "expected a string");
    return v.get<std::string>();
}
std::string need_str(const ordered_json& j, const std::string& key) { return need_str(j, key, key); }

Rational rational_field(const ordered_json& j, const std::string& key, const std::string& label) {
    const ordered_json& v = need(j, key, label);
    try {
        if (v.is_string()) return Rational::parse(v.get<std::string>());
        if (v.is_number()) return Rational::from_double(v.get<double>());
    } catch (const Error& e) {
        config_fail(label, e.what());
    }
    config_fail(label, "expected a number or decimal string");
}
Rational rational_field(const ordered_json& j, const std::string& key) {
    return rational_field(j, key, key);
}

ProcessSpec process_from_json(const ordered_json& j, const std::string& key,
                              const Rational& default_eps, const std::string& base_dir) {
    if (j.is_string() && j.get<std::string>() == "coupled") {
        ProcessSpec s;
        s.kind = ProcessKind::Coupled;
        return s;
    }
    if (!j.is_object()) config_fail(key, "expected an object or \"coupled\"");
    ProcessSpec s;
    std::string kind = need_str(j, "kind", key + ".kind");
    if (kind == "constant_rate") {
        s.kind = ProcessKind::ConstantRate;
        s.rate = int_or(j, "rate", 1);
        if (s.rate < 1) config_fail(key + ".rate", "must be >= 1");
    } else if (kind == "poisson") {
        s.kind = ProcessKind::Poisson;
        s.poisson_rate = need_num(j, "rate", key + ".rate");
        if (!(s.poisson_rate > 0)) config_fail(key + ".rate", "must be positive");
    } else if (kind == "replay") {
        s.kind = ProcessKind::Replay;
        s.replay_path = need_str(j, "path", key + ".path");
        std::filesystem::path p(s.replay_path);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        s.fragment = read_trace_csv(p.string());
    } else if (kind == "phase_lb_departures" || kind == "phase_lb_arrivals") {
        s.kind = kind == "phase_lb_departures" ? ProcessKind::PhaseLbDepartures
                                               : ProcessKind::PhaseLbArrivals;
        s.h = need_int(j, "h", key + ".h");
        s.phases = need_int(j, "phases", key + ".phases");
        s.epsilon = j.contains("epsilon") ? rational_field(j, "epsilon", key + ".epsilon")
                                          : default_eps;
    } else if (kind == "bursty_iid") {
        s.kind = ProcessKind::BurstyIid;
        s.h = need_int(j, "h", key + ".h");
        s.steps = int_or(j, "steps", 0);
    } else if (kind == "eg1") {
        s.kind = ProcessKind::ScenarioEg1;
        s.h = need_int(j, "h", key + ".h");
        std::string variant = need_str(j, "variant", key + ".variant");
        if (variant == "all_depart") s.eg1_variant = Eg1Variant::AllDepart;
        else if (variant == "one_stays") s.eg1_variant = Eg1Variant::OneStays;
        else config_fail(key + ".variant", "expected all_depart or one_stays");
    } else if (kind == "eg3") {
        s.kind = ProcessKind::ScenarioEg3;
        s.h = need_int(j, "h", key + ".h");
        const ordered_json& bits = need(j, "choices", key + ".choices");
        if (!bits.is_array()) config_fail(key + ".choices", "expected an array of 0/1");
        for (const auto& b : bits) s.eg3_choices.push_back(b.get<int>() ? 1 : 0);
    } else if (kind == "coupled") {
        s.kind = ProcessKind::Coupled;
    } else {
        config_fail(key + ".kind", "unknown process kind '" + kind + "'");
    }
    return s;
}

ordered_json process_to_json(const ProcessSpec& s) {
    ordered_json j;
    switch (s.kind) {
        case ProcessKind::ConstantRate:
            j["kind"] = "constant_rate";
            j["rate"] = s.rate;
            break;
        case ProcessKind::Poisson:
            j["kind"] = "poisson";
            j["rate"] = s.poisson_rate;
            break;
        case ProcessKind::Replay:
            j["kind"] = "replay";
            j["path"] = s.replay_path;
            break;
        case ProcessKind::PhaseLbDepartures:
        case ProcessKind::PhaseLbArrivals:
            j["kind"] = s.kind == ProcessKind::PhaseLbDepartures ? "phase_lb_departures"
                                                                 : "phase_lb_arrivals";
            j["h"] = s.h;
            j["phases"] = s.phases;
            j["epsilon"] = s.epsilon.to_string();
            break;
        case ProcessKind::BurstyIid:
            j["kind"] = "bursty_iid";
            j["h"] = s.h;
            if (s.steps > 0) j["steps"] = s.steps;
            break;
        case ProcessKind::ScenarioEg1:
            j["kind"] = "eg1";
            j["h"] = s.h;
            j["variant"] = s.eg1_variant == Eg1Variant::AllDepart ? "all_depart" : "one_stays";
            break;
        case ProcessKind::ScenarioEg3: {
            j["kind"] = "eg3";
            j["h"] = s.h;
            ordered_json bits = ordered_json::array();
            for (std::uint8_t b : s.eg3_choices) bits.push_back(static_cast<int>(b));
            j["choices"] = bits;
            break;
        }
        case ProcessKind::Coupled:
            j["kind"] = "coupled";
            break;
    }
    return j;
}

ordered_json scenario_to_json(const Scenario& sc) {
    ordered_json j;
    switch (sc.policy.kind) {
        case PolicyKind::PoaDep: j["policy"] = "poa_dep"; break;
        case PolicyKind::PoaArr: j["policy"] = "poa_arr"; break;
        case PolicyKind::Pico: j["policy"] = "pico"; break;
        case PolicyKind::ScaledPoa: j["policy"] = "scaled_poa"; break;
    }
    j["epsilon"] = sc.policy.epsilon.to_string();
    if (sc.policy.kind == PolicyKind::ScaledPoa) j["scale_c"] = sc.policy.scale_c;
    switch (sc.estimator) {
        case EstimatorKind::Extrapolating: j["estimator"] = "extrapolating"; break;
        case EstimatorKind::Hold: j["estimator"] = "hold"; break;
        case EstimatorKind::PoissonTick: j["estimator"] = "poisson_tick"; break;
        case EstimatorKind::Pico: j["estimator"] = "pico"; break;
    }
    if (sc.tick_rate > 0) j["tick_rate"] = sc.tick_rate;
    if (sc.horizon > 0) j["horizon"] = sc.horizon;
    j["arrival"] = process_to_json(sc.arrival);
    j["departure"] = process_to_json(sc.departure);
    return j;
}

Scenario scenario_from_json(const ordered_json& j, const std::string& base_dir) {
    Scenario sc;
    std::string policy = need_str(j, "policy");
    if (policy == "poa_dep") sc.policy.kind = PolicyKind::PoaDep;
    else if (policy == "poa_arr") sc.policy.kind = PolicyKind::PoaArr;
    else if (policy == "pico") sc.policy.kind = PolicyKind::Pico;
    else if (policy == "scaled_poa") sc.policy.kind = PolicyKind::ScaledPoa;
    else config_fail("policy", "unknown policy '" + policy + "'");
    sc.policy.epsilon = rational_field(j, "epsilon");
    if (sc.policy.kind == PolicyKind::ScaledPoa) sc.policy.scale_c = need_num(j, "scale_c");

    std::string est = need_str(j, "estimator");
    if (est == "extrapolating") sc.estimator = EstimatorKind::Extrapolating;
    else if (est == "hold") sc.estimator = EstimatorKind::Hold;
    else if (est == "poisson_tick") sc.estimator = EstimatorKind::PoissonTick;
    else if (est == "pico") sc.estimator = EstimatorKind::Pico;
    else config_fail("estimator", "unknown estimator '" + est + "'");

    if (j.contains("tick_rate")) sc.tick_rate = need_num(j, "tick_rate");
    if (j.contains("horizon")) sc.horizon = need_num(j, "horizon");
    sc.arrival = process_from_json(need(j, "arrival"), "arrival", sc.policy.epsilon, base_dir);
    if (j.contains("departure")) {
        sc.departure = process_from_json(need(j, "departure"), "departure", sc.policy.epsilon,
                                         base_dir);
    } else {
        sc.departure.kind = ProcessKind::Coupled;
    }
    if (!sc.arrival.joint() && sc.departure.kind == ProcessKind::Coupled)
        config_fail("departure", "required unless the arrival kind generates the whole trace");
    return sc;
}

}  // namespace

RunConfig config_from_json_text(const std::string& text, const std::string& base_dir) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw_error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw_error(ErrorCode::Config, "config must be a JSON object");
    RunConfig cfg;
    cfg.scenario = scenario_from_json(j, base_dir);
    cfg.trials = int_or(j, "trials", 100);
    if (cfg.trials < 1) config_fail("trials", "must be >= 1");
    if (j.contains("seed")) {
        const ordered_json& v = j["seed"];
        if (!v.is_number_integer() && !v.is_number_unsigned()) config_fail("seed", "expected an integer");
        cfg.seed = v.get<std::uint64_t>();
    }
    cfg.threads = static_cast<int>(int_or(j, "threads", 0));
    validate_scenario(cfg.scenario);
    return cfg;
}

std::string scenario_to_json_text(const Scenario& scenario) {
    return scenario_to_json(scenario).dump();
}

std::string config_to_json_text(const RunConfig& config) {
    ordered_json j = scenario_to_json(config.scenario);
    j["trials"] = config.trials;
    j["seed"] = config.seed;
    if (config.threads > 0) j["threads"] = config.threads;
    return j.dump();
}

std::uint64_t scenario_hash(const Scenario& scenario) {
    std::string text = scenario_to_json_text(scenario);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string make_meta_json(const RunConfig& config) {
    ordered_json meta;
    meta["rng"] = rng_identity();
    meta["seed_scheme"] = "trial i uses seed base_seed+i; streams derive as "
                          "splitmix64(mix(seed, tag[, packet_id]))";
    meta["base_seed"] = config.seed;
    meta["trials"] = config.trials;
    meta["threads"] = config.threads;
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(scenario_hash(config.scenario)));
    meta["scenario_hash"] = hex;
    meta["scenario"] = ordered_json::parse(scenario_to_json_text(config.scenario));
    return meta.dump(2);
}

}  // namespace qlm
