#include "qlm.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"
#include "qlm/demos.hpp"
#include "qlm/engine.hpp"
#include "qlm/rng.hpp"
#include "qlm/scenario_json.hpp"

struct qlm_scenario {
    qlm::RunConfig config;
};

struct qlm_summary {
    qlm::ExperimentSummary summary;
    std::string csv;
    std::string jsonl;
    std::string meta;
};

struct qlm_demo_report {
    qlm::DemoReport report;
};

namespace {

thread_local std::string g_last_error;

qlm_status status_of(const qlm::Error& e) {
    switch (e.code()) {
        case qlm::ErrorCode::InvalidArgument: return QLM_ERR_INVALID_ARGUMENT;
        case qlm::ErrorCode::Config: return QLM_ERR_CONFIG;
        case qlm::ErrorCode::ModeMismatch: return QLM_ERR_MODE_MISMATCH;
        case qlm::ErrorCode::ParameterOutOfRange: return QLM_ERR_PARAMETER_OUT_OF_RANGE;
        case qlm::ErrorCode::InfeasibleSchedule: return QLM_ERR_INFEASIBLE_SCHEDULE;
        case qlm::ErrorCode::InconsistentProfile: return QLM_ERR_INCONSISTENT_PROFILE;
        case qlm::ErrorCode::LengthMismatch: return QLM_ERR_LENGTH_MISMATCH;
        case qlm::ErrorCode::Io: return QLM_ERR_IO;
        case qlm::ErrorCode::Runtime: return QLM_ERR_RUNTIME;
    }
    return QLM_ERR_RUNTIME;
}

template <typename Fn>
qlm_status guarded(Fn&& fn) {
    try {
        fn();
        return QLM_OK;
    } catch (const qlm::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QLM_ERR_RUNTIME;
    } catch (...) {
        g_last_error = "unknown error";
        return QLM_ERR_RUNTIME;
    }
}

qlm_status fail_invalid(const char* msg) {
    g_last_error = msg;
    return QLM_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* qlm_version(void) { return "1.0.0"; }

const char* qlm_rng_identity(void) { return qlm::kRngIdentity; }

const char* qlm_status_name(qlm_status status) {
    switch (status) {
        case QLM_OK: return "ok";
        case QLM_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case QLM_ERR_CONFIG: return "config_error";
        case QLM_ERR_MODE_MISMATCH: return "mode_mismatch";
        case QLM_ERR_PARAMETER_OUT_OF_RANGE: return "parameter_out_of_range";
        case QLM_ERR_INFEASIBLE_SCHEDULE: return "infeasible_schedule";
        case QLM_ERR_INCONSISTENT_PROFILE: return "inconsistent_profile";
        case QLM_ERR_LENGTH_MISMATCH: return "length_mismatch";
        case QLM_ERR_IO: return "io_error";
        case QLM_ERR_RUNTIME: return "runtime_error";
    }
    return "unknown";
}

const char* qlm_last_error(void) { return g_last_error.c_str(); }

void qlm_string_free(char* s) { delete[] s; }

qlm_status qlm_scenario_parse(const char* json, const char* base_dir, qlm_scenario** out) {
    if (!json || !out) return fail_invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<qlm_scenario>();
        handle->config = qlm::config_from_json_text(json, base_dir ? base_dir : "");
        *out = handle.release();
    });
}

void qlm_scenario_free(qlm_scenario* scenario) { delete scenario; }

qlm_status qlm_scenario_canonical_json(const qlm_scenario* scenario, char** out) {
    if (!scenario || !out) return fail_invalid("null argument");
    return guarded([&] { *out = dup_string(qlm::config_to_json_text(scenario->config)); });
}

int64_t qlm_scenario_trials(const qlm_scenario* scenario) {
    return scenario ? scenario->config.trials : 0;
}

uint64_t qlm_scenario_seed(const qlm_scenario* scenario) {
    return scenario ? scenario->config.seed : 0;
}

int qlm_scenario_threads(const qlm_scenario* scenario) {
    return scenario ? scenario->config.threads : 0;
}

qlm_status qlm_scenario_override(qlm_scenario* scenario, const char* field, const char* value) {
    if (!scenario || !field || !value) return fail_invalid("null argument");
    return guarded([&] {
        // Mutate a copy so a failed override leaves the handle untouched.
        qlm::RunConfig cfg = scenario->config;
        std::string f = field;
        std::string v = value;
        if (f == "seed") {
            cfg.seed = std::stoull(v);
        } else if (f == "trials") {
            cfg.trials = std::stoll(v);
            if (cfg.trials < 1) qlm::throw_error(qlm::ErrorCode::Config, "key 'trials': must be >= 1");
        } else if (f == "threads") {
            cfg.threads = std::stoi(v);
        } else if (f == "epsilon") {
            qlm::Rational eps = qlm::Rational::parse(v);
            cfg.scenario.policy.epsilon = eps;
            for (qlm::ProcessSpec* side : {&cfg.scenario.arrival, &cfg.scenario.departure}) {
                if (side->kind == qlm::ProcessKind::PhaseLbDepartures ||
                    side->kind == qlm::ProcessKind::PhaseLbArrivals)
                    side->epsilon = eps;
            }
        } else if (f == "h") {
            bool applied = false;
            for (qlm::ProcessSpec* side : {&cfg.scenario.arrival, &cfg.scenario.departure}) {
                switch (side->kind) {
                    case qlm::ProcessKind::PhaseLbDepartures:
                    case qlm::ProcessKind::PhaseLbArrivals:
                    case qlm::ProcessKind::BurstyIid:
                    case qlm::ProcessKind::ScenarioEg1:
                    case qlm::ProcessKind::ScenarioEg3:
                        side->h = std::stoll(v);
                        applied = true;
                        break;
                    default:
                        break;
                }
            }
            if (!applied)
                qlm::throw_error(qlm::ErrorCode::Config,
                                 "key 'arrival.h': the configured processes have no h parameter");
        } else if (f == "horizon") {
            cfg.scenario.horizon = std::stod(v);
        } else {
            qlm::throw_error(qlm::ErrorCode::Config, "unknown override field '" + f + "'");
        }
        qlm::validate_scenario(cfg.scenario);
        scenario->config = std::move(cfg);
    });
}

qlm_status qlm_run_experiment(const qlm_scenario* scenario, int64_t trials, uint64_t base_seed,
                              int threads, qlm_summary** out) {
    if (!scenario || !out) return fail_invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<qlm_summary>();
        handle->summary = qlm::run_experiment(scenario->config.scenario, trials, base_seed, threads);
        handle->csv = qlm::summary_csv_header() + qlm::summary_csv_row(handle->summary, "run");
        handle->jsonl = qlm::trials_jsonl(handle->summary);
        qlm::RunConfig echo = scenario->config;
        echo.trials = trials;
        echo.seed = base_seed;
        echo.threads = threads;
        handle->meta = qlm::make_meta_json(echo);
        *out = handle.release();
    });
}

void qlm_summary_free(qlm_summary* summary) { delete summary; }

qlm_status qlm_summary_csv(const qlm_summary* summary, const char** out) {
    if (!summary || !out) return fail_invalid("null argument");
    *out = summary->csv.c_str();
    return QLM_OK;
}

qlm_status qlm_summary_trials_jsonl(const qlm_summary* summary, const char** out) {
    if (!summary || !out) return fail_invalid("null argument");
    *out = summary->jsonl.c_str();
    return QLM_OK;
}

qlm_status qlm_summary_meta_json(const qlm_summary* summary, const char** out) {
    if (!summary || !out) return fail_invalid("null argument");
    *out = summary->meta.c_str();
    return QLM_OK;
}

int64_t qlm_summary_num_trials(const qlm_summary* summary) {
    return summary ? summary->summary.n_trials : 0;
}

double qlm_summary_mean(const qlm_summary* summary, const char* field) {
    if (!summary || !field) return std::nan("");
    auto it = summary->summary.stats.find(field);
    if (it == summary->summary.stats.end() || !it->second.present) return std::nan("");
    return it->second.mean;
}

double qlm_summary_stderr(const qlm_summary* summary, const char* field) {
    if (!summary || !field) return std::nan("");
    auto it = summary->summary.stats.find(field);
    if (it == summary->summary.stats.end() || !it->second.present) return std::nan("");
    return it->second.se;
}

qlm_status qlm_trial_trajectory_csv(const qlm_scenario* scenario, uint64_t seed, char** out) {
    if (!scenario || !out) return fail_invalid("null argument");
    return guarded(
        [&] { *out = dup_string(qlm::trajectory_csv(scenario->config.scenario, seed)); });
}

qlm_status qlm_demo_run(const char* name, const char* params_json, qlm_demo_report** out) {
    if (!name || !out) return fail_invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        nlohmann::json p = nlohmann::json::object();
        if (params_json && params_json[0] != '\0') {
            try {
                p = nlohmann::json::parse(params_json);
            } catch (const std::exception& e) {
                qlm::throw_error(qlm::ErrorCode::Config,
                                 std::string("demo params are not valid JSON: ") + e.what());
            }
        }
        auto geti = [&](const char* key, std::int64_t fallback) {
            return p.contains(key) ? p[key].get<std::int64_t>() : fallback;
        };
        auto getu = [&](const char* key, std::uint64_t fallback) {
            return p.contains(key) ? p[key].get<std::uint64_t>() : fallback;
        };
        auto geteps = [&](const char* fallback) {
            if (!p.contains("eps")) return qlm::Rational::parse(fallback);
            if (p["eps"].is_string()) return qlm::Rational::parse(p["eps"].get<std::string>());
            return qlm::Rational::from_double(p["eps"].get<double>());
        };
        std::string demo = name;
        std::int64_t seeds = geti("seeds", 200);
        std::uint64_t seed = getu("seed", 1);
        int threads = static_cast<int>(geti("threads", 0));

        auto handle = std::make_unique<qlm_demo_report>();
        if (demo == "lb-dep") {
            handle->report = qlm::demo_lb_departures(geti("h", 1000), geteps("0.05"),
                                                     geti("phases", 500), seeds, seed, threads);
        } else if (demo == "lb-arr") {
            handle->report = qlm::demo_lb_arrivals(geti("h", 1000), geteps("0.05"),
                                                   geti("phases", 500), seeds, seed, threads);
        } else if (demo == "poa-insufficiency") {
            handle->report = qlm::demo_poa_insufficiency(geti("h", 100), geti("steps", 20000),
                                                         geteps("0.1"), seeds, seed, threads);
        } else if (demo == "eg1") {
            handle->report = qlm::demo_eg1(geti("h", 50), geteps("0.1"));
        } else if (demo == "eg3") {
            handle->report = qlm::demo_eg3(geti("h", 10), geteps("0.1"),
                                           std::min<std::int64_t>(seeds, 100), seed, threads);
        } else {
            qlm::throw_error(qlm::ErrorCode::Config, "unknown demo '" + demo + "'");
        }
        *out = handle.release();
    });
}

void qlm_demo_report_free(qlm_demo_report* report) { delete report; }

qlm_status qlm_demo_report_csv(const qlm_demo_report* report, const char** out) {
    if (!report || !out) return fail_invalid("null argument");
    *out = report->report.csv.c_str();
    return QLM_OK;
}

qlm_status qlm_demo_report_verdict(const qlm_demo_report* report, const char** out) {
    if (!report || !out) return fail_invalid("null argument");
    *out = report->report.verdict.c_str();
    return QLM_OK;
}

int qlm_demo_report_pass(const qlm_demo_report* report) {
    return report && report->report.pass ? 1 : 0;
}

}  // extern "C"
