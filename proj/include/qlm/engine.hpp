#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qlm/core.hpp"
#include "qlm/estimators.hpp"
#include "qlm/metrics.hpp"
#include "qlm/policies.hpp"
#include "qlm/processes.hpp"

namespace qlm {

// A runnable (policy, estimator, instance) triple.
struct Scenario {
    ProcessSpec arrival;
    ProcessSpec departure;
    PolicyParams policy;
    EstimatorKind estimator = EstimatorKind::Extrapolating;
    double horizon = 0.0;   // nominal T for open-ended generators
    double tick_rate = 0.0; // PoissonTick server clock; 0 -> departure rate
};

// Raises Config/ParameterOutOfRange with the offending key in the message.
void validate_scenario(const Scenario& scenario);
TimeMode scenario_mode(const Scenario& scenario);

struct TrialOptions {
    bool keep_trajectory = false;
    bool keep_pings = false;       // continuous-pinging runs can emit millions
    bool keep_rectangles = false;
    bool keep_records = false;
    bool keep_profile = false;
};

struct TrialArtifacts {
    TrialResult result;
    Trace trace;
    HeightProfile profile;
    std::vector<PacketRecord> records;
    std::vector<double> estimates;  // aligned with profile.steps (discrete)
    std::vector<Ping> pings;
    std::vector<PicoRectangle> rectangles;
};

// One seeded pass: build the trace, drive packet decisions from their own
// derived streams using only (height ahead, waiting time), feed pings to the
// estimator as they happen, and score the estimate against the truth.
TrialResult run_trial(const Scenario& scenario, std::uint64_t seed);
TrialArtifacts run_trial_full(const Scenario& scenario, std::uint64_t seed,
                              const TrialOptions& options);

struct FieldStat {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean; 0 when n < 2
    bool present = false;
};

struct ExperimentSummary {
    std::int64_t n_trials = 0;
    std::vector<TrialResult> trials;  // ordered by seed offset
    std::map<std::string, FieldStat> stats;
};

// Trials run under seeds base_seed + i, independently and possibly in
// parallel; results are identical regardless of thread count.
ExperimentSummary run_experiment(const Scenario& scenario, std::int64_t n_trials,
                                 std::uint64_t base_seed, int threads);

// Aggregation helper, deterministic in trial order.
ExperimentSummary summarize(std::vector<TrialResult> trials);

std::string summary_csv_header();
std::string summary_csv_row(const ExperimentSummary& summary, const std::string& label);
std::string trials_jsonl(const ExperimentSummary& summary);

// `time,estimate,true_height,abs_error` for one seeded run.
std::string trajectory_csv(const Scenario& scenario, std::uint64_t seed);

}  // namespace qlm
