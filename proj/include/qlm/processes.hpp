#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qlm/core.hpp"
#include "qlm/rational.hpp"

namespace qlm {

enum class ProcessKind {
    ConstantRate,       // `rate` events per step, steps 1..T (discrete)
    Poisson,            // exponential inter-event times, rate `poisson_rate` (continuous)
    Replay,             // use the stored fragment verbatim for this side
    PhaseLbDepartures,  // bursty arrivals over unit-rate departures; queue pinned near h from above
    PhaseLbArrivals,    // unit-rate arrivals with instantaneous departure bursts; pinned near h from below
    BurstyIid,          // per step: h arrivals w.p. 1/3, h departures w.p. 2/3 when height >= h
    ScenarioEg1,        // h packets at once; all depart at step 1, or one lingers h more steps
    ScenarioEg3,        // h packets at once; packet i departs at 2^i or 2^{i+1}
    Coupled,            // departure side of a joint (whole-trace) arrival kind
};

enum class Eg1Variant { AllDepart, OneStays };

struct ProcessSpec {
    ProcessKind kind = ProcessKind::ConstantRate;
    std::int64_t rate = 1;         // ConstantRate
    double poisson_rate = 1.0;     // Poisson
    Trace fragment;                // Replay
    std::string replay_path;       // Replay provenance (serialization)
    std::int64_t h = 0;            // phase / bursty / eg kinds
    Rational epsilon;              // phase kinds
    std::int64_t phases = 0;       // phase kinds (L)
    std::int64_t steps = 0;        // BurstyIid horizon (falls back to generate()'s horizon)
    Eg1Variant eg1_variant = Eg1Variant::AllDepart;
    std::vector<std::uint8_t> eg3_choices;

    // Joint kinds emit a whole trace; the departure slot must then be Coupled.
    bool joint() const {
        return kind == ProcessKind::PhaseLbDepartures || kind == ProcessKind::PhaseLbArrivals ||
               kind == ProcessKind::BurstyIid || kind == ProcessKind::ScenarioEg1 ||
               kind == ProcessKind::ScenarioEg3;
    }
};

// Builds the full event schedule for one run. Deterministic in `seed`.
// Appends drain-out departure tokens past the requested horizon so the queue
// always ends empty; the returned trace's horizon covers the drain.
Trace generate(const ProcessSpec& arrival, const ProcessSpec& departure, double horizon,
               std::uint64_t seed);

// The individual instance builders (also reachable through generate()).
Trace phase_lb_departures(std::int64_t h, const Rational& epsilon, std::int64_t phases,
                          std::uint64_t seed);
Trace phase_lb_arrivals(std::int64_t h, const Rational& epsilon, std::int64_t phases,
                        std::uint64_t seed);
Trace bursty_iid(std::int64_t h, std::int64_t steps, std::uint64_t seed);
Trace scenario_eg1(std::int64_t h, Eg1Variant variant);
Trace scenario_eg3(std::int64_t h, const std::vector<std::uint8_t>& choices);

}  // namespace qlm
