#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qlm/core.hpp"
#include "qlm/estimators.hpp"
#include "qlm/policies.hpp"

namespace qlm {

// Everything measured on one seeded run.
struct TrialResult {
    std::uint64_t seed = 0;
    double opt = 0.0;      // time-average height
    double height_sum = 0.0;  // total delay = sum_t h_t (or its integral)
    double alg = 0.0;      // time-average |h_t - e_t|
    double ratio = 0.0;    // alg / opt; 0 with `degenerate` set when opt == 0 and alg > 0
    bool degenerate = false;
    std::int64_t ping_count = 0;
    std::int64_t packet_count = 0;
    double pings_per_packet = 0.0;
    std::int64_t lag_sum = 0;       // sum of per-packet lags (arrival-ping policies)
    bool has_lag = false;
    double under_area = 0.0;        // Area(H \ R), continuous-pinging runs
    double over_area = 0.0;         // Area(R \ H)
    bool has_areas = false;
    double horizon = 0.0;
    bool estimate_below_truth = false;  // e_t <= h_t held at every step
};

// (1/T) sum_t |h_t - e_t|; trajectory must cover t = 0..T.
double compute_alg(const HeightProfile& truth, const std::vector<double>& estimates,
                   double horizon);

// Continuous-mode counterpart: the estimate is a right-continuous step
// function given as (time, value) breakpoints starting at 0; the integral of
// |h - e| over [0, horizon] is computed exactly segment by segment.
double compute_alg_continuous(const HeightProfile& truth,
                              const std::vector<std::pair<double, double>>& estimate_steps,
                              double horizon);

// Per-packet lag: delta_i = min(h(a_i), a_j - a_i) where j >= i is the first
// packet (possibly i itself) that pinged; h(a_i) when no such packet exists.
std::vector<std::int64_t> lag_deltas(const std::vector<PacketRecord>& records,
                                     const std::vector<Ping>& pings);

// Exact column scan of truth vs the rectangle-union height:
// (Area(H \ R), Area(R \ H)) summed over integer columns 0..T.
std::pair<double, double> area_decomposition(const HeightProfile& truth,
                                             const std::vector<PicoRectangle>& rectangles);

struct PingStats {
    std::int64_t count = 0;
    double per_packet_mean = 0.0;
    // height_at_arrival -> (ping count, packet count)
    std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> by_arrival_height;
};

PingStats ping_stats(const std::vector<Ping>& pings, const std::vector<PacketRecord>& records);

// One row of `trials.jsonl`.
std::string trial_to_jsonl(const TrialResult& r);

}  // namespace qlm
