#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qlm/engine.hpp"

namespace qlm {

// Result of one two-arm (or witness) demonstration. `csv` carries
// `arm,seed,opt,alg,ratio,pings_per_packet` rows; `figures` the headline
// numbers quoted in the verdict paragraph.
struct DemoReport {
    std::string name;
    bool pass = false;
    std::string verdict;
    std::string csv;
    std::map<std::string, double> figures;
};

// Full ping budget vs a budget too small to catch the phase bursts, both on
// the pinned-from-above phase instance with unit-rate departures.
DemoReport demo_lb_departures(std::int64_t h, const Rational& epsilon, std::int64_t phases,
                              std::int64_t n_seeds, std::uint64_t base_seed, int threads);

// Same comparison on the pinned-from-below instance with unit-rate arrivals;
// the starved arm stays under 1/(48 eps h) pings per packet.
DemoReport demo_lb_arrivals(std::int64_t h, const Rational& epsilon, std::int64_t phases,
                            std::int64_t n_seeds, std::uint64_t base_seed, int threads);

// Arrival-only pinging (every packet pings) against continuous pinging on the
// bursty i.i.d. instance, where departures are invisible to arrival pings.
DemoReport demo_poa_insufficiency(std::int64_t h, std::int64_t steps, const Rational& epsilon,
                                  std::int64_t n_seeds, std::uint64_t base_seed, int threads);

// Witness that arrival-only pinging cannot separate the two burst scenarios:
// their ping streams have identical distributions.
DemoReport demo_eg1(std::int64_t h, const Rational& epsilon);

// Continuous pinging on the doubling-deadline instance.
DemoReport demo_eg3(std::int64_t h, const Rational& epsilon, std::int64_t n_seeds,
                    std::uint64_t base_seed, int threads);

}  // namespace qlm
