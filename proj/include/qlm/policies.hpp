#pragma once

#include <cstdint>

#include "qlm/rational.hpp"
#include "qlm/rng.hpp"

namespace qlm {

enum class PolicyKind { PoaDep, PoaArr, Pico, ScaledPoa };

struct PolicyParams {
    PolicyKind kind = PolicyKind::PoaDep;
    Rational epsilon{1, 10};
    double scale_c = 1.0;  // ScaledPoa: f(h) = min(1, c / (eps h))
};

// Raises ParameterOutOfRange when epsilon is outside the range the policy's
// guarantee is stated for: (0,1) generally, (0, 1/2) for PoaArr, (0, 1/5]
// for Pico.
void validate_policy(const PolicyParams& params);

// Ping-on-arrival probability for unit-rate (or Poisson) departures:
// min(1, 2 ln(1/eps) / (eps h)).
double poa_dep_ping_prob(std::int64_t h, double eps);

// Ping-on-arrival probability for unit-rate (or Poisson) arrivals:
// min(1, 4 / (eps h)).
double poa_arr_ping_prob(std::int64_t h, double eps);

// Continuous-pinging probability: min(1, 5 ln(1/eps) / (eps^2 h w)).
double pico_ping_prob(std::int64_t h, std::int64_t w, double eps);

// Under-budgeted ping-on-arrival curve used by the lower-bound demos.
double scaled_poa_ping_prob(std::int64_t h, double eps, double c);

double ping_prob(const PolicyParams& params, std::int64_t h, std::int64_t w);

// One Bernoulli draw from the caller's stream; exact at prob 0 and 1.
inline bool decide(double prob, RngStream& stream) { return stream.bernoulli(prob); }

// Expected ping count of a packet that arrives at height h and drains under
// one departure per step: sum_{t=1..h} min(1, 5 ln(1/eps)/eps^2 / (t (h-t+1))).
double pico_expected_pings_unit_rate(std::int64_t h, double eps);

// A single packet-to-server message.
struct Ping {
    std::int64_t packet_id = 0;
    double send_time = 0.0;       // t'
    std::int64_t height = 0;      // packets ahead including the sender
    std::int64_t waiting_time = 0;  // send_time - arrival_time; >= 1 for continuous pings
    double arrival_time = 0.0;
};

}  // namespace qlm
