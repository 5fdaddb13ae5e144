#include "qlm/processes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include "qlm/rng.hpp"

namespace qlm {

namespace {

// Accumulates (time -> arrivals, tokens) and emits a sorted trace.
class TraceBuilder {
public:
    void add_arrivals(std::int64_t t, std::int64_t n) {
        if (n > 0) rows_[t].first += n;
    }
    void add_tokens(std::int64_t t, std::int64_t n) {
        if (n > 0) rows_[t].second += n;
    }
    Trace finish(double horizon) {
        Trace tr;
        tr.mode = TimeMode::Discrete;
        tr.horizon = horizon;
        for (const auto& [t, counts] : rows_) {
            if (counts.first == 0 && counts.second == 0) continue;
            tr.events.push_back({static_cast<double>(t), counts.first, counts.second});
            tr.horizon = std::max(tr.horizon, static_cast<double>(t));
        }
        return tr;
    }

private:
    std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> rows_;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw_error(ErrorCode::ParameterOutOfRange, what);
}

}  // namespace

Trace phase_lb_departures(std::int64_t h, const Rational& epsilon, std::int64_t phases,
                          std::uint64_t seed) {
    require(epsilon.positive() && epsilon.less_than(1, 8), "phase_lb_departures requires epsilon in (0, 1/8)");
    require(!epsilon.less_than(1, h), "phase_lb_departures requires h >= 1/epsilon");
    require(phases >= 0, "phase count must be non-negative");

    const std::int64_t burst_cap = epsilon.floor_scaled(8 * h);  // floor(8 eps h)
    RngStream rng = RngStream::derived(seed, stream_tag::kTrace);

    TraceBuilder tb;
    // Phase i injects H_i packets the moment the height returns to h, so the
    // departure side stays exactly one token per step from step 1 onward.
    std::int64_t t = 0;
    std::vector<double> starts;
    std::int64_t first_burst = h;
    if (phases > 0) first_burst += static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(burst_cap + 1)));
    tb.add_arrivals(0, first_burst);
    starts.push_back(0.0);
    t = first_burst - h;  // steps consumed by phase 1's decline
    for (std::int64_t i = 2; i <= phases; ++i) {
        std::int64_t hi = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(burst_cap + 1)));
        starts.push_back(static_cast<double>(t));
        tb.add_arrivals(t, hi);
        t += hi;
    }
    // Drain the resident h packets; tokens run every step through the horizon.
    const std::int64_t horizon = t + h;
    for (std::int64_t s = 1; s <= horizon; ++s) tb.add_tokens(s, 1);
    Trace tr = tb.finish(static_cast<double>(horizon));
    tr.phase_starts = std::move(starts);
    return tr;
}

Trace phase_lb_arrivals(std::int64_t h, const Rational& epsilon, std::int64_t phases,
                        std::uint64_t seed) {
    require(epsilon.positive() && epsilon.less_than(1, 16), "phase_lb_arrivals requires epsilon in (0, 1/16)");
    require(!epsilon.less_than(1, h), "phase_lb_arrivals requires h >= 1/epsilon");
    require(phases >= 0, "phase count must be non-negative");

    const std::int64_t burst_cap = epsilon.floor_scaled(8 * h);
    RngStream rng = RngStream::derived(seed, stream_tag::kTrace);

    TraceBuilder tb;
    std::vector<double> starts;
    // One arrival per step from step 1. The first departure burst fires once
    // the ramp reaches h; burst i+1 fires as soon as the refill completes.
    std::int64_t beta = h + 1;
    starts.push_back(1.0);
    for (std::int64_t i = 1; i <= phases; ++i) {
        std::int64_t hi = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(burst_cap + 1)));
        starts.push_back(static_cast<double>(beta));
        tb.add_tokens(beta, hi);
        beta += hi;
    }
    for (std::int64_t s = 1; s < beta; ++s) tb.add_arrivals(s, 1);
    tb.add_tokens(beta, h);  // instantaneous final drain
    Trace tr = tb.finish(static_cast<double>(beta));
    tr.phase_starts = std::move(starts);
    return tr;
}

Trace bursty_iid(std::int64_t h, std::int64_t steps, std::uint64_t seed) {
    require(h >= 2, "bursty_iid requires h >= 2");
    require(steps >= 1, "bursty_iid requires a positive horizon");
    RngStream rng = RngStream::derived(seed, stream_tag::kTrace);

    TraceBuilder tb;
    std::int64_t height = 0;
    for (std::int64_t s = 1; s <= steps; ++s) {
        // Departure burst only when a full batch is present; no partial bursts.
        if (height >= h && rng.bernoulli(2.0 / 3.0)) {
            tb.add_tokens(s, h);
            height -= h;
        }
        if (rng.bernoulli(1.0 / 3.0)) {
            tb.add_arrivals(s, h);
            height += h;
        }
    }
    double horizon = static_cast<double>(steps);
    if (height > 0) {
        tb.add_tokens(steps + 1, height);
        horizon = static_cast<double>(steps + 1);
    }
    return tb.finish(horizon);
}

Trace scenario_eg1(std::int64_t h, Eg1Variant variant) {
    require(h >= 1, "scenario_eg1 requires h >= 1");
    TraceBuilder tb;
    tb.add_arrivals(0, h);
    double horizon = 1.0;
    if (variant == Eg1Variant::AllDepart) {
        tb.add_tokens(1, h);
    } else {
        tb.add_tokens(1, h - 1);
        tb.add_tokens(h + 1, 1);
        horizon = static_cast<double>(h + 1);
    }
    return tb.finish(horizon);
}

Trace scenario_eg3(std::int64_t h, const std::vector<std::uint8_t>& choices) {
    // The horizon is 2^h or 2^(h+1); cap it at a replayable size.
    require(h >= 1 && h <= 24, "scenario_eg3 requires h in [1, 24]");
    if (static_cast<std::int64_t>(choices.size()) != h)
        throw_error(ErrorCode::InvalidArgument, "scenario_eg3 needs one choice bit per packet");
    std::vector<std::int64_t> departures;
    for (std::int64_t i = 1; i <= h; ++i) {
        std::int64_t base = std::int64_t{1} << i;
        departures.push_back(choices[static_cast<std::size_t>(i - 1)] ? base * 2 : base);
    }
    for (std::size_t i = 1; i < departures.size(); ++i) {
        if (departures[i] < departures[i - 1])
            throw_error(ErrorCode::InfeasibleSchedule, "eg3 choices violate FIFO departure order");
    }
    TraceBuilder tb;
    tb.add_arrivals(0, h);
    for (std::int64_t d : departures) tb.add_tokens(d, 1);
    return tb.finish(static_cast<double>(departures.back()));
}

namespace {

bool spec_continuous(const ProcessSpec& s) {
    if (s.kind == ProcessKind::Poisson) return true;
    if (s.kind == ProcessKind::Replay) return s.fragment.mode == TimeMode::Continuous;
    return false;
}

// Arrival times for one separable side, restricted to (0, horizon].
std::vector<std::int64_t> discrete_side_steps(const ProcessSpec& spec, std::int64_t horizon,
                                              bool arrivals_side,
                                              std::vector<std::int64_t>* counts) {
    std::vector<std::int64_t> steps;
    counts->clear();
    if (spec.kind == ProcessKind::ConstantRate) {
        for (std::int64_t s = 1; s <= horizon; ++s) {
            steps.push_back(s);
            counts->push_back(spec.rate);
        }
    } else if (spec.kind == ProcessKind::Replay) {
        for (const TraceEvent& ev : spec.fragment.events) {
            std::int64_t n = arrivals_side ? ev.arrivals : ev.departure_tokens;
            if (n > 0) {
                steps.push_back(static_cast<std::int64_t>(ev.time));
                counts->push_back(n);
            }
        }
    }
    return steps;
}

Trace generate_discrete(const ProcessSpec& arrival, const ProcessSpec& departure, double horizon,
                        std::uint64_t /*seed*/) {
    const std::int64_t T = static_cast<std::int64_t>(horizon);
    TraceBuilder tb;
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> steps = discrete_side_steps(arrival, T, true, &counts);
    std::map<std::int64_t, std::int64_t> arr_at;
    for (std::size_t i = 0; i < steps.size(); ++i) arr_at[steps[i]] += counts[i];
    for (const auto& [s, n] : arr_at) tb.add_arrivals(s, n);

    std::vector<std::int64_t> dsteps = discrete_side_steps(departure, T, false, &counts);
    std::map<std::int64_t, std::int64_t> dep_at;
    for (std::size_t i = 0; i < dsteps.size(); ++i) dep_at[dsteps[i]] += counts[i];
    for (const auto& [s, n] : dep_at) tb.add_tokens(s, n);

    // Walk the merged schedule (tokens before arrivals within a step) to find
    // the residual height, then keep the departure process running past the
    // horizon until the queue drains.
    std::int64_t height = 0;
    std::int64_t last_step = T;
    auto ai = arr_at.begin();
    auto di = dep_at.begin();
    while (ai != arr_at.end() || di != dep_at.end()) {
        std::int64_t s = std::min(ai != arr_at.end() ? ai->first : INT64_MAX,
                                  di != dep_at.end() ? di->first : INT64_MAX);
        if (di != dep_at.end() && di->first == s) {
            height -= std::min(height, di->second);
            ++di;
        }
        if (ai != arr_at.end() && ai->first == s) {
            height += ai->second;
            ++ai;
        }
        last_step = std::max(last_step, s);
    }
    std::int64_t t = last_step;
    const std::int64_t drain_rate = departure.kind == ProcessKind::ConstantRate ? departure.rate : 1;
    while (height > 0) {
        ++t;
        std::int64_t n = std::min(height, drain_rate);
        tb.add_tokens(t, n);
        height -= n;
    }
    return tb.finish(static_cast<double>(t));
}

Trace generate_continuous(const ProcessSpec& arrival, const ProcessSpec& departure, double horizon,
                          std::uint64_t seed) {
    if (departure.kind != ProcessKind::Poisson)
        throw_error(ErrorCode::ModeMismatch,
                    "continuous-time generation needs a poisson departure process");
    RngStream arr_rng = RngStream::derived(seed, stream_tag::kTrace, 1);
    RngStream dep_rng = RngStream::derived(seed, stream_tag::kTrace, 2);

    std::vector<double> arr_times;
    if (arrival.kind == ProcessKind::Poisson) {
        double t = arr_rng.exponential(arrival.poisson_rate);
        while (t <= horizon) {
            arr_times.push_back(t);
            t += arr_rng.exponential(arrival.poisson_rate);
        }
    } else {  // Replay fragment with continuous times
        for (const TraceEvent& ev : arrival.fragment.events)
            for (std::int64_t k = 0; k < ev.arrivals; ++k) arr_times.push_back(ev.time);
    }

    Trace tr;
    tr.mode = TimeMode::Continuous;
    std::size_t next_arr = 0;
    std::int64_t height = 0;
    double t = 0.0;
    double last_time = -1.0;
    auto emit = [&](double time, std::int64_t a, std::int64_t d) {
        if (!tr.events.empty() && tr.events.back().time == time) {
            tr.events.back().arrivals += a;
            tr.events.back().departure_tokens += d;
        } else {
            tr.events.push_back({time, a, d});
        }
        last_time = time;
    };
    double next_token = dep_rng.exponential(departure.poisson_rate);
    // Tokens keep flowing past the horizon until everything admitted drains.
    while (true) {
        bool more_arrivals = next_arr < arr_times.size();
        if (!more_arrivals && height == 0) break;
        double ta = more_arrivals ? arr_times[next_arr] : std::numeric_limits<double>::infinity();
        if (next_token <= ta) {
            t = next_token;
            emit(t, 0, 1);
            if (height > 0) --height;
            next_token += dep_rng.exponential(departure.poisson_rate);
        } else {
            t = ta;
            emit(t, 1, 0);
            ++height;
            ++next_arr;
        }
    }
    tr.horizon = std::max(horizon, last_time);
    return tr;
}

}  // namespace

Trace generate(const ProcessSpec& arrival, const ProcessSpec& departure, double horizon,
               std::uint64_t seed) {
    if (arrival.joint()) {
        if (!(departure.kind == ProcessKind::Coupled || departure.kind == arrival.kind))
            throw_error(ErrorCode::ModeMismatch,
                        "whole-trace arrival kind requires a coupled departure spec");
        switch (arrival.kind) {
            case ProcessKind::PhaseLbDepartures:
                return phase_lb_departures(arrival.h, arrival.epsilon, arrival.phases, seed);
            case ProcessKind::PhaseLbArrivals:
                return phase_lb_arrivals(arrival.h, arrival.epsilon, arrival.phases, seed);
            case ProcessKind::BurstyIid:
                return bursty_iid(arrival.h, arrival.steps > 0 ? arrival.steps : static_cast<std::int64_t>(horizon), seed);
            case ProcessKind::ScenarioEg1:
                return scenario_eg1(arrival.h, arrival.eg1_variant);
            case ProcessKind::ScenarioEg3:
                return scenario_eg3(arrival.h, arrival.eg3_choices);
            default:
                break;
        }
    }
    if (departure.joint() || departure.kind == ProcessKind::Coupled)
        throw_error(ErrorCode::ModeMismatch, "departure spec cannot stand alone as a whole-trace kind");

    // Replay + Replay of the same fragment is the identity.
    if (arrival.kind == ProcessKind::Replay && departure.kind == ProcessKind::Replay) {
        return arrival.fragment;
    }
    bool cont_a = spec_continuous(arrival);
    bool cont_d = spec_continuous(departure);
    if (cont_a != cont_d)
        throw_error(ErrorCode::ModeMismatch, "arrival and departure specs use different time modes");
    if (cont_a) return generate_continuous(arrival, departure, horizon, seed);
    return generate_discrete(arrival, departure, horizon, seed);
}

}  // namespace qlm
