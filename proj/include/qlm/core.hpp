#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "qlm/error.hpp"

namespace qlm {

enum class TimeMode { Discrete, Continuous };

// One packet's lifecycle. Times are integral in discrete mode.
struct PacketRecord {
    std::int64_t id = 0;               // arrival order, 0-based
    double arrival_time = 0.0;         // a_i
    std::optional<double> departure_time;  // d_i; set once the queue serves it
    std::int64_t height_at_arrival = 0;    // queue length including this packet, just after it joins

    double delay() const { return departure_time ? *departure_time - arrival_time : -1.0; }
};

// A batch of activity at one instant: `arrivals` packets join (in generation
// order), `departure_tokens` service opportunities fire. A token on an empty
// queue is absorbed with no effect.
struct TraceEvent {
    double time = 0.0;
    std::int64_t arrivals = 0;
    std::int64_t departure_tokens = 0;
};

struct Trace {
    TimeMode mode = TimeMode::Discrete;
    double horizon = 0.0;  // T
    std::vector<TraceEvent> events;  // strictly increasing times
    // Phase-start times for the multi-phase adversarial instances. Diagnostic
    // only: estimators never see these, and trace CSV files do not carry them.
    std::vector<double> phase_starts;
};

// True height over time. Discrete: steps[t] = queue length at the end of step
// t, i.e. after step-t tokens and step-t arrivals, for t = 0..T. Continuous:
// piecewise constant, segment i holds value[i] on [time[i], time[i+1]).
struct HeightProfile {
    TimeMode mode = TimeMode::Discrete;
    std::vector<std::int64_t> steps;        // discrete: size horizon+1
    std::vector<double> segment_times;      // continuous breakpoints, starts at 0
    std::vector<std::int64_t> segment_heights;
    double end_time = 0.0;

    std::int64_t discrete_sum() const;
    double integral() const;  // sum h dt over [0, end_time]
};

// Mutable FIFO state used by replay and by the trial simulator.
struct QueueState {
    double now = 0.0;
    std::deque<std::int64_t> fifo;             // packet ids, head = next to depart
    std::vector<PacketRecord> records;         // indexed by id

    std::int64_t height() const { return static_cast<std::int64_t>(fifo.size()); }

    // Appends one packet; returns its record (height_at_arrival counts itself).
    PacketRecord& arrive(double time);
    // Consumes one departure token; returns the departed id or -1 if absorbed.
    std::int64_t serve(double time);
};

struct ReplayResult {
    HeightProfile profile;
    std::vector<PacketRecord> records;
};

// Raises InvalidArgument unless events are strictly time-sorted with
// non-negative fields (and integral times in discrete mode).
void validate_trace(const Trace& trace);

// Replays a trace deterministically. Within a time step, departure tokens act
// on the queue carried over from the previous step, then that step's arrivals
// join; the recorded h_t is the post-arrival height. This makes a packet's
// delay equal the number of steps it is counted in h, so the height-sum and
// delay-sum sides of the average-delay identity agree exactly, and a packet
// can never depart in its arrival step (minimum waiting time 1).
ReplayResult replay(const Trace& trace);

struct OptResult {
    double opt = 0.0;         // (1/T) * sum_t h_t
    double height_sum = 0.0;  // sum_t h_t (discrete) or integral (continuous)
    double delay_sum = 0.0;   // sum_i (d_i - a_i)
};

// Time-average height. Also computes the delay-sum route and raises
// InconsistentProfile if the two disagree (exact in discrete mode).
OptResult compute_opt(const HeightProfile& profile, const std::vector<PacketRecord>& records,
                      double horizon);

// Trace file format: CSV `time,arrivals,departure_tokens`, rows time-sorted.
// A trailing zero-activity row pins the horizon when it exceeds the last
// event. Round-trips bit-exactly.
std::string trace_to_csv(const Trace& trace);
Trace trace_from_csv(const std::string& csv);
void write_trace_csv(const Trace& trace, const std::string& path);
Trace read_trace_csv(const std::string& path);

}  // namespace qlm
