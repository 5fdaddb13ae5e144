#include "qlm/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qlm {

std::int64_t HeightProfile::discrete_sum() const {
    std::int64_t sum = 0;
    for (std::int64_t h : steps) sum += h;
    return sum;
}

double HeightProfile::integral() const {
    if (mode == TimeMode::Discrete) return static_cast<double>(discrete_sum());
    double sum = 0.0;
    for (std::size_t i = 0; i < segment_heights.size(); ++i) {
        double t0 = segment_times[i];
        double t1 = (i + 1 < segment_times.size()) ? segment_times[i + 1] : end_time;
        sum += static_cast<double>(segment_heights[i]) * (t1 - t0);
    }
    return sum;
}

PacketRecord& QueueState::arrive(double time) {
    PacketRecord rec;
    rec.id = static_cast<std::int64_t>(records.size());
    rec.arrival_time = time;
    fifo.push_back(rec.id);
    rec.height_at_arrival = height();
    records.push_back(rec);
    now = time;
    return records.back();
}

std::int64_t QueueState::serve(double time) {
    now = time;
    if (fifo.empty()) return -1;
    std::int64_t id = fifo.front();
    fifo.pop_front();
    records[static_cast<std::size_t>(id)].departure_time = time;
    return id;
}

void validate_trace(const Trace& trace) {
    for (std::size_t i = 1; i < trace.events.size(); ++i) {
        if (trace.events[i].time <= trace.events[i - 1].time)
            throw_error(ErrorCode::InvalidArgument, "trace events must be strictly time-sorted");
    }
    for (const TraceEvent& ev : trace.events) {
        if (ev.time < 0 || ev.arrivals < 0 || ev.departure_tokens < 0)
            throw_error(ErrorCode::InvalidArgument, "trace event fields must be non-negative");
        if (trace.mode == TimeMode::Discrete && ev.time != std::floor(ev.time))
            throw_error(ErrorCode::InvalidArgument, "discrete trace has non-integer event time");
        if (ev.time > trace.horizon)
            throw_error(ErrorCode::InvalidArgument, "trace event past the horizon");
    }
}

namespace {

ReplayResult replay_discrete(const Trace& trace) {
    const std::int64_t horizon = static_cast<std::int64_t>(trace.horizon);
    ReplayResult out;
    out.profile.mode = TimeMode::Discrete;
    out.profile.steps.assign(static_cast<std::size_t>(horizon) + 1, 0);
    out.profile.end_time = static_cast<double>(horizon);

    QueueState q;
    std::size_t next_event = 0;
    std::int64_t height = 0;
    for (std::int64_t t = 0; t <= horizon; ++t) {
        if (next_event < trace.events.size() &&
            static_cast<std::int64_t>(trace.events[next_event].time) == t) {
            const TraceEvent& ev = trace.events[next_event++];
            for (std::int64_t k = 0; k < ev.departure_tokens; ++k) q.serve(static_cast<double>(t));
            for (std::int64_t k = 0; k < ev.arrivals; ++k) q.arrive(static_cast<double>(t));
            height = q.height();
        }
        out.profile.steps[static_cast<std::size_t>(t)] = height;
    }
    out.records = std::move(q.records);
    return out;
}

ReplayResult replay_continuous(const Trace& trace) {
    ReplayResult out;
    out.profile.mode = TimeMode::Continuous;
    out.profile.end_time = trace.horizon;
    out.profile.segment_times.push_back(0.0);
    out.profile.segment_heights.push_back(0);

    QueueState q;
    for (const TraceEvent& ev : trace.events) {
        for (std::int64_t k = 0; k < ev.departure_tokens; ++k) q.serve(ev.time);
        for (std::int64_t k = 0; k < ev.arrivals; ++k) q.arrive(ev.time);
        if (q.height() != out.profile.segment_heights.back()) {
            out.profile.segment_times.push_back(ev.time);
            out.profile.segment_heights.push_back(q.height());
        }
    }
    out.records = std::move(q.records);
    return out;
}

}  // namespace

ReplayResult replay(const Trace& trace) {
    validate_trace(trace);
    if (trace.mode == TimeMode::Discrete) return replay_discrete(trace);
    return replay_continuous(trace);
}

OptResult compute_opt(const HeightProfile& profile, const std::vector<PacketRecord>& records,
                      double horizon) {
    if (horizon <= 0 && !records.empty())
        throw_error(ErrorCode::InvalidArgument, "horizon must be positive");
    OptResult out;
    double delay_sum = 0.0;
    for (const PacketRecord& rec : records) {
        if (!rec.departure_time)
            throw_error(ErrorCode::InvalidArgument, "compute_opt requires all packets departed");
        delay_sum += *rec.departure_time - rec.arrival_time;
    }
    out.delay_sum = delay_sum;
    if (profile.mode == TimeMode::Discrete) {
        out.height_sum = static_cast<double>(profile.discrete_sum());
        if (static_cast<std::int64_t>(out.height_sum) != static_cast<std::int64_t>(delay_sum))
            throw_error(ErrorCode::InconsistentProfile,
                        "height-sum and delay-sum disagree: " + std::to_string(out.height_sum) +
                            " vs " + std::to_string(delay_sum));
    } else {
        out.height_sum = profile.integral();
        double scale = std::max({1.0, out.height_sum, delay_sum});
        if (std::fabs(out.height_sum - delay_sum) > 1e-9 * scale)
            throw_error(ErrorCode::InconsistentProfile,
                        "height integral and delay-sum disagree beyond tolerance");
    }
    out.opt = horizon > 0 ? out.height_sum / horizon : 0.0;
    return out;
}

namespace {

std::string format_time(double t, TimeMode mode) {
    char buf[40];
    if (mode == TimeMode::Discrete) {
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(t));
        return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", t);
    std::string s(buf);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        s += ".0";
    }
    return s;
}

}  // namespace

std::string trace_to_csv(const Trace& trace) {
    std::ostringstream os;
    os << "time,arrivals,departure_tokens\n";
    bool horizon_pinned = false;
    for (const TraceEvent& ev : trace.events) {
        os << format_time(ev.time, trace.mode) << ',' << ev.arrivals << ',' << ev.departure_tokens
           << '\n';
        if (ev.time == trace.horizon) horizon_pinned = true;
    }
    if (!horizon_pinned) {
        os << format_time(trace.horizon, trace.mode) << ",0,0\n";
    }
    return os.str();
}

Trace trace_from_csv(const std::string& csv) {
    Trace trace;
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line)) throw_error(ErrorCode::Io, "empty trace file");
    if (line.rfind("time,arrivals,departure_tokens", 0) != 0)
        throw_error(ErrorCode::Io, "trace file missing expected header");
    bool any_fractional = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        TraceEvent ev;
        char timestr[40] = {0};
        long long arr = 0, dep = 0;
        if (std::sscanf(line.c_str(), "%39[^,],%lld,%lld", timestr, &arr, &dep) != 3)
            throw_error(ErrorCode::Io, "malformed trace row: " + line);
        ev.time = std::strtod(timestr, nullptr);
        ev.arrivals = arr;
        ev.departure_tokens = dep;
        if (std::strchr(timestr, '.') || std::strchr(timestr, 'e') || std::strchr(timestr, 'E'))
            any_fractional = true;
        trace.events.push_back(ev);
    }
    if (trace.events.empty()) throw_error(ErrorCode::Io, "trace file has no rows");
    trace.mode = any_fractional ? TimeMode::Continuous : TimeMode::Discrete;
    trace.horizon = trace.events.back().time;
    // Drop a trailing zero-activity row: it only pins the horizon.
    const TraceEvent& last = trace.events.back();
    if (last.arrivals == 0 && last.departure_tokens == 0) trace.events.pop_back();
    return trace;
}

void write_trace_csv(const Trace& trace, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw_error(ErrorCode::Io, "cannot open for write: " + path);
    f << trace_to_csv(trace);
}

Trace read_trace_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw_error(ErrorCode::Io, "cannot open for read: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return trace_from_csv(os.str());
}

}  // namespace qlm
