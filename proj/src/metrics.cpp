#include "qlm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace qlm {

double compute_alg(const HeightProfile& truth, const std::vector<double>& estimates,
                   double horizon) {
    if (truth.mode != TimeMode::Discrete)
        throw_error(ErrorCode::InvalidArgument,
                    "per-step trajectories pair with discrete profiles; see compute_alg_continuous");
    if (estimates.size() != truth.steps.size())
        throw_error(ErrorCode::LengthMismatch, "estimate trajectory length != profile length");
    double sum = 0.0;
    for (std::size_t t = 0; t < truth.steps.size(); ++t)
        sum += std::fabs(static_cast<double>(truth.steps[t]) - estimates[t]);
    return sum / horizon;
}

double compute_alg_continuous(const HeightProfile& truth,
                              const std::vector<std::pair<double, double>>& estimate_steps,
                              double horizon) {
    if (truth.mode != TimeMode::Continuous)
        throw_error(ErrorCode::InvalidArgument, "continuous error needs a continuous profile");
    if (estimate_steps.empty() || estimate_steps.front().first != 0.0)
        throw_error(ErrorCode::LengthMismatch, "estimate steps must start at time 0");
    double sum = 0.0;
    std::size_t hi = 0, ei = 0;
    double t = 0.0;
    while (t < horizon) {
        double h = static_cast<double>(truth.segment_heights[hi]);
        double e = estimate_steps[ei].second;
        double next_h = hi + 1 < truth.segment_times.size() ? truth.segment_times[hi + 1] : horizon;
        double next_e = ei + 1 < estimate_steps.size() ? estimate_steps[ei + 1].first : horizon;
        double next = std::min({next_h, next_e, horizon});
        sum += std::fabs(h - e) * (next - t);
        t = next;
        if (t == next_h && hi + 1 < truth.segment_times.size()) ++hi;
        if (t == next_e && ei + 1 < estimate_steps.size()) ++ei;
    }
    return sum / horizon;
}

std::vector<std::int64_t> lag_deltas(const std::vector<PacketRecord>& records,
                                     const std::vector<Ping>& pings) {
    const std::int64_t n = static_cast<std::int64_t>(records.size());
    std::vector<bool> pinged(static_cast<std::size_t>(n), false);
    for (const Ping& p : pings) {
        if (p.packet_id >= 0 && p.packet_id < n) pinged[static_cast<std::size_t>(p.packet_id)] = true;
    }
    // next_ping_arrival[i] = a_j of the first pinging packet j >= i.
    std::vector<double> next_ping_arrival(static_cast<std::size_t>(n), -1.0);
    double next = -1.0;
    for (std::int64_t i = n - 1; i >= 0; --i) {
        if (pinged[static_cast<std::size_t>(i)]) next = records[static_cast<std::size_t>(i)].arrival_time;
        next_ping_arrival[static_cast<std::size_t>(i)] = next;
    }
    std::vector<std::int64_t> deltas(static_cast<std::size_t>(n), 0);
    for (std::int64_t i = 0; i < n; ++i) {
        const PacketRecord& rec = records[static_cast<std::size_t>(i)];
        double a_j = next_ping_arrival[static_cast<std::size_t>(i)];
        if (a_j < 0) {
            deltas[static_cast<std::size_t>(i)] = rec.height_at_arrival;
        } else {
            deltas[static_cast<std::size_t>(i)] = std::min(
                rec.height_at_arrival, static_cast<std::int64_t>(a_j - rec.arrival_time));
        }
    }
    return deltas;
}

std::pair<double, double> area_decomposition(const HeightProfile& truth,
                                             const std::vector<PicoRectangle>& rectangles) {
    if (truth.mode != TimeMode::Discrete)
        throw_error(ErrorCode::InvalidArgument, "area decomposition is defined on discrete profiles");
    const std::int64_t T = static_cast<std::int64_t>(truth.steps.size()) - 1;
    std::vector<double> est(truth.steps.size(), 0.0);
    for (const PicoRectangle& r : rectangles) {
        // The estimator consumed a ping sent at time t; that estimate is
        // paired with the profile column t-1 (the state the ping observed).
        std::int64_t first = std::max<std::int64_t>(0, r.send_time - 1);
        std::int64_t last = std::min(T, r.last_active - 1);
        for (std::int64_t c = first; c <= last; ++c) {
            est[static_cast<std::size_t>(c)] = std::max(est[static_cast<std::size_t>(c)], r.top);
        }
    }
    double under = 0.0, over = 0.0;
    for (std::size_t c = 0; c < truth.steps.size(); ++c) {
        double h = static_cast<double>(truth.steps[c]);
        if (h > est[c]) under += h - est[c];
        else over += est[c] - h;
    }
    return {under, over};
}

PingStats ping_stats(const std::vector<Ping>& pings, const std::vector<PacketRecord>& records) {
    PingStats out;
    out.count = static_cast<std::int64_t>(pings.size());
    out.per_packet_mean = records.empty() ? 0.0
                                          : static_cast<double>(out.count) /
                                                static_cast<double>(records.size());
    for (const PacketRecord& rec : records) out.by_arrival_height[rec.height_at_arrival].second += 1;
    for (const Ping& p : pings) {
        const PacketRecord& rec = records.at(static_cast<std::size_t>(p.packet_id));
        out.by_arrival_height[rec.height_at_arrival].first += 1;
    }
    return out;
}

std::string trial_to_jsonl(const TrialResult& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["opt"] = r.opt;
    j["height_sum"] = r.height_sum;
    j["alg"] = r.alg;
    j["ratio"] = r.ratio;
    j["degenerate"] = r.degenerate;
    j["ping_count"] = r.ping_count;
    j["packet_count"] = r.packet_count;
    j["pings_per_packet"] = r.pings_per_packet;
    if (r.has_lag) j["lag_sum"] = r.lag_sum;
    if (r.has_areas) {
        j["under_area"] = r.under_area;
        j["over_area"] = r.over_area;
    }
    return j.dump();
}

}  // namespace qlm
