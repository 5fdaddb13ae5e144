#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qlm/metrics.hpp"

using namespace qlm;

namespace {

HeightProfile discrete_profile(std::vector<std::int64_t> steps) {
    HeightProfile p;
    p.mode = TimeMode::Discrete;
    p.end_time = static_cast<double>(steps.size() - 1);
    p.steps = std::move(steps);
    return p;
}

PacketRecord record(std::int64_t id, double a, double d, std::int64_t h) {
    PacketRecord r;
    r.id = id;
    r.arrival_time = a;
    r.departure_time = d;
    r.height_at_arrival = h;
    return r;
}

Ping arrival_ping(std::int64_t id, double t, std::int64_t h) { return {id, t, h, 0, t}; }

}  // namespace

TEST_CASE("average error: exact agreement gives zero") {
    HeightProfile p = discrete_profile({3, 2, 1, 0});
    std::vector<double> est = {3, 2, 1, 0};
    CHECK(compute_alg(p, est, 3) == 0.0);
}

TEST_CASE("average error: constant offset") {
    HeightProfile p = discrete_profile(std::vector<std::int64_t>(11, 5));
    std::vector<double> est(11, 3.0);
    // 11 columns of |5-3| over T=10
    CHECK(compute_alg(p, est, 10) == doctest::Approx(2.2));
}

TEST_CASE("average error: continuous segments integrate exactly") {
    HeightProfile p;
    p.mode = TimeMode::Continuous;
    p.segment_times = {0.0, 1.5, 4.0};
    p.segment_heights = {0, 2, 0};
    p.end_time = 10.0;
    // Estimate holds 1 until t=3, then 0.
    std::vector<std::pair<double, double>> est = {{0.0, 1.0}, {3.0, 0.0}};
    // |0-1|*1.5 + |2-1|*1.5 + |2-0|*1.0 + 0 = 5, over T=10.
    CHECK(compute_alg_continuous(p, est, 10.0) == doctest::Approx(0.5));
}

TEST_CASE("average error: length mismatch is rejected") {
    HeightProfile p = discrete_profile({1, 0});
    std::vector<double> est = {1.0};
    CHECK_THROWS_AS(compute_alg(p, est, 1), Error);
}

TEST_CASE("lags: every packet pinging means zero lag") {
    std::vector<PacketRecord> recs = {record(0, 0, 1, 1), record(1, 0, 2, 2), record(2, 3, 4, 1)};
    std::vector<Ping> pings = {arrival_ping(0, 0, 1), arrival_ping(1, 0, 2), arrival_ping(2, 3, 1)};
    for (std::int64_t d : lag_deltas(recs, pings)) CHECK(d == 0);
}

TEST_CASE("lags: next ping caps the wait, height caps the lag") {
    // Packet 0 stays silent; packet 1 arrives 4 steps later and pings.
    std::vector<PacketRecord> recs = {record(0, 0, 100, 100), record(1, 4, 105, 100)};
    std::vector<Ping> pings = {arrival_ping(1, 4, 100)};
    std::vector<std::int64_t> d = lag_deltas(recs, pings);
    CHECK(d[0] == 4);  // min(100, 4)
    CHECK(d[1] == 0);

    // No ping ever: lag equals the arrival height.
    std::vector<Ping> none;
    d = lag_deltas(recs, none);
    CHECK(d[0] == 100);
    CHECK(d[1] == 100);

    // A ping from an EARLIER packet does not help later ones.
    std::vector<PacketRecord> recs2 = {record(0, 0, 3, 3), record(1, 2, 5, 3)};
    std::vector<Ping> pings2 = {arrival_ping(0, 0, 3)};
    d = lag_deltas(recs2, pings2);
    CHECK(d[0] == 0);
    CHECK(d[1] == 3);  // min(3, infinity)
}

TEST_CASE("area decomposition: no rectangles puts the whole diagram under") {
    HeightProfile p = discrete_profile({4, 4, 2, 0});
    auto [under, over] = area_decomposition(p, {});
    CHECK(under == 10.0);
    CHECK(over == 0.0);
}

TEST_CASE("area decomposition: single projected rectangle, column scan") {
    // Truth: 20 for columns 0..12, 0 at column 13. One ping sent at time 11
    // (observing column 10) with height 20, wait 10, eps=0.1: top 26,
    // active for queries 11..14, i.e. columns 10..13.
    std::vector<std::int64_t> steps(14, 20);
    steps[13] = 0;
    HeightProfile p = discrete_profile(std::move(steps));
    PicoEstimator est(Rational(1, 10));
    std::vector<PicoRectangle> rects = {est.make_rectangle(11, 20, 10)};
    auto [under, over] = area_decomposition(p, rects);
    // Columns 10..12: estimate 26 vs 20 -> 6 each; column 13: 26 vs 0.
    CHECK(over == doctest::Approx(3 * 6 + 26));
    // Columns 0..9 uncovered at height 20.
    CHECK(under == doctest::Approx(200.0));
}

TEST_CASE("area decomposition: full coverage leaves nothing under") {
    PicoEstimator est(Rational(1, 10));
    // Truth 13 = (1+3*0.1)*10 so the rectangle tops meet it exactly.
    HeightProfile p13 = discrete_profile({13, 13, 13, 0});
    std::vector<PicoRectangle> rects = {est.make_rectangle(1, 10, 10),  // cols 0..3 top 13
                                        est.make_rectangle(3, 10, 10)};
    auto [under, over] = area_decomposition(p13, rects);
    CHECK(under == 0.0);
    CHECK(over == doctest::Approx(13.0));  // column 3 over the drained truth
}

TEST_CASE("ping stats: empty") {
    PingStats s = ping_stats({}, {});
    CHECK(s.count == 0);
    CHECK(s.per_packet_mean == 0.0);
    CHECK(s.by_arrival_height.empty());
}

TEST_CASE("ping stats: counts bucketed by arrival height") {
    std::vector<PacketRecord> recs = {record(0, 0, 5, 7), record(1, 1, 6, 7), record(2, 2, 9, 3)};
    std::vector<Ping> pings = {arrival_ping(0, 0, 7), {2, 4, 1, 2, 2.0}, {2, 5, 1, 3, 2.0}};
    PingStats s = ping_stats(pings, recs);
    CHECK(s.count == 3);
    CHECK(s.per_packet_mean == doctest::Approx(1.0));
    CHECK(s.by_arrival_height[7].first == 1);   // pings from height-7 arrivals
    CHECK(s.by_arrival_height[7].second == 2);  // packets that arrived at 7
    CHECK(s.by_arrival_height[3].first == 2);
    CHECK(s.by_arrival_height[3].second == 1);
}

TEST_CASE("trial jsonl row carries the per-trial fields") {
    TrialResult r;
    r.seed = 9;
    r.opt = 1.5;
    r.alg = 0.25;
    r.ratio = 0.25 / 1.5;
    r.ping_count = 4;
    r.packet_count = 8;
    r.pings_per_packet = 0.5;
    r.has_areas = true;
    r.under_area = 2.0;
    r.over_area = 1.0;
    std::string row = trial_to_jsonl(r);
    CHECK(row.find("\"seed\":9") != std::string::npos);
    CHECK(row.find("\"under_area\":2.0") != std::string::npos);
    CHECK(row.find("\"lag_sum\"") == std::string::npos);  // absent for this kind
}
