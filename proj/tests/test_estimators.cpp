#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "qlm/estimators.hpp"

using namespace qlm;

TEST_CASE("extrapolating estimator walks the last ping down") {
    ExtrapolatingEstimator e;
    CHECK(e.estimate_at(3) == 0);  // no ping yet
    e.on_ping(5, 10);
    CHECK(e.estimate_at(5) == 10);
    CHECK(e.estimate_at(8) == 7);
    CHECK(e.estimate_at(20) == 0);  // floored
}

TEST_CASE("extrapolating estimator: later pings supersede, same-step max wins") {
    ExtrapolatingEstimator e;
    e.on_ping(5, 10);
    e.on_ping(9, 3);
    CHECK(e.estimate_at(9) == 3);
    e.on_ping(9, 6);
    CHECK(e.estimate_at(9) == 6);
    e.on_ping(9, 4);  // smaller same-instant ping is subsumed
    CHECK(e.estimate_at(9) == 6);
}

TEST_CASE("hold estimator keeps the last ping") {
    HoldEstimator e;
    CHECK(e.estimate() == 0);
    e.on_ping(3, 7);
    CHECK(e.estimate() == 7);  // unchanged until the next ping
    e.on_ping(50, 2);
    CHECK(e.estimate() == 2);
}

TEST_CASE("hold estimator: largest height wins among simultaneous pings") {
    HoldEstimator e;
    e.on_ping(3, 4);
    e.on_ping(3, 9);
    e.on_ping(3, 5);
    CHECK(e.estimate() == 9);
}

TEST_CASE("tick estimator decrements on its own clock and floors at zero") {
    PoissonTickEstimator e(1.0, RngStream(123));
    e.on_ping(0.0, 5);
    CHECK(e.estimate() == 5);
    e.advance_to(0.0);
    CHECK(e.estimate() == 5);  // no time, no ticks
    e.advance_to(1000.0);      // ~1000 ticks, far more than the estimate
    CHECK(e.estimate() == 0);
}

TEST_CASE("tick counts match the Poisson rate over many windows") {
    const double mu = 1.0;
    const double window = 50.0;
    const int n = 1000;
    PoissonTickEstimator e(mu, RngStream::derived(7, stream_tag::kServer));
    double total_ticks = 0;
    double t = 0;
    for (int i = 0; i < n; ++i) {
        e.on_ping(t, 1 << 30);  // keep the estimate positive so every tick counts
        std::int64_t before = e.estimate();
        t += window;
        e.advance_to(t);
        total_ticks += static_cast<double>(before - e.estimate());
    }
    double mean = total_ticks / n;
    double se = std::sqrt(mu * window / n);
    CHECK(std::fabs(mean - mu * window) <= 3 * se);
}

TEST_CASE("pico estimator: rectangle life matches the exact cutoff") {
    PicoEstimator e(Rational(1, 10));
    e.on_ping(10, 20, 10);  // top 26, active through 10 + floor(3)=13
    CHECK(e.estimate_at(10) == doctest::Approx(26.0));
    CHECK(e.estimate_at(12) == doctest::Approx(26.0));
    CHECK(e.estimate_at(13) == doctest::Approx(26.0));
    CHECK(e.estimate_at(14) == 0.0);
}

TEST_CASE("pico estimator: overlapping rectangles take the max") {
    PicoEstimator e(Rational(1, 10));
    e.on_ping(10, 20, 10);  // top 26
    e.on_ping(10, 10, 10);  // top 13
    CHECK(e.estimate_at(11) == doctest::Approx(26.0));
    CHECK(e.estimate_at(14) == 0.0);

    PicoEstimator none(Rational(1, 10));
    CHECK(none.estimate_at(0) == 0.0);
}

TEST_CASE("pico estimator: expiry boundary is exact, not a float artifact") {
    // eps = 1/3 makes 3*eps*w land exactly on integers: w=7 -> cutoff t'+7.
    PicoEstimator e(Rational(1, 3));
    e.on_ping(100, 5, 7);
    CHECK(e.estimate_at(107) == doctest::Approx(10.0));
    CHECK(e.estimate_at(108) == 0.0);
}

TEST_CASE("pico estimator matches a keep-everything oracle on random traffic") {
    RngStream rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        PicoEstimator fast(Rational(1, 10));
        std::vector<PicoRectangle> all;
        std::int64_t t = 0;
        for (int step = 0; step < 200; ++step) {
            t += 1;
            int n_pings = static_cast<int>(rng.next_below(3));
            for (int k = 0; k < n_pings; ++k) {
                std::int64_t h = 1 + static_cast<std::int64_t>(rng.next_below(50));
                std::int64_t w = 1 + static_cast<std::int64_t>(rng.next_below(60));
                fast.on_ping(t, h, w);
                all.push_back(fast.make_rectangle(t, h, w));
            }
            double naive = 0.0;
            for (const PicoRectangle& r : all) {
                if (r.send_time <= t && t <= r.last_active) naive = std::max(naive, r.top);
            }
            CHECK(fast.estimate_at(t) == naive);
        }
    }
}

TEST_CASE("pico estimator grows its window for long waits") {
    PicoEstimator e(Rational(1, 5));
    e.on_ping(3, 2, 100000);  // covers 60000 steps ahead
    CHECK(e.estimate_at(3) == doctest::Approx(3.2));
    CHECK(e.estimate_at(60003) == doctest::Approx(3.2));
    CHECK(e.estimate_at(60004) == 0.0);
}
