#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qlm/rational.hpp"
#include "qlm/rng.hpp"

namespace qlm {

enum class EstimatorKind { Extrapolating, Hold, PoissonTick, Pico };

// Server for unit-rate departures: assumes one departure per step and no
// arrivals since the last ping, so e_t = max(0, h - (t - t')). Later pings
// supersede earlier ones; among same-instant pings the largest height wins
// (it subsumes the others' information).
class ExtrapolatingEstimator {
public:
    void on_ping(double send_time, std::int64_t height) {
        if (!last_ || send_time > last_->first ||
            (send_time == last_->first && height > last_->second)) {
            last_ = {send_time, height};
        }
    }
    std::int64_t estimate_at(double t) const {
        if (!last_) return 0;
        return std::max<std::int64_t>(0, last_->second - static_cast<std::int64_t>(t - last_->first));
    }
    const std::optional<std::pair<double, std::int64_t>>& last_ping() const { return last_; }

private:
    std::optional<std::pair<double, std::int64_t>> last_;
};

// Server for unit-rate arrivals: holds the last pinged height between pings;
// the largest height wins among same-instant pings.
class HoldEstimator {
public:
    void on_ping(double send_time, std::int64_t height) {
        if (!has_ping_ || send_time > last_time_) {
            current_ = height;
            last_time_ = send_time;
            has_ping_ = true;
        } else if (send_time == last_time_) {
            current_ = std::max(current_, height);
        }
    }
    std::int64_t estimate() const { return current_; }

private:
    std::int64_t current_ = 0;
    double last_time_ = 0.0;
    bool has_ping_ = false;
};

// Server for Poisson departures: decrements the estimate on its own
// Exponential(rate) tick clock, seeded independently of the departure
// process it mirrors.
class PoissonTickEstimator {
public:
    PoissonTickEstimator(double tick_rate, RngStream tick_stream)
        : rate_(tick_rate), stream_(tick_stream), next_tick_(stream_.exponential(rate_)) {}

    // Applies every tick with time <= t.
    void advance_to(double t) {
        while (next_tick_ <= t) {
            if (estimate_ > 0) --estimate_;
            next_tick_ += stream_.exponential(rate_);
        }
    }
    void on_ping(double /*send_time*/, std::int64_t height) { estimate_ = height; }
    std::int64_t estimate() const { return estimate_; }
    double next_tick_time() const { return next_tick_; }

private:
    double rate_;
    RngStream stream_;
    double next_tick_;
    std::int64_t estimate_ = 0;
};

// One projected rectangle: top (1+3eps)*h, active for integer query times
// t' <= t <= t' + 3*eps*w. The cutoff is the exact integer
// t' + floor(3*eps*w), so no float boundary can flip a column.
struct PicoRectangle {
    double top = 0.0;
    std::int64_t last_active = 0;  // inclusive
    std::int64_t send_time = 0;
    std::int64_t height = 0;
    std::int64_t waiting = 0;
};

// Server for arbitrary arrivals and departures: keeps the projected
// rectangles of received pings and reports the tallest one active at the
// query time. Rectangles expire as the query time passes t' + 3*eps*w;
// expiry can only lower the estimate at later times, never at the time a
// rectangle still covers. Queries must be non-decreasing in time.
//
// Internally a ring buffer holds, for each upcoming integer time, the max
// rectangle top covering it; a ping stamps its active window once. This is
// equivalent to keeping an active-rectangle set and pruning expired entries.
class PicoEstimator {
public:
    explicit PicoEstimator(const Rational& epsilon) : epsilon_(epsilon) { resize(64); }

    PicoRectangle make_rectangle(std::int64_t send_time, std::int64_t height,
                                 std::int64_t waiting) const {
        PicoRectangle r;
        r.send_time = send_time;
        r.height = height;
        r.waiting = waiting;
        r.top = static_cast<double>(height) *
                (static_cast<double>(epsilon_.den + 3 * epsilon_.num) / static_cast<double>(epsilon_.den));
        r.last_active = send_time + epsilon_.floor_scaled(3 * waiting);
        return r;
    }

    void on_ping(std::int64_t send_time, std::int64_t height, std::int64_t waiting) {
        PicoRectangle r = make_rectangle(send_time, height, waiting);
        std::int64_t first = std::max(r.send_time, now_);
        if (r.last_active < first) return;
        if (r.last_active - now_ + 1 > static_cast<std::int64_t>(ring_.size()))
            resize(static_cast<std::size_t>(r.last_active - now_ + 1));
        for (std::int64_t s = first; s <= r.last_active; ++s) {
            double& slot = ring_[static_cast<std::size_t>(s) & mask_];
            if (r.top > slot) slot = r.top;
        }
    }

    // Estimate at integer time t (t must not decrease across calls).
    double estimate_at(std::int64_t t) {
        if (t < now_) throw_error(ErrorCode::InvalidArgument, "pico estimator queried in the past");
        while (now_ < t) {
            ring_[static_cast<std::size_t>(now_) & mask_] = 0.0;
            ++now_;
        }
        return ring_[static_cast<std::size_t>(t) & mask_];
    }

private:
    void resize(std::size_t need) {
        std::size_t n = ring_.empty() ? 64 : ring_.size();
        while (n < need) n *= 2;
        std::vector<double> next(n, 0.0);
        for (std::size_t i = 0; i < ring_.size(); ++i) {
            std::int64_t step = now_ + static_cast<std::int64_t>(i);
            next[static_cast<std::size_t>(step) & (n - 1)] =
                ring_[static_cast<std::size_t>(step) & mask_];
        }
        ring_ = std::move(next);
        mask_ = ring_.size() - 1;
    }

    Rational epsilon_;
    std::vector<double> ring_;
    std::size_t mask_ = 0;
    std::int64_t now_ = 0;
};

}  // namespace qlm
