#include "qlm/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace qlm {

TimeMode scenario_mode(const Scenario& sc) {
    auto side_mode = [](const ProcessSpec& s) {
        if (s.kind == ProcessKind::Poisson) return TimeMode::Continuous;
        if (s.kind == ProcessKind::Replay) return s.fragment.mode;
        return TimeMode::Discrete;
    };
    return side_mode(sc.arrival) == TimeMode::Continuous ? TimeMode::Continuous
                                                         : side_mode(sc.departure);
}

void validate_scenario(const Scenario& sc) {
    validate_policy(sc.policy);
    const TimeMode mode = scenario_mode(sc);
    auto fail = [](const std::string& msg) { throw_error(ErrorCode::Config, msg); };

    switch (sc.policy.kind) {
        case PolicyKind::PoaDep:
            if (sc.estimator != EstimatorKind::Extrapolating && sc.estimator != EstimatorKind::PoissonTick)
                fail("key 'estimator': poa_dep pairs with extrapolating or poisson_tick");
            break;
        case PolicyKind::PoaArr:
            if (sc.estimator != EstimatorKind::Hold)
                fail("key 'estimator': poa_arr pairs with hold");
            break;
        case PolicyKind::Pico:
            if (sc.estimator != EstimatorKind::Pico)
                fail("key 'estimator': pico pairs with the pico estimator");
            break;
        case PolicyKind::ScaledPoa:
            if (sc.estimator != EstimatorKind::Extrapolating && sc.estimator != EstimatorKind::Hold)
                fail("key 'estimator': scaled_poa pairs with extrapolating or hold");
            break;
    }
    if (sc.estimator == EstimatorKind::PoissonTick && mode != TimeMode::Continuous)
        fail("key 'estimator': poisson_tick requires a continuous-time scenario");
    if ((sc.estimator == EstimatorKind::Extrapolating || sc.estimator == EstimatorKind::Pico) &&
        mode != TimeMode::Discrete)
        fail("key 'estimator': extrapolating and pico require a discrete-time scenario");
    if (sc.estimator == EstimatorKind::PoissonTick && sc.tick_rate <= 0 &&
        sc.departure.kind != ProcessKind::Poisson)
        fail("key 'tick_rate': required when the departure process is not poisson");

    bool needs_horizon = false;
    for (const ProcessSpec* s : {&sc.arrival, &sc.departure}) {
        if (s->kind == ProcessKind::ConstantRate || s->kind == ProcessKind::Poisson) needs_horizon = true;
        if (s->kind == ProcessKind::BurstyIid && s->steps <= 0) needs_horizon = true;
    }
    if (needs_horizon && sc.horizon <= 0)
        fail("key 'horizon': required for open-ended arrival/departure processes");
}

namespace {

struct SimAccum {
    std::vector<std::int64_t> heights;        // discrete profile
    std::vector<PacketRecord> records;
    bool kept_records = false;
    std::int64_t packet_count = 0;
    double delay_sum = 0.0;
    std::int64_t ping_count = 0;
    double err_abs = 0.0;                     // sum |h - e| (discrete, non-pico)
    std::int64_t err_signed = 0;              // sum (h - e)
    double under = 0.0;                       // pico: sum max(0, h - e)
    double over = 0.0;                        // pico: sum max(0, e - h)
    bool e_le_h = true;
    double opt_int = 0.0;                     // continuous: integral of h
    double alg_int = 0.0;                     // continuous: integral of |h - e|
    std::vector<double> estimates;
    std::vector<Ping> pings;
    std::vector<PicoRectangle> rectangles;
};

struct SimPacket {
    std::int64_t id;
    double arrival;
    RngStream stream;
};

void simulate_discrete(const Trace& trace, const Scenario& sc, std::uint64_t seed,
                       const TrialOptions& opt, SimAccum& out) {
    const std::int64_t T = static_cast<std::int64_t>(trace.horizon);
    const bool is_pico = sc.policy.kind == PolicyKind::Pico;
    const bool keep_records = opt.keep_records || !is_pico;
    const double eps = sc.policy.epsilon.as_double();
    const double pico_c = 5.0 * std::log(1.0 / eps) / (eps * eps);

    ExtrapolatingEstimator extrap;
    HoldEstimator hold;
    PicoEstimator pico(sc.policy.epsilon);

    out.kept_records = keep_records;
    out.heights.assign(static_cast<std::size_t>(T) + 1, 0);
    if (opt.keep_trajectory) out.estimates.reserve(static_cast<std::size_t>(T) + 1);

    std::deque<SimPacket> queue;
    std::size_t ev = 0;
    for (std::int64_t t = 0; t <= T; ++t) {
        if (ev < trace.events.size() && static_cast<std::int64_t>(trace.events[ev].time) == t) {
            const TraceEvent& e = trace.events[ev++];
            for (std::int64_t k = 0; k < e.departure_tokens && !queue.empty(); ++k) {
                const SimPacket& head = queue.front();
                out.delay_sum += static_cast<double>(t) - head.arrival;
                if (keep_records)
                    out.records[static_cast<std::size_t>(head.id)].departure_time =
                        static_cast<double>(t);
                queue.pop_front();
            }
            for (std::int64_t k = 0; k < e.arrivals; ++k) {
                std::int64_t id = out.packet_count++;
                std::int64_t h_arr = static_cast<std::int64_t>(queue.size()) + 1;
                SimPacket p{id, static_cast<double>(t),
                            RngStream::derived(seed, stream_tag::kPacket,
                                               static_cast<std::uint64_t>(id))};
                if (keep_records) {
                    PacketRecord rec;
                    rec.id = id;
                    rec.arrival_time = static_cast<double>(t);
                    rec.height_at_arrival = h_arr;
                    out.records.push_back(rec);
                }
                if (!is_pico) {
                    double prob = ping_prob(sc.policy, h_arr, 0);
                    if (decide(prob, p.stream)) {
                        ++out.ping_count;
                        out.pings.push_back(
                            {id, static_cast<double>(t), h_arr, 0, static_cast<double>(t)});
                        if (sc.estimator == EstimatorKind::Extrapolating)
                            extrap.on_ping(static_cast<double>(t), h_arr);
                        else
                            hold.on_ping(static_cast<double>(t), h_arr);
                    }
                }
                queue.push_back(std::move(p));
            }
        }
        const std::int64_t h = static_cast<std::int64_t>(queue.size());
        out.heights[static_cast<std::size_t>(t)] = h;

        if (is_pico) {
            // Every queued packet observes (own position from the head,
            // completed waiting steps + 1) and decides independently; the
            // resulting rectangle covers this column onward.
            std::int64_t pos = 0;
            for (SimPacket& p : queue) {
                ++pos;
                std::int64_t w = t - static_cast<std::int64_t>(p.arrival) + 1;
                double hw = static_cast<double>(pos) * static_cast<double>(w);
                double prob = hw <= pico_c ? 1.0 : pico_c / hw;
                if (decide(prob, p.stream)) {
                    ++out.ping_count;
                    pico.on_ping(t + 1, pos, w);
                    if (opt.keep_pings)
                        out.pings.push_back({p.id, static_cast<double>(t + 1), pos, w, p.arrival});
                    if (opt.keep_rectangles)
                        out.rectangles.push_back(pico.make_rectangle(t + 1, pos, w));
                }
            }
            double e = pico.estimate_at(t + 1);
            double diff = static_cast<double>(h) - e;
            if (diff > 0) out.under += diff;
            else out.over += -diff;
            if (opt.keep_trajectory) out.estimates.push_back(e);
        } else {
            std::int64_t e = sc.estimator == EstimatorKind::Extrapolating
                                 ? extrap.estimate_at(static_cast<double>(t))
                                 : hold.estimate();
            if (e > h) out.e_le_h = false;
            out.err_signed += h - e;
            out.err_abs += static_cast<double>(std::llabs(h - e));
            if (opt.keep_trajectory) out.estimates.push_back(static_cast<double>(e));
        }
    }
    if (!queue.empty())
        throw_error(ErrorCode::InvalidArgument, "trace does not drain by its horizon");
}

void simulate_continuous(const Trace& trace, const Scenario& sc, std::uint64_t seed,
                         const TrialOptions& opt, SimAccum& out, HeightProfile& profile) {
    const double T = trace.horizon;
    const bool tick_server = sc.estimator == EstimatorKind::PoissonTick;
    const double tick_rate = sc.tick_rate > 0 ? sc.tick_rate : sc.departure.poisson_rate;
    PoissonTickEstimator ticker(tick_rate, RngStream::derived(seed, stream_tag::kServer));
    HoldEstimator hold;

    profile.mode = TimeMode::Continuous;
    profile.end_time = T;
    profile.segment_times.push_back(0.0);
    profile.segment_heights.push_back(0);

    std::deque<SimPacket> queue;
    out.kept_records = true;
    double now = 0.0;
    std::int64_t h = 0;

    auto estimate = [&]() { return tick_server ? ticker.estimate() : hold.estimate(); };
    auto integrate_to = [&](double t) {
        if (t <= now) return;
        std::int64_t e = estimate();
        if (e > h) out.e_le_h = false;
        out.opt_int += static_cast<double>(h) * (t - now);
        out.alg_int += std::fabs(static_cast<double>(h - e)) * (t - now);
        now = t;
    };
    auto mark_profile = [&](double t) {
        if (profile.segment_heights.back() == h) return;
        if (profile.segment_times.back() == t) {
            profile.segment_heights.back() = h;
        } else {
            profile.segment_times.push_back(t);
            profile.segment_heights.push_back(h);
        }
    };

    std::size_t ev = 0;
    while (true) {
        double t_event = ev < trace.events.size() ? trace.events[ev].time
                                                  : std::numeric_limits<double>::infinity();
        double t_tick = tick_server ? ticker.next_tick_time()
                                    : std::numeric_limits<double>::infinity();
        double t = std::min(t_event, t_tick);
        if (t > T) break;
        integrate_to(t);
        if (t_tick <= t_event) {
            ticker.advance_to(t_tick);
            continue;
        }
        const TraceEvent& evt = trace.events[ev++];
        for (std::int64_t k = 0; k < evt.departure_tokens && !queue.empty(); ++k) {
            const SimPacket& head = queue.front();
            out.delay_sum += t - head.arrival;
            out.records[static_cast<std::size_t>(head.id)].departure_time = t;
            queue.pop_front();
            --h;
        }
        for (std::int64_t k = 0; k < evt.arrivals; ++k) {
            std::int64_t id = out.packet_count++;
            ++h;
            SimPacket p{id, t, RngStream::derived(seed, stream_tag::kPacket,
                                                  static_cast<std::uint64_t>(id))};
            PacketRecord rec;
            rec.id = id;
            rec.arrival_time = t;
            rec.height_at_arrival = h;
            out.records.push_back(rec);
            double prob = ping_prob(sc.policy, h, 0);
            if (decide(prob, p.stream)) {
                ++out.ping_count;
                out.pings.push_back({id, t, h, 0, t});
                if (tick_server) ticker.on_ping(t, h);
                else hold.on_ping(t, h);
            }
            queue.push_back(std::move(p));
        }
        mark_profile(t);
    }
    integrate_to(T);
    (void)opt;
    if (!queue.empty())
        throw_error(ErrorCode::InvalidArgument, "trace does not drain by its horizon");
}

}  // namespace

TrialArtifacts run_trial_full(const Scenario& scenario, std::uint64_t seed,
                              const TrialOptions& options) {
    validate_scenario(scenario);
    TrialArtifacts art;
    art.trace = generate(scenario.arrival, scenario.departure, scenario.horizon, seed);
    validate_trace(art.trace);

    SimAccum acc;
    const bool is_pico = scenario.policy.kind == PolicyKind::Pico;
    double height_sum = 0.0;
    if (art.trace.mode == TimeMode::Discrete) {
        simulate_discrete(art.trace, scenario, seed, options, acc);
        art.profile.mode = TimeMode::Discrete;
        art.profile.steps = std::move(acc.heights);
        art.profile.end_time = art.trace.horizon;
        std::int64_t hs = art.profile.discrete_sum();
        if (hs != static_cast<std::int64_t>(acc.delay_sum))
            throw_error(ErrorCode::InconsistentProfile,
                        "height-sum and delay-sum disagree after replay");
        height_sum = static_cast<double>(hs);
    } else {
        simulate_continuous(art.trace, scenario, seed, options, acc, art.profile);
        height_sum = acc.opt_int;
        double scale = std::max({1.0, height_sum, acc.delay_sum});
        if (std::fabs(height_sum - acc.delay_sum) > 1e-9 * scale)
            throw_error(ErrorCode::InconsistentProfile,
                        "height integral and delay-sum disagree beyond tolerance");
    }

    const double T = art.trace.horizon;
    TrialResult& r = art.result;
    r.seed = seed;
    r.horizon = T;
    r.packet_count = acc.packet_count;
    r.ping_count = acc.ping_count;
    r.pings_per_packet = acc.packet_count > 0 ? static_cast<double>(acc.ping_count) /
                                                    static_cast<double>(acc.packet_count)
                                              : 0.0;
    double alg_sum = 0.0;
    if (art.trace.mode == TimeMode::Continuous) alg_sum = acc.alg_int;
    else alg_sum = is_pico ? acc.under + acc.over : acc.err_abs;
    r.height_sum = height_sum;
    r.opt = T > 0 ? height_sum / T : 0.0;
    r.alg = T > 0 ? alg_sum / T : 0.0;
    if (r.opt > 0) {
        r.ratio = r.alg / r.opt;
    } else {
        r.ratio = 0.0;
        r.degenerate = r.alg > 0;
    }
    if (is_pico) {
        r.under_area = acc.under;
        r.over_area = acc.over;
        r.has_areas = true;
    } else {
        r.estimate_below_truth = acc.e_le_h;
        if (art.trace.mode == TimeMode::Discrete && acc.kept_records) {
            std::vector<std::int64_t> deltas = lag_deltas(acc.records, acc.pings);
            r.lag_sum = 0;
            for (std::int64_t d : deltas) r.lag_sum += d;
            r.has_lag = true;
        }
    }

    if (acc.kept_records) art.records = std::move(acc.records);
    art.estimates = std::move(acc.estimates);
    art.pings = std::move(acc.pings);
    art.rectangles = std::move(acc.rectangles);
    return art;
}

TrialResult run_trial(const Scenario& scenario, std::uint64_t seed) {
    return run_trial_full(scenario, seed, TrialOptions{}).result;
}

ExperimentSummary summarize(std::vector<TrialResult> trials) {
    ExperimentSummary s;
    s.n_trials = static_cast<std::int64_t>(trials.size());
    s.trials = std::move(trials);
    if (s.trials.empty()) return s;

    struct Field {
        const char* name;
        double (*get)(const TrialResult&);
        bool (*present)(const TrialResult&);
    };
    static const Field kFields[] = {
        {"opt", [](const TrialResult& r) { return r.opt; },
         [](const TrialResult&) { return true; }},
        {"alg", [](const TrialResult& r) { return r.alg; },
         [](const TrialResult&) { return true; }},
        {"ratio", [](const TrialResult& r) { return r.ratio; },
         [](const TrialResult&) { return true; }},
        {"ping_count", [](const TrialResult& r) { return static_cast<double>(r.ping_count); },
         [](const TrialResult&) { return true; }},
        {"pings_per_packet", [](const TrialResult& r) { return r.pings_per_packet; },
         [](const TrialResult&) { return true; }},
        {"lag_sum", [](const TrialResult& r) { return static_cast<double>(r.lag_sum); },
         [](const TrialResult& r) { return r.has_lag; }},
        {"under_area", [](const TrialResult& r) { return r.under_area; },
         [](const TrialResult& r) { return r.has_areas; }},
        {"over_area", [](const TrialResult& r) { return r.over_area; },
         [](const TrialResult& r) { return r.has_areas; }},
    };
    for (const Field& f : kFields) {
        bool all = true;
        for (const TrialResult& t : s.trials) all = all && f.present(t);
        if (!all) continue;
        double n = static_cast<double>(s.trials.size());
        double mean = 0.0;
        for (const TrialResult& t : s.trials) mean += f.get(t);
        mean /= n;
        double var = 0.0;
        for (const TrialResult& t : s.trials) {
            double d = f.get(t) - mean;
            var += d * d;
        }
        FieldStat st;
        st.present = true;
        st.mean = mean;
        st.se = s.trials.size() >= 2 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
        s.stats[f.name] = st;
    }
    return s;
}

ExperimentSummary run_experiment(const Scenario& scenario, std::int64_t n_trials,
                                 std::uint64_t base_seed, int threads) {
    if (n_trials < 1) throw_error(ErrorCode::InvalidArgument, "n_trials must be >= 1");
    validate_scenario(scenario);
    std::vector<TrialResult> trials(static_cast<std::size_t>(n_trials));
    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(n_trials)));

    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            std::int64_t i = next.fetch_add(1);
            if (i >= n_trials) return;
            try {
                trials[static_cast<std::size_t>(i)] =
                    run_trial(scenario, base_seed + static_cast<std::uint64_t>(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return summarize(std::move(trials));
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* kSummaryFields[] = {"opt",      "alg",      "ratio",    "ping_count",
                                "pings_per_packet", "lag_sum", "under_area", "over_area"};

}  // namespace

std::string summary_csv_header() {
    std::ostringstream os;
    os << "label,n_trials";
    for (const char* f : kSummaryFields) os << ',' << f << "_mean," << f << "_se";
    os << '\n';
    return os.str();
}

std::string summary_csv_row(const ExperimentSummary& summary, const std::string& label) {
    std::ostringstream os;
    os << label << ',' << summary.n_trials;
    for (const char* f : kSummaryFields) {
        auto it = summary.stats.find(f);
        if (it == summary.stats.end() || !it->second.present) {
            os << ",,";
        } else {
            os << ',' << fmt_double(it->second.mean) << ',' << fmt_double(it->second.se);
        }
    }
    os << '\n';
    return os.str();
}

std::string trials_jsonl(const ExperimentSummary& summary) {
    std::ostringstream os;
    for (const TrialResult& t : summary.trials) os << trial_to_jsonl(t) << '\n';
    return os.str();
}

std::string trajectory_csv(const Scenario& scenario, std::uint64_t seed) {
    TrialOptions opt;
    opt.keep_trajectory = true;
    opt.keep_profile = true;
    TrialArtifacts art = run_trial_full(scenario, seed, opt);
    std::ostringstream os;
    os << "time,estimate,true_height,abs_error\n";
    if (art.profile.mode == TimeMode::Discrete) {
        for (std::size_t t = 0; t < art.profile.steps.size(); ++t) {
            double h = static_cast<double>(art.profile.steps[t]);
            double e = art.estimates[t];
            os << t << ',' << fmt_double(e) << ',' << art.profile.steps[t] << ','
               << fmt_double(std::fabs(h - e)) << '\n';
        }
    } else {
        throw_error(ErrorCode::InvalidArgument,
                    "trajectory export is available for discrete-time scenarios");
    }
    return os.str();
}

}  // namespace qlm
