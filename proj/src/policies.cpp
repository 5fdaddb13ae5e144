#include "qlm/policies.hpp"

#include <algorithm>
#include <cmath>

namespace qlm {

void validate_policy(const PolicyParams& params) {
    const Rational& e = params.epsilon;
    if (!e.positive() || !e.less_than(1, 1))
        throw_error(ErrorCode::ParameterOutOfRange, "epsilon must lie in (0, 1)");
    if (params.kind == PolicyKind::PoaArr && !e.less_than(1, 2))
        throw_error(ErrorCode::ParameterOutOfRange, "poa_arr requires epsilon in (0, 1/2)");
    if (params.kind == PolicyKind::Pico && !e.at_most(1, 5))
        throw_error(ErrorCode::ParameterOutOfRange, "pico requires epsilon in (0, 1/5]");
    if (params.kind == PolicyKind::ScaledPoa && !(params.scale_c > 0))
        throw_error(ErrorCode::ParameterOutOfRange, "scaled_poa requires a positive scale");
}

double poa_dep_ping_prob(std::int64_t h, double eps) {
    return std::min(1.0, 2.0 * std::log(1.0 / eps) / (eps * static_cast<double>(h)));
}

double poa_arr_ping_prob(std::int64_t h, double eps) {
    return std::min(1.0, 4.0 / (eps * static_cast<double>(h)));
}

double pico_ping_prob(std::int64_t h, std::int64_t w, double eps) {
    return std::min(1.0, 5.0 * std::log(1.0 / eps) /
                             (eps * eps * static_cast<double>(h) * static_cast<double>(w)));
}

double scaled_poa_ping_prob(std::int64_t h, double eps, double c) {
    return std::min(1.0, c / (eps * static_cast<double>(h)));
}

double ping_prob(const PolicyParams& params, std::int64_t h, std::int64_t w) {
    const double eps = params.epsilon.as_double();
    switch (params.kind) {
        case PolicyKind::PoaDep: return poa_dep_ping_prob(h, eps);
        case PolicyKind::PoaArr: return poa_arr_ping_prob(h, eps);
        case PolicyKind::Pico: return pico_ping_prob(h, w, eps);
        case PolicyKind::ScaledPoa: return scaled_poa_ping_prob(h, eps, params.scale_c);
    }
    return 0.0;
}

double pico_expected_pings_unit_rate(std::int64_t h, double eps) {
    double sum = 0.0;
    for (std::int64_t t = 1; t <= h; ++t) sum += pico_ping_prob(h - t + 1, t, eps);
    return sum;
}

}  // namespace qlm
