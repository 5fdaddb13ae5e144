#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "qlm/error.hpp"

namespace qlm {

// Exact non-negative rational, used for the error parameter epsilon so that
// range checks (eps < 1/8, eps <= 1/5, ...) and the rectangle expiry cutoff
// t' + 3*eps*w are decided in integer arithmetic rather than at float
// boundaries.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (d <= 0 || n < 0) throw_error(ErrorCode::InvalidArgument, "rational must be >= 0 with positive denominator");
        std::int64_t g = std::gcd(num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double as_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    bool less_than(std::int64_t n, std::int64_t d) const {  // *this < n/d
        return static_cast<__int128>(num) * d < static_cast<__int128>(n) * den;
    }
    bool at_most(std::int64_t n, std::int64_t d) const {  // *this <= n/d
        return static_cast<__int128>(num) * d <= static_cast<__int128>(n) * den;
    }
    bool positive() const { return num > 0; }

    // floor(k * *this)
    std::int64_t floor_scaled(std::int64_t k) const {
        return static_cast<std::int64_t>((static_cast<__int128>(k) * num) / den);
    }

    std::string to_string() const;

    // Parses a decimal like "0.05", "1/20" or "0.1".
    static Rational parse(const std::string& text);
    // Shortest decimal representation that round-trips the double.
    static Rational from_double(double value);
};

bool operator==(const Rational& a, const Rational& b);

}  // namespace qlm
