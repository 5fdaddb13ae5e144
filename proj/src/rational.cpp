#include "qlm/rational.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace qlm {

bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
}

std::string Rational::to_string() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

Rational Rational::parse(const std::string& text) {
    if (text.empty()) throw_error(ErrorCode::InvalidArgument, "empty rational literal");
    std::size_t slash = text.find('/');
    if (slash != std::string::npos) {
        std::int64_t n = std::strtoll(text.substr(0, slash).c_str(), nullptr, 10);
        std::int64_t d = std::strtoll(text.substr(slash + 1).c_str(), nullptr, 10);
        return Rational(n, d);
    }
    std::size_t dot = text.find('.');
    if (dot == std::string::npos) {
        char* end = nullptr;
        std::int64_t n = std::strtoll(text.c_str(), &end, 10);
        if (end == text.c_str() || *end != '\0')
            throw_error(ErrorCode::InvalidArgument, "bad rational literal: " + text);
        return Rational(n, 1);
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_len = text.size() - dot - 1;
    if (frac_len > 17) throw_error(ErrorCode::InvalidArgument, "rational literal too precise: " + text);
    char* end = nullptr;
    std::int64_t n = std::strtoll(digits.c_str(), &end, 10);
    if (end == digits.c_str() || *end != '\0')
        throw_error(ErrorCode::InvalidArgument, "bad rational literal: " + text);
    std::int64_t d = 1;
    for (std::size_t i = 0; i < frac_len; ++i) d *= 10;
    return Rational(n, d);
}

Rational Rational::from_double(double value) {
    if (!(value >= 0) || !std::isfinite(value))
        throw_error(ErrorCode::InvalidArgument, "rational from non-finite or negative double");
    char buf[40];
    for (int digits = 1; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    std::string s(buf);
    std::size_t e = s.find_first_of("eE");
    if (e == std::string::npos) return parse(s);
    // Expand the exponent form into plain decimal.
    int exp = std::atoi(s.c_str() + e + 1);
    std::string mant = s.substr(0, e);
    std::size_t dot = mant.find('.');
    std::string digits = (dot == std::string::npos) ? mant : mant.substr(0, dot) + mant.substr(dot + 1);
    int frac = (dot == std::string::npos) ? 0 : static_cast<int>(mant.size() - dot - 1);
    int shift = frac - exp;
    if (shift <= 0) {
        digits.append(static_cast<std::size_t>(-shift), '0');
        return parse(digits);
    }
    while (static_cast<int>(digits.size()) <= shift) digits.insert(digits.begin(), '0');
    digits.insert(digits.end() - shift, '.');
    return parse(digits);
}

}  // namespace qlm
