#ifndef KHINCHIN_EXACT_HPP
#define KHINCHIN_EXACT_HPP

// Conversions between exact big numbers and binary128, plus an exact
// decimal parser.

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "error.hpp"
#include "xreal.hpp"

namespace khinchin {

using bigint = boost::multiprecision::cpp_int;
using rational = boost::multiprecision::cpp_rational;

/// Nearest-below binary128 value of a non-negative or negative integer
/// (truncated to 113 significant bits).
inline xreal to_xreal(const bigint& v) {
    using boost::multiprecision::ldexp;
    if (v == 0) return xreal(0);
    if (v < 0) return -to_xreal(bigint(-v));
    const std::size_t bits = boost::multiprecision::msb(v) + 1;
    const std::size_t shift = bits > 113 ? bits - 113 : 0;
    const bigint top = v >> shift;
    const bigint mask = (bigint(1) << 64) - 1;
    const auto lo = static_cast<std::uint64_t>(top & mask);
    const auto hi = static_cast<std::uint64_t>(top >> 64);
    xreal r = ldexp(xreal(hi), 64) + xreal(lo);
    return ldexp(r, static_cast<int>(shift));
}

inline xreal to_xreal(const rational& q) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::ldexp;
    using boost::multiprecision::numerator;
    const bigint num = numerator(q);
    const bigint den = denominator(q);
    if (num == 0) return xreal(0);
    // Scale so the integer quotient carries at least 120 significant bits.
    const long nb = static_cast<long>(boost::multiprecision::msb(num < 0 ? bigint(-num) : num));
    const long db = static_cast<long>(boost::multiprecision::msb(den));
    const long scale = 120 - (nb - db);
    const bigint q_int = scale >= 0 ? bigint((num << scale) / den) : bigint(num / (den << -scale));
    return ldexp(to_xreal(q_int), static_cast<int>(-scale));
}

/// The exact rational value of a finite binary128 number.
inline rational to_rational(const xreal& x) {
    using boost::multiprecision::frexp;
    using boost::multiprecision::ldexp;
    if (!is_finite(x)) throw domain_error("to_rational: non-finite value");
    if (x == 0) return rational(0);
    int e = 0;
    const xreal m = frexp(x, &e);  // x = m 2^e, 0.5 <= |m| < 1
    xreal scaled = ldexp(m, 113);  // integral
    e -= 113;
    const bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    const xreal two64 = ldexp(xreal(1), 64);
    const xreal hi = boost::multiprecision::floor(scaled / two64);
    const xreal lo = scaled - hi * two64;
    bigint n = (bigint(static_cast<std::uint64_t>(hi)) << 64) + bigint(static_cast<std::uint64_t>(lo));
    if (neg) n = -n;
    if (e >= 0) return rational(n << e);
    return rational(n, bigint(1) << -e);
}

/// Exact value of a decimal literal such as "12", "-0.125", "3e-4", "2.5E+3".
inline rational parse_decimal(std::string_view text) {
    auto fail = [&] { throw validation_error("not a decimal number: '" + std::string(text) + "'"); };
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t end = text.size();
    while (end > i && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    bool neg = false;
    if (i < end && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
    bigint mant = 0;
    long exp10 = 0;
    bool digits = false, dot = false;
    for (; i < end; ++i) {
        const char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mant = mant * 10 + (c - '0');
            if (dot) --exp10;
            digits = true;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    if (!digits) fail();
    if (i < end && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < end && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
        long e = 0;
        bool edigits = false;
        for (; i < end && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
            e = e * 10 + (text[i] - '0');
            if (e > 100000) fail();
            edigits = true;
        }
        if (!edigits) fail();
        exp10 += eneg ? -e : e;
    }
    if (i != end) fail();
    bigint p10 = boost::multiprecision::pow(bigint(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
    rational r = exp10 >= 0 ? rational(mant * p10) : rational(mant, p10);
    return neg ? rational(-r) : r;
}

}  // namespace khinchin

#endif  // KHINCHIN_EXACT_HPP
