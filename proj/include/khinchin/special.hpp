#ifndef KHINCHIN_SPECIAL_HPP
#define KHINCHIN_SPECIAL_HPP

// Gamma, Riemann zeta and the standard normal CDF, evaluated in binary128
// and rounded to double at the API boundary.
//
// Accuracy contract (relative unless noted):
//   gamma(x)       x in [0.5, 60]    <= 1e-12   (observed ~1e-16)
//   zeta(x)        x in (1, 40]      <= 1e-12   (observed ~1e-16)
//   normal_cdf(x)  x in [-8, 8]      <= 1e-12 absolute
// The binary128 kernels are accurate to roughly 1e-30; the double overloads
// are limited by the final rounding.

#include <array>
#include <cmath>

#include "error.hpp"
#include "xreal.hpp"

namespace khinchin::special {

namespace detail {

// B_2, B_4, ..., B_30 as numerator/denominator pairs.
inline constexpr std::array<std::array<double, 2>, 15> bernoulli_even = {{
    {1.0, 6.0},
    {-1.0, 30.0},
    {1.0, 42.0},
    {-1.0, 30.0},
    {5.0, 66.0},
    {-691.0, 2730.0},
    {7.0, 6.0},
    {-3617.0, 510.0},
    {43867.0, 798.0},
    {-174611.0, 330.0},
    {854513.0, 138.0},
    {-236364091.0, 2730.0},
    {8553103.0, 6.0},
    {-23749461029.0, 870.0},
    {8615841276005.0, 14322.0},
}};

inline xreal bernoulli(std::size_t k) {  // B_{2k}, k >= 1
    const auto& b = bernoulli_even[k - 1];
    return xreal(b[0]) / xreal(b[1]);
}

// Stirling series for ln Gamma(z), z >= 30. The truncation error after
// B_30 is below |B_32| / (32*31*z^31) < 1e-40.
inline xreal lgamma_stirling(const xreal& z) {
    using boost::multiprecision::log;
    xreal r = (z - xreal(0.5)) * log(z) - z + log(2 * xpi) / 2;
    const xreal z2 = z * z;
    xreal zp = z;
    for (std::size_t k = 1; k <= bernoulli_even.size(); ++k) {
        const auto n = static_cast<double>(2 * k);
        r += bernoulli(k) / (xreal(n) * xreal(n - 1) * zp);
        zp *= z2;
    }
    return r;
}

inline xreal erfc_positive(const xreal& x) {
    using boost::multiprecision::exp;
    using boost::multiprecision::sqrt;
    if (x < 3) {
        // erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1}/(2n+1)!!;
        // every term is positive.
        xreal term = x;
        xreal sum = x;
        const xreal x2 = x * x;
        for (int n = 1; n < 400; ++n) {
            term *= 2 * x2 / xreal(2 * n + 1);
            sum += term;
            if (term < sum * xreal(1e-36)) break;
        }
        return 1 - 2 / sqrt(xpi) * exp(-x2) * sum;
    }
    // Continued fraction erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
    // evaluated with the modified Lentz method.
    const xreal tiny("1e-4000");
    xreal f = x;
    xreal c = x;
    xreal d = 0;
    for (int n = 1; n < 5000; ++n) {
        const xreal a = xreal(n) / 2;
        d = x + a * d;
        if (d == 0) d = tiny;
        c = x + a / c;
        if (c == 0) c = tiny;
        d = 1 / d;
        const xreal delta = c * d;
        f *= delta;
        if (boost::multiprecision::abs(delta - 1) < xreal(1e-34)) break;
    }
    return exp(-x * x) / (sqrt(xpi) * f);
}

}  // namespace detail

/// Gamma function on [0.5, 60] in binary128: upward recurrence to z >= 30,
/// then the Stirling series.
inline xreal gamma_x(const xreal& x) {
    using boost::multiprecision::exp;
    if (!(x >= xreal(0.5) && x <= xreal(60)))
        throw domain_error("gamma: argument outside [0.5, 60]");
    xreal z = x;
    xreal denom = 1;
    while (z < 30) {
        denom *= z;
        z += 1;
    }
    return exp(detail::lgamma_stirling(z)) / denom;
}

inline double gamma(double x) { return to_double(gamma_x(xreal(x))); }

/// Riemann zeta for real x > 1 by Euler-Maclaurin summation with N = 20
/// and corrections through B_30.
inline xreal zeta_x(const xreal& x) {
    using boost::multiprecision::pow;
    if (!(x > 1)) throw domain_error("zeta: requires x > 1");
    constexpr int N = 20;
    compensated_sum<xreal> s;
    for (int n = N - 1; n >= 1; --n) s += pow(xreal(n), -x);
    const xreal nx = pow(xreal(N), -x);
    s += xreal(N) * nx / (x - 1);
    s += nx / 2;
    // sum_k B_2k/(2k)! * x(x+1)...(x+2k-2) * N^{-x-2k+1}
    xreal rising = x;        // x(x+1)...(x+2k-2)
    xreal fact = 2;          // (2k)!
    xreal npow = nx / N;     // N^{-x-2k+1}
    for (std::size_t k = 1; k <= detail::bernoulli_even.size(); ++k) {
        s += detail::bernoulli(k) / fact * rising * npow;
        const auto kk = static_cast<double>(k);
        rising *= (x + 2 * kk - 1) * (x + 2 * kk);
        fact *= xreal(2 * kk + 1) * xreal(2 * kk + 2);
        npow /= xreal(N) * xreal(N);
    }
    return s.value();
}

inline double zeta(double x) { return to_double(zeta_x(xreal(x))); }

/// Standard normal CDF in binary128.
inline xreal normal_cdf_x(const xreal& x) {
    using boost::multiprecision::sqrt;
    const xreal z = (x < 0 ? -x : x) / sqrt(xreal(2));
    const xreal upper = detail::erfc_positive(z) / 2;  // P(Z > |x|)
    return x < 0 ? upper : 1 - upper;
}

/// Standard normal CDF. Saturates to 0/1 far outside [-8, 8].
inline double normal_cdf(double x) {
    if (std::isnan(x)) return x;
    if (x > 40) return 1.0;
    if (x < -40) return to_double(normal_cdf_x(xreal(-40)));
    return to_double(normal_cdf_x(xreal(x)));
}

}  // namespace khinchin::special

#endif  // KHINCHIN_SPECIAL_HPP
