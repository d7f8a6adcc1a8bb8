#ifndef KHINCHIN_EULER_PRODUCT_HPP
#define KHINCHIN_EULER_PRODUCT_HPP

// Fulcrum derivatives of Euler-type products
//
//     f(z) = prod_j (1 - z^{lambda_j})^{-w_j},   F(s) = ln f(e^s),  s < 0.
//
// Expanding each logarithm gives F^{(m)}(s) = sum_j sum_k w_j lambda_j^m
// k^{m-1} e^{lambda_j k s}. The inner k-sum is a polylogarithm, summed here
// in closed form:
//
//     sum_k k^{m-1} x^k = Li_{1-m}(x),   x = e^{lambda_j s},
//     Li_1(x) = -ln(1 - x),
//     Li_{-n}(x) = sum_{i=0}^{n} i! S(n+1, i+1) u^{i+1},   u = x / (1 - x),
//
// with 1 - x taken from expm1 so that x close to 1 keeps full precision.
// The outer j-sum is cut using a certified geometric tail (see tail_bound).

#include <cstdint>
#include <vector>

#include "bell.hpp"
#include "error.hpp"
#include "exact.hpp"
#include "series.hpp"
#include "xreal.hpp"

namespace khinchin {

struct EulerSums {
    std::vector<xreal> value;  // value[m] = F^{(m)}(s), m = 0..M
    std::vector<xreal> tail;   // bound on the neglected part of value[m]
    std::uint64_t terms = 0;   // factors visited
};

namespace detail {

/// i! S(n+1, i+1) for 0 <= i <= n <= 15, as binary128.
inline const std::vector<std::vector<xreal>>& polylog_coefficients() {
    static const std::vector<std::vector<xreal>> table = [] {
        std::vector<std::vector<xreal>> c(16);
        for (int n = 0; n < 16; ++n) {
            bell::integer fact = 1;
            for (int i = 0; i <= n; ++i) {
                if (i > 0) fact *= i;
                c[n].push_back(to_xreal(bigint(fact * bell::stirling2(n + 1, i + 1))));
            }
        }
        return c;
    }();
    return table;
}

/// Li_{1-m}(x) for m = 0..M given e1 = expm1(lambda s) = x - 1 < 0.
inline void polylogs(const xreal& e1, int M, std::vector<xreal>& li) {
    using boost::multiprecision::log;
    using boost::multiprecision::log1p;
    const xreal x = 1 + e1;
    li[0] = x < xreal(0.5) ? xreal(-log1p(-x)) : xreal(-log(-e1));
    if (M == 0) return;
    const xreal u = x / (-e1);
    const auto& c = polylog_coefficients();
    for (int m = 1; m <= M; ++m) {
        const auto& row = c[m - 1];
        // Horner in u: sum_i row[i] u^{i+1}
        xreal acc = 0;
        for (int i = static_cast<int>(row.size()) - 1; i >= 0; --i) acc = acc * u + row[i];
        li[m] = acc * u;
    }
}

}  // namespace detail

/// F^{(m)}(s), m = 0..M, for the Euler product described by `parts`.
///
/// Tail certificate. For j > J every x_j <= x_J and Li_{1-m}(x)/x is
/// increasing, so term_m(j) <= c_m h_m(j) with c_m = Li_{1-m}(x_J)/x_J and
/// h_m(j) = w_j lambda_j^m x_j. The ratio h_m(j+1)/h_m(j) is non-increasing
/// in j (the power factor ratio falls, the gaps lambda_{j+1} - lambda_j do
/// not shrink), so once rho = h_m(J+2)/h_m(J+1) < 1 the tail is at most
/// c_m h_m(J+1)/(1 - rho).
inline EulerSums euler_product_fulcrum(const PartSequence& parts, const xreal& s, int M,
                                       const xreal& rel_tol, std::uint64_t budget = 200'000'000) {
    using boost::multiprecision::exp;
    using boost::multiprecision::expm1;
    using boost::multiprecision::pow;
    if (!(s < 0)) throw domain_error("Euler product fulcrum requires s < 0");
    if (M < 0 || M > 15) throw validation_error("derivative order must lie in [0, 15]");
    if (!(rel_tol > 0 && rel_tol < 1)) throw validation_error("rel_tol must lie in (0, 1)");

    const auto nm = static_cast<std::size_t>(M) + 1;
    std::vector<compensated_sum<xreal>> acc(nm);
    std::vector<xreal> li(nm), lam_pow(nm);
    auto lambda_of = [&](std::int64_t j) { return pow(xreal(parts.base(j)), parts.power); };

    EulerSums out;
    out.value.assign(nm, 0);
    out.tail.assign(nm, 0);
    const std::int64_t last = parts.count.value_or(-1);
    for (std::int64_t j = 1;; ++j) {
        if (last >= 0 && j > last) break;
        if (static_cast<std::uint64_t>(j) > budget)
            throw budget_exceeded("Euler product sum exceeded " + std::to_string(budget) + " factors");
        const xreal lam = lambda_of(j);
        const xreal w = xreal(parts.weight(j));
        const xreal e1 = expm1(lam * s);
        detail::polylogs(e1, M, li);
        xreal lp = w;
        for (std::size_t m = 0; m < nm; ++m) {
            acc[m] += lp * li[m];
            lp *= lam;
        }
        out.terms = static_cast<std::uint64_t>(j);
        if (last >= 0 || j % 16 != 0) continue;

        const xreal xj = 1 + e1;
        if (xj == 0) break;  // every further term underflows
        const xreal lam1 = lambda_of(j + 1), lam2 = lambda_of(j + 2);
        const xreal w1 = xreal(parts.weight(j + 1)), w2 = xreal(parts.weight(j + 2));
        const xreal x1 = exp(lam1 * s), x2 = exp(lam2 * s);
        bool done = true;
        std::vector<xreal> tails(nm);
        for (std::size_t m = 0; m < nm && done; ++m) {
            const xreal h1 = w1 * pow(lam1, static_cast<int>(m)) * x1;
            const xreal h2 = w2 * pow(lam2, static_cast<int>(m)) * x2;
            if (h1 == 0) continue;
            const xreal rho = h2 / h1;
            if (!(rho < 1)) {
                done = false;
                break;
            }
            tails[m] = li[m] / xj * h1 / (1 - rho);
            if (!(tails[m] <= rel_tol * acc[m].value())) done = false;
        }
        if (done) {
            out.tail = tails;
            break;
        }
    }
    for (std::size_t m = 0; m < nm; ++m) out.value[m] = acc[m].value();
    return out;
}

/// Upper bound on ln f(t) for 0 < t < 1.
inline xreal euler_product_log_majorant(const PartSequence& parts, const xreal& t) {
    using boost::multiprecision::log;
    if (t == 0) return xreal(0);
    const EulerSums e = euler_product_fulcrum(parts, log(t), 0, xreal(1e-10));
    return e.value[0] * (1 + xreal(1e-24)) + e.tail[0];
}

}  // namespace khinchin

#endif  // KHINCHIN_EULER_PRODUCT_HPP
