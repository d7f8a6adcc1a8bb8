#ifndef KHINCHIN_FAMILY_HPP
#define KHINCHIN_FAMILY_HPP

// The Khinchin family X_t of a series f in K: P(X_t = n) = a_n t^n / f(t).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "bell.hpp"
#include "error.hpp"
#include "series.hpp"
#include "special.hpp"
#include "xreal.hpp"

namespace khinchin {

struct MeanVariance {
    xreal mean;
    xreal variance;
};

/// m = t f'/f and sigma^2 = t f'/f + t^2 (f''/f - (f'/f)^2).
inline MeanVariance mean_variance(const SeriesModel& f, const xreal& t,
                                  const xreal& rel_tol = xreal(1e-30), const EvalOptions& opt = {}) {
    f.check_domain(t);
    if (t == 0) return {xreal(0), xreal(0)};
    const xreal f0 = eval(f, t, rel_tol, opt).value;
    const xreal f1 = eval_derivative(f, t, 1, rel_tol, opt).value;
    const xreal f2 = eval_derivative(f, t, 2, rel_tol, opt).value;
    if (!is_finite(f0) || !is_finite(f2))
        throw budget_exceeded(f.label() + ": series value leaves the binary128 range at t = " + to_string(t, 17));
    const xreal r1 = f1 / f0;
    const xreal mean = t * r1;
    const xreal variance = mean + t * t * (f2 / f0 - r1 * r1);
    return {mean, variance};
}

struct DistributionOptions {
    EvalOptions eval;
    /// The slice is long enough that order-`moment_order` normalized moments
    /// lose less than `moment_tail_tol` to the neglected tail.
    int moment_order = 10;
    xreal moment_tail_tol = xreal(1e-12);
};

struct DistributionSlice {
    xreal t;
    std::vector<xreal> probs;  // p_0..p_N
    xreal tail_mass_bound;
    xreal mean_hint;
    xreal sigma_hint;
    // ln of (tail majorant / f(t)) and ln(t/t'): the tail beyond N is bounded
    // by exp(log_tail_scale) * sum_{n>N} r^n. Zero-tail slices store -inf.
    xreal log_tail_scale;
    xreal log_ratio;

    std::size_t size() const { return probs.size(); }
    std::size_t last_index() const { return probs.empty() ? 0 : probs.size() - 1; }

    /// Bound on sum_{n>N} n^k p_n.
    xreal weighted_tail_bound(int k) const {
        using boost::multiprecision::exp;
        if (!is_finite(log_tail_scale)) return xreal(0);
        const xreal lw = detail::log_weighted_geometric_tail(last_index(), k, log_ratio);
        return exp(log_tail_scale + lw);
    }
};

/// Truncated law of X_t with a certified tail mass.
///
/// N is the least index with N >= mean + 12 sigma whose certified tail mass
/// is at most min(tail_tol, 1e-13), extended until the order-`moment_order`
/// weighted tail divided by sigma^k is below `moment_tail_tol`.
inline DistributionSlice distribution(const SeriesModel& f, const xreal& t, const xreal& tail_tol,
                                      const DistributionOptions& opt = {}) {
    using boost::multiprecision::ceil;
    using boost::multiprecision::exp;
    using boost::multiprecision::log;
    using boost::multiprecision::sqrt;
    f.check_domain(t);
    if (!(t > 0)) throw domain_error("distribution requires t > 0");
    if (!(tail_tol > 0 && tail_tol <= xreal(1e-3))) throw validation_error("tail_tol must lie in (0, 1e-3]");

    const xreal eff_tol = std::min(tail_tol, xreal(1e-13));
    const MeanVariance mv = mean_variance(f, t, xreal(1e-30), opt.eval);
    if (!(mv.variance > 0)) throw degenerate_variance(f.label() + ": zero variance at t = " + to_string(t, 17));
    const xreal sigma = sqrt(mv.variance);
    const xreal fv = eval(f, t, xreal(1e-30), opt.eval).value;

    DistributionSlice slice;
    slice.t = t;
    slice.mean_hint = mv.mean;
    slice.sigma_hint = sigma;

    std::size_t N = 0;
    if (auto deg = f.degree()) {
        N = *deg;
        slice.tail_mass_bound = 0;
        slice.log_tail_scale = -xinfinity();
        slice.log_ratio = 0;
    } else {
        const xreal tp = detail::auxiliary_point(f, t);
        const xreal log_scale = f.source().log_majorant(tp) - log(fv);
        const xreal log_r = log(t / tp);
        const xreal floor_n = ceil(mv.mean + 12 * sigma);
        // Tail mass: exp(log_scale) r^{N+1}/(1-r) <= eff_tol.
        const xreal log_1mr = log(1 - t / tp);
        xreal n_mass = ceil((log(eff_tol) - log_scale + log_1mr) / log_r - 1);
        xreal n0 = std::max(floor_n, n_mass);
        if (n0 < 0) n0 = 0;
        if (n0 > xreal(static_cast<double>(opt.eval.term_budget)))
            throw budget_exceeded(f.label() + ": slice needs more than " + std::to_string(opt.eval.term_budget) +
                                  " terms at t = " + to_string(t, 17));
        auto cand = static_cast<std::uint64_t>(n0);
        const xreal log_sig = log(sigma);
        auto moment_ok = [&](std::uint64_t n) {
            const xreal lw = detail::log_weighted_geometric_tail(n, opt.moment_order, log_r);
            return log_scale + lw - xreal(opt.moment_order) * log_sig <= log(opt.moment_tail_tol);
        };
        std::uint64_t step = std::max<std::uint64_t>(16, cand / 64);
        while (!moment_ok(cand)) {
            cand += step;
            if (cand > opt.eval.term_budget)
                throw budget_exceeded(f.label() + ": slice needs more than " + std::to_string(opt.eval.term_budget) +
                                      " terms at t = " + to_string(t, 17));
        }
        N = static_cast<std::size_t>(cand);
        slice.log_tail_scale = log_scale;
        slice.log_ratio = log_r;
        slice.tail_mass_bound = exp(log_scale + xreal(static_cast<double>(N + 1)) * log_r - log_1mr);
    }

    auto coeffs = f.prefix(N + 1);
    const std::size_t count = std::min(N + 1, coeffs->size());
    slice.probs.resize(count);
    const xreal log_t = log(t);
    const xreal log_f = log(fv);
    xreal tn = 1 / fv;
    bool scaled = is_finite(tn) && tn > 0;
    for (std::size_t n = 0; n < count; ++n) {
        const xreal a = (*coeffs)[n];
        if (scaled) {
            slice.probs[n] = a * tn;
            tn *= t;
            if (!(is_finite(tn) && tn > 0)) scaled = false;
        } else {
            slice.probs[n] = a > 0 ? exp(log(a) + xreal(static_cast<double>(n)) * log_t - log_f) : xreal(0);
        }
    }
    return slice;
}

struct MomentReport {
    xreal t;
    int order = 0;
    std::vector<xreal> raw;         // order-indexed, raw[0] = 1
    std::vector<xreal> central;     // order-indexed, central[0] = 1, central[1] = 0
    std::vector<xreal> normalized;  // order-indexed, defined for k >= 3
    xreal mean;
    xreal variance;
};

/// Centered moment sums over a slice.
inline MomentReport direct_moments(const DistributionSlice& slice, int K) {
    using boost::multiprecision::pow;
    using boost::multiprecision::sqrt;
    if (K < 2 || K > 10) throw validation_error("moment order K must lie in [2, 10]");
    if (slice.probs.empty()) throw validation_error("empty distribution slice");

    compensated_sum<xreal> mass, first;
    for (std::size_t n = 0; n < slice.probs.size(); ++n) {
        mass += slice.probs[n];
        first += xreal(static_cast<double>(n)) * slice.probs[n];
    }
    const xreal mean = first.value();
    const auto nk = static_cast<std::size_t>(K) + 1;
    std::vector<compensated_sum<xreal>> c(nk);
    for (std::size_t n = 0; n < slice.probs.size(); ++n) {
        const xreal d = xreal(static_cast<double>(n)) - mean;
        xreal dp = slice.probs[n] * d * d;
        for (std::size_t k = 2; k < nk; ++k) {
            c[k] += dp;
            dp *= d;
        }
    }
    MomentReport rep;
    rep.t = slice.t;
    rep.order = K;
    rep.mean = mean;
    rep.central.assign(nk, 0);
    rep.central[0] = 1;
    for (std::size_t k = 2; k < nk; ++k) rep.central[k] = c[k].value();
    rep.variance = rep.central[2];
    if (!(rep.variance > 0)) throw degenerate_variance("slice has zero variance");

    // |n - mean| <= n beyond the slice, so the weighted tail bounds the
    // neglected part of every central moment.
    const xreal tail = slice.weighted_tail_bound(K) / pow(rep.variance, xreal(K) / 2);
    if (!(tail <= xreal(1e-9)))
        throw tail_too_heavy("order-" + std::to_string(K) + " tail estimate " + to_string(tail, 6) +
                             " exceeds 1e-9 at t = " + to_string(slice.t, 17));

    rep.raw.assign(nk, 0);
    rep.raw[0] = 1;
    for (std::size_t n = 1; n < nk; ++n) {
        compensated_sum<xreal> s;
        xreal binom = 1, mpow = 1;
        // mu'_n = sum_k C(n,k) mu_k m^{n-k}, accumulated from k = n down.
        for (std::size_t j = 0; j <= n; ++j) {
            const std::size_t k = n - j;
            const xreal mu = k == 0 ? xreal(1) : (k == 1 ? xreal(0) : rep.central[k]);
            s += binom * mu * mpow;
            mpow *= mean;
            binom = binom * xreal(static_cast<double>(k)) / xreal(static_cast<double>(j + 1));
        }
        rep.raw[n] = s.value();
    }
    rep.normalized.assign(nk, 0);
    const xreal sd = sqrt(rep.variance);
    xreal sp = sd * sd * sd;
    for (std::size_t k = 3; k < nk; ++k) {
        rep.normalized[k] = rep.central[k] / sp;
        sp *= sd;
    }
    return rep;
}

/// E(exp(i theta (X_t - m)/sigma)) = f(t e^{i theta/sigma})/f(t) e^{-i theta m/sigma}.
inline std::complex<double> characteristic_normalized(const SeriesModel& f, const xreal& t, const xreal& theta,
                                                      const xreal& rel_tol = xreal(1e-25)) {
    using boost::multiprecision::cos;
    using boost::multiprecision::sin;
    using boost::multiprecision::sqrt;
    f.check_domain(t);
    if (!(t > 0)) throw domain_error("characteristic function requires t > 0");
    const MeanVariance mv = mean_variance(f, t, xreal(1e-30));
    if (!(mv.variance > 0)) throw degenerate_variance("zero variance");
    const xreal sigma = sqrt(mv.variance);
    const xreal fv = eval(f, t, rel_tol).value;
    const CircleValue z = eval_complex_on_circle(f, t, theta / sigma, rel_tol);
    const xreal phase = -theta * mv.mean / sigma;
    const xreal c = cos(phase), s = sin(phase);
    const xreal re = (z.re * c - z.im * s) / fv;
    const xreal im = (z.re * s + z.im * c) / fv;
    return {to_double(re), to_double(im)};
}

/// sup_x |P(X̆_t <= x) - Phi(x)| over both one-sided limits at every jump.
inline double ks_distance_to_normal(const DistributionSlice& slice) {
    if (!(slice.sigma_hint > 0)) throw degenerate_variance("KS distance needs positive variance");
    xreal cdf = 0, worst = 0;
    auto upd = [&](const xreal& d) {
        const xreal a = d < 0 ? xreal(-d) : d;
        if (a > worst) worst = a;
    };
    for (std::size_t n = 0; n < slice.probs.size(); ++n) {
        const xreal x = (xreal(static_cast<double>(n)) - slice.mean_hint) / slice.sigma_hint;
        const xreal phi = special::normal_cdf_x(x);
        upd(cdf - phi);
        cdf += slice.probs[n];
        upd(cdf - phi);
    }
    // Beyond the slice the law holds at most the tail mass.
    upd(slice.tail_mass_bound);
    return std::clamp(to_double(worst), 0.0, 1.0);
}

}  // namespace khinchin

#endif  // KHINCHIN_FAMILY_HPP
