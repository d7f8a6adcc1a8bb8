#ifndef KHINCHIN_FULCRUM_HPP
#define KHINCHIN_FULCRUM_HPP

// Fulcrum derivatives F^{(k)}(s), F(s) = ln f(e^s). They are the cumulants
// of X_t at t = e^s and are computed by two independent routes:
//
//   route A (from_moments): centered moments of a distribution slice,
//                           converted to cumulants;
//   route B (analytic):     model-specific closed forms.

#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "bell.hpp"
#include "error.hpp"
#include "euler_product.hpp"
#include "exact.hpp"
#include "family.hpp"
#include "series.hpp"
#include "xreal.hpp"

namespace khinchin {

enum class Route { from_moments, analytic };

inline const char* to_string(Route r) { return r == Route::analytic ? "analytic" : "from-moments"; }

struct CumulantVector {
    xreal t;
    xreal s;
    int order = 0;
    std::vector<xreal> kappa;  // order-indexed, kappa[0] unused
    Route route = Route::from_moments;
};

struct QuotientVector {
    xreal t;
    int order = 0;
    std::vector<xreal> q;  // order-indexed; q[2] = 1, q[0], q[1] unused
};

/// Row r of the table with d^r/ds^r A_1 = sum_l delta_{r,l} A_{1+l}, from
/// delta_{r+1,l} = (l+1)(delta_{r,l} - delta_{r,l-1}).
inline std::vector<bigint> delta_row(int r) {
    if (r < 0 || r > 30) throw validation_error("delta row must lie in [0, 30]");
    std::vector<bigint> row{1};
    for (int i = 0; i < r; ++i) {
        std::vector<bigint> next(row.size() + 1, 0);
        for (std::size_t l = 0; l < next.size(); ++l) {
            const bigint cur = l < row.size() ? row[l] : bigint(0);
            const bigint prev = l > 0 ? row[l - 1] : bigint(0);
            next[l] = bigint(l + 1) * (cur - prev);
        }
        row = std::move(next);
    }
    return row;
}

/// C_k = sum_l |delta_{k-2,l}|, the constant in |kappa_k| <= C_k kappa_2
/// for canonical products.
inline bigint canonical_bound_constant(int k) {
    if (k < 2) throw validation_error("canonical bound constant needs k >= 2");
    bigint c = 0;
    for (const auto& d : delta_row(k - 2)) c += d < 0 ? bigint(-d) : d;
    return c;
}

/// Route A: direct centered moments of the slice, then cumulants. kappa_1
/// and kappa_2 are cross-checked against mean_variance.
inline CumulantVector cumulants_from_distribution(const SeriesModel& f, const xreal& t, int K,
                                                  const xreal& tail_tol = xreal(1e-13),
                                                  const DistributionOptions& opt = {}) {
    using boost::multiprecision::abs;
    using boost::multiprecision::log;
    if (K < 1 || K > 10) throw validation_error("cumulant order K must lie in [1, 10]");
    const DistributionSlice slice = distribution(f, t, std::min(tail_tol, xreal(1e-3)), opt);
    const MomentReport rep = direct_moments(slice, std::max(K, 2));
    // Cumulants are shift invariant beyond order 1: feed the central moments.
    std::vector<xreal> mu(static_cast<std::size_t>(std::max(K, 2)) + 1, 0);
    for (std::size_t k = 2; k < mu.size(); ++k) mu[k] = rep.central[k];
    std::vector<xreal> kappa = bell::cumulants_from_raw_moments<xreal>(std::max(K, 2), mu);
    kappa[1] = rep.mean;
    kappa.resize(static_cast<std::size_t>(K) + 1);

    const MeanVariance mv = mean_variance(f, t);
    auto check = [&](const xreal& a, const xreal& b, const char* what) {
        const xreal scale = std::max(abs(a), abs(b));
        if (abs(a - b) > xreal(1e-9) * scale)
            throw consistency_error(std::string(what) + " from moments disagrees with mean_variance at t = " +
                                    to_string(t, 17));
    };
    check(kappa[1], mv.mean, "kappa_1");
    if (K >= 2) check(kappa[2], mv.variance, "kappa_2");

    CumulantVector cv;
    cv.t = t;
    cv.s = log(t);
    cv.order = K;
    cv.kappa = std::move(kappa);
    cv.route = Route::from_moments;
    return cv;
}

namespace detail {

inline std::vector<xreal> analytic_poly(const PolyForm& pf, const xreal& t, int K) {
    // Raw moments D_k / D_0 with D_k = sum c_n n^k t^n, in exact arithmetic.
    const rational tq = to_rational(t);
    std::vector<rational> D(static_cast<std::size_t>(K) + 1, 0);
    rational tn = 1;
    for (std::size_t n = 0; n < pf.coeffs.size(); ++n) {
        const rational term = pf.coeffs[n] * tn;
        rational nk = 1;
        for (int k = 0; k <= K; ++k) {
            D[k] += term * nk;
            nk *= static_cast<long>(n);
        }
        tn *= tq;
    }
    std::vector<rational> mu(D.size());
    for (std::size_t k = 0; k < D.size(); ++k) mu[k] = D[k] / D[0];
    const std::vector<rational> kq = bell::cumulants_from_raw_moments<rational>(K, mu);
    std::vector<xreal> kappa(kq.size());
    for (std::size_t k = 1; k < kq.size(); ++k) kappa[k] = to_xreal(kq[k]);
    return kappa;
}

inline std::vector<xreal> analytic_canonical(const CanonicalForm& cf, const xreal& t, int K) {
    std::vector<std::vector<xreal>> delta;
    for (int r = 0; r + 2 <= K; ++r) {
        std::vector<xreal> row;
        for (const auto& d : delta_row(r)) row.push_back(to_xreal(d));
        delta.push_back(std::move(row));
    }
    const auto nk = static_cast<std::size_t>(K) + 1;
    std::vector<compensated_sum<xreal>> acc(nk);
    std::vector<xreal> A(nk + 1);
    // Smallest terms first: the zeros increase with j.
    for (auto it = cf.zeros.rbegin(); it != cf.zeros.rend(); ++it) {
        const xreal y = t / (*it + t);
        const xreal omy = *it / (*it + t);
        acc[1] += y;
        xreal yn = y;
        for (std::size_t n = 1; n < A.size(); ++n) {
            A[n] = omy * yn;  // A_n = (1-y) y^n
            yn *= y;
        }
        for (std::size_t k = 2; k < nk; ++k) {
            const auto& row = delta[k - 2];
            xreal v = 0;
            for (std::size_t l = 0; l < row.size(); ++l) v += row[l] * A[1 + l];
            acc[k] += v;
        }
    }
    std::vector<xreal> kappa(nk, 0);
    for (std::size_t k = 1; k < nk; ++k) kappa[k] = acc[k].value();
    return kappa;
}

inline std::vector<xreal> analytic_exp_of(const ExpOfForm& ef, const xreal& t, int K, const xreal& tol) {
    using boost::multiprecision::exp;
    const SeriesModel& g = *ef.inner;
    std::vector<xreal> gd(static_cast<std::size_t>(K) + 1);
    const xreal rel = std::min(tol, xreal(1e-28));
    for (int j = 1; j <= K; ++j) {
        if (std::holds_alternative<ExpForm>(g.structure()))
            gd[j] = exp(t);
        else
            gd[j] = eval_derivative(g, t, j, rel).value;
    }
    std::vector<xreal> kappa(static_cast<std::size_t>(K) + 1, 0);
    for (int k = 1; k <= K; ++k) {
        compensated_sum<xreal> s;
        xreal tj = 1;
        for (int j = 1; j <= k; ++j) {
            tj *= t;
            s += to_xreal(bigint(bell::stirling2(k, j))) * tj * gd[j];
        }
        kappa[k] = s.value();
    }
    return kappa;
}

}  // namespace detail

/// True when cumulants_analytic has a route for this model.
inline bool has_analytic_route(const SeriesModel& f) {
    return !std::holds_alternative<OpaqueForm>(f.structure());
}

/// Route B. `tol` is the relative truncation target for infinite sums.
inline CumulantVector cumulants_analytic(const SeriesModel& f, const xreal& t, int K,
                                         const xreal& tol = xreal(1e-20)) {
    using boost::multiprecision::log;
    f.check_domain(t);
    if (!(t > 0)) throw domain_error("cumulants need t > 0");
    if (K < 1 || K > 12) throw validation_error("analytic cumulant order K must lie in [1, 12]");
    if (!(tol > 0 && tol < 1)) throw validation_error("tol must lie in (0, 1)");

    std::vector<xreal> kappa;
    const Structure& st = f.structure();
    if (std::holds_alternative<ExpForm>(st)) {
        kappa.assign(static_cast<std::size_t>(K) + 1, t);
        kappa[0] = 0;
    } else if (const auto* pf = std::get_if<PolyForm>(&st)) {
        kappa = detail::analytic_poly(*pf, t, K);
    } else if (const auto* part = std::get_if<PartitionForm>(&st)) {
        const EulerSums e = euler_product_fulcrum(part->parts, log(t), K, tol);
        kappa = e.value;
        kappa[0] = 0;
    } else if (const auto* cf = std::get_if<CanonicalForm>(&st)) {
        kappa = detail::analytic_canonical(*cf, t, K);
    } else if (const auto* ef = std::get_if<ExpOfForm>(&st)) {
        kappa = detail::analytic_exp_of(*ef, t, K, tol);
    } else {
        throw unsupported_model(f.label() + ": no analytic cumulant route");
    }
    CumulantVector cv;
    cv.t = t;
    cv.s = log(t);
    cv.order = K;
    cv.kappa = std::move(kappa);
    cv.route = Route::analytic;
    return cv;
}

inline QuotientVector quotients(const CumulantVector& cv) {
    using boost::multiprecision::sqrt;
    if (cv.order < 2 || !(cv.kappa[2] > 0))
        throw degenerate_variance("quotients need kappa_2 > 0 (t = " + to_string(cv.t, 17) + ")");
    QuotientVector qv;
    qv.t = cv.t;
    qv.order = cv.order;
    qv.q.assign(cv.kappa.size(), 0);
    const xreal sd = sqrt(cv.kappa[2]);
    xreal p = cv.kappa[2];
    for (std::size_t k = 2; k < cv.kappa.size(); ++k) {
        qv.q[k] = cv.kappa[k] / p;
        p *= sd;
    }
    return qv;
}

/// |a_k - b_k| <= tol max(|a_k|, |b_k|, kappa_2^{k/2}) for k = 1..K. The
/// kappa_2^{k/2} floor is the natural scale of kappa_k; it keeps cumulants
/// that vanish by symmetry comparable.
inline bool routes_agree(const CumulantVector& a, const CumulantVector& b, const xreal& tol,
                         xreal* worst = nullptr) {
    using boost::multiprecision::abs;
    using boost::multiprecision::pow;
    const int K = std::min(a.order, b.order);
    xreal w = 0;
    const xreal k2 = std::max(abs(a.kappa[std::min(2, K)]), abs(b.kappa[std::min(2, K)]));
    for (int k = 1; k <= K; ++k) {
        xreal scale = std::max(abs(a.kappa[k]), abs(b.kappa[k]));
        if (k >= 2) scale = std::max(scale, xreal(pow(k2, xreal(k) / 2)));
        if (scale == 0) continue;
        w = std::max(w, xreal(abs(a.kappa[k] - b.kappa[k]) / scale));
    }
    if (worst) *worst = w;
    return w <= tol;
}

/// g^{(k)}(t) g(t)^{k-1} / g'(t)^k; tends to 1 along a clan.
inline xreal clan_derivative_ratio(const SeriesModel& g, const xreal& t, int k,
                                   const xreal& rel_tol = xreal(1e-28)) {
    using boost::multiprecision::pow;
    if (k < 1) throw validation_error("clan derivative ratio needs k >= 1");
    const xreal g0 = eval(g, t, rel_tol).value;
    const xreal g1 = eval_derivative(g, t, 1, rel_tol).value;
    const xreal gk = k == 1 ? g1 : eval_derivative(g, t, k, rel_tol).value;
    return gk * pow(g0, k - 1) / pow(g1, k);
}

}  // namespace khinchin

#endif  // KHINCHIN_FULCRUM_HPP
