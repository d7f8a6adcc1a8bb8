#ifndef KHINCHIN_CRITERIA_HPP
#define KHINCHIN_CRITERIA_HPP

// Gaussianity diagnostics: Q_k over grids with trend classification, the
// zero-free sector check, the Euler summation harness and the asymptotic
// constant checks for partition-type products.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"
#include "euler_product.hpp"
#include "family.hpp"
#include "fulcrum.hpp"
#include "parallel.hpp"
#include "series.hpp"
#include "special.hpp"
#include "xreal.hpp"

namespace khinchin {

// ---------------------------------------------------------------------------
// Trend classification

/// Every threshold the classifier uses. Reports echo these values.
struct Thresholds {
    double vanishing_cut = 0.05;      // |Q(last)| < cut * max |Q|
    double oscillation_band = 0.10;   // relative spread of the last half
    double divergence_factor = 2.0;   // |Q(last)| > factor * max |Q(first half)|
};

enum class Trend { vanishing, bounded_nonzero, diverging, inconclusive };
enum class Verdict { gaussian_evidence, non_gaussian_evidence, inconclusive };

inline const char* to_string(Trend t) {
    switch (t) {
        case Trend::vanishing: return "vanishing";
        case Trend::bounded_nonzero: return "bounded-nonzero";
        case Trend::diverging: return "diverging";
        case Trend::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::gaussian_evidence: return "gaussian-evidence";
        case Verdict::non_gaussian_evidence: return "non-gaussian-evidence";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

/// Classify one value sequence Q_k(t_1), ..., Q_k(t_n). The last half is
/// the points with index >= n/2.
inline Trend classify(const std::vector<double>& values, const Thresholds& th = {}) {
    const std::size_t n = values.size();
    if (n < 2) return Trend::inconclusive;
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::fabs(values[i]);
    const std::size_t h = n / 2;
    const double max_all = *std::max_element(a.begin(), a.end());
    const double max_first = *std::max_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(h));
    if (max_all == 0) return Trend::vanishing;

    bool decreasing = true, increasing = true;
    for (std::size_t i = h; i + 1 < n; ++i) {
        if (!(a[i + 1] < a[i])) decreasing = false;
        if (!(a[i + 1] > a[i])) increasing = false;
    }
    if (a.back() < th.vanishing_cut * max_all && decreasing) return Trend::vanishing;
    if (increasing && a.back() > th.divergence_factor * max_first) return Trend::diverging;

    double lo = values[h], hi = values[h], sum = 0;
    for (std::size_t i = h; i < n; ++i) {
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
        sum += values[i];
    }
    const double level = sum / static_cast<double>(n - h);
    if (level != 0 && (hi - lo) / std::fabs(level) < th.oscillation_band) return Trend::bounded_nonzero;
    return Trend::inconclusive;
}

/// gaussian-evidence iff every k vanishes; non-gaussian-evidence iff every
/// k is bounded and some k is bounded-nonzero.
inline Verdict verdict_of(const std::vector<Trend>& trends) {
    if (trends.empty()) return Verdict::inconclusive;
    bool all_vanishing = true, all_bounded = true, some_nonzero = false;
    for (Trend t : trends) {
        if (t != Trend::vanishing) all_vanishing = false;
        if (t != Trend::vanishing && t != Trend::bounded_nonzero) all_bounded = false;
        if (t == Trend::bounded_nonzero) some_nonzero = true;
    }
    if (all_vanishing) return Verdict::gaussian_evidence;
    if (all_bounded && some_nonzero) return Verdict::non_gaussian_evidence;
    return Verdict::inconclusive;
}

// ---------------------------------------------------------------------------
// Grids

/// Finite R: t_i = R (1 - 2^{-i}), i = 1..14. Entire: t_i = 10^{i/2}, i = 0..14.
inline std::vector<xreal> default_grid(const SeriesModel& f) {
    using boost::multiprecision::pow;
    std::vector<xreal> g;
    if (f.is_entire()) {
        for (int i = 0; i <= 14; ++i) g.push_back(pow(xreal(10), xreal(i) / 2));
    } else {
        for (int i = 1; i <= 14; ++i) g.push_back(f.radius() * (1 - pow(xreal(2), -i)));
    }
    return g;
}

inline void validate_grid(const SeriesModel& f, const std::vector<xreal>& grid) {
    if (grid.size() < 8) throw grid_error("diagnostic grids need at least 8 points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0)) throw grid_error("grid points must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw grid_error("grid must be strictly increasing");
        f.check_domain(grid[i]);
    }
    if (f.is_entire()) {
        if (!(grid.back() >= 10 * grid.front())) throw grid_error("grid must span a factor 10 in t");
    } else {
        const xreal R = f.radius();
        if (!(R - grid.front() >= 10 * (R - grid.back())))
            throw grid_error("grid must span a factor 10 in R - t");
    }
}

// ---------------------------------------------------------------------------
// diagnose

enum class RoutePreference { analytic_preferred, analytic_only, from_moments_only };

struct DiagnoseOptions {
    RoutePreference route = RoutePreference::analytic_preferred;
    Thresholds thresholds;
    xreal analytic_tol = xreal(1e-20);
    xreal tail_tol = xreal(1e-13);
    unsigned jobs = 1;
};

struct QuotientDiagnostics {
    std::string model;
    std::vector<xreal> t_grid;
    int K = 0;
    std::vector<Route> routes;                 // per grid point
    std::vector<std::vector<double>> values;   // values[k][i] = Q_k(t_i), k order-indexed
    std::vector<Trend> trends;                 // order-indexed, k >= 3
    Verdict verdict = Verdict::inconclusive;
    Thresholds thresholds;

    Trend trend(int k) const { return trends.at(static_cast<std::size_t>(k)); }
};

inline CumulantVector cumulants(const SeriesModel& f, const xreal& t, int K, RoutePreference pref,
                                const xreal& analytic_tol = xreal(1e-20), const xreal& tail_tol = xreal(1e-13)) {
    const bool analytic = pref != RoutePreference::from_moments_only && has_analytic_route(f);
    if (pref == RoutePreference::analytic_only && !analytic)
        throw unsupported_model(f.label() + ": no analytic cumulant route");
    return analytic ? cumulants_analytic(f, t, K, analytic_tol) : cumulants_from_distribution(f, t, K, tail_tol);
}

inline QuotientDiagnostics diagnose(const SeriesModel& f, const std::vector<xreal>& grid, int K,
                                    const DiagnoseOptions& opt = {}) {
    if (K < 3 || K > 8) throw validation_error("K must lie in [3, 8]");
    validate_grid(f, grid);
    const auto cvs = parallel_map(grid.size(), opt.jobs, [&](std::size_t i) {
        return cumulants(f, grid[i], K, opt.route, opt.analytic_tol, opt.tail_tol);
    });
    QuotientDiagnostics d;
    d.model = f.label();
    d.t_grid = grid;
    d.K = K;
    d.thresholds = opt.thresholds;
    d.values.assign(static_cast<std::size_t>(K) + 1, std::vector<double>(grid.size(), 0.0));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        d.routes.push_back(cvs[i].route);
        const QuotientVector qv = quotients(cvs[i]);
        for (int k = 2; k <= K; ++k) d.values[k][i] = to_double(qv.q[k]);
    }
    d.trends.assign(static_cast<std::size_t>(K) + 1, Trend::inconclusive);
    std::vector<Trend> ks;
    for (int k = 3; k <= K; ++k) {
        d.trends[k] = classify(d.values[k], opt.thresholds);
        ks.push_back(d.trends[k]);
    }
    d.verdict = verdict_of(ks);
    return d;
}

struct BoundedFlag {
    int k = 0;
    bool bounded = false;
};

/// Normalized moment k is reported bounded iff Q_k is vanishing or
/// bounded-nonzero.
inline std::vector<BoundedFlag> bounded_moments_report(const QuotientDiagnostics& d) {
    std::vector<BoundedFlag> out;
    for (int k = 3; k <= d.K; ++k) {
        const Trend t = d.trend(k);
        out.push_back({k, t == Trend::vanishing || t == Trend::bounded_nonzero});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Zero-free sector

struct ZeroFreeReport {
    xreal t;
    xreal sigma;
    xreal theta_max;     // pi / (2 sigma)
    xreal min_modulus;   // over |theta| <= 0.999 theta_max
    xreal argmin_theta;
    std::size_t samples = 0;
};

inline ZeroFreeReport zero_free_check(const SeriesModel& f, const xreal& t, std::size_t samples = 256,
                                      const xreal& rel_tol = xreal(1e-25)) {
    using boost::multiprecision::sqrt;
    if (samples < 64) throw validation_error("zero-free check needs at least 64 samples");
    f.check_domain(t);
    if (!(t > 0)) throw domain_error("zero-free check needs t > 0");
    const MeanVariance mv = mean_variance(f, t);
    if (!(mv.variance > 0)) throw degenerate_variance("zero variance");
    ZeroFreeReport r;
    r.t = t;
    r.sigma = sqrt(mv.variance);
    r.theta_max = xpi / (2 * r.sigma);
    r.samples = samples;
    r.min_modulus = xinfinity();
    const xreal lim = xreal(0.999) * r.theta_max;
    for (std::size_t i = 0; i < samples; ++i) {
        const xreal theta = -lim + 2 * lim * xreal(static_cast<double>(i)) / xreal(static_cast<double>(samples - 1));
        const xreal m = eval_complex_on_circle(f, t, theta, rel_tol).modulus();
        if (m < r.min_modulus) {
            r.min_modulus = m;
            r.argmin_theta = theta;
        }
    }
    return r;
}

struct CircleMinimum {
    xreal theta;    // in (-pi, pi]
    xreal modulus;
};

/// Global minimum of |f(t e^{i theta})| over the full circle: a dense scan
/// followed by golden-section refinement of the best bracket.
inline CircleMinimum circle_minimum(const SeriesModel& f, const xreal& t, std::size_t scan = 4096,
                                    const xreal& rel_tol = xreal(1e-30)) {
    auto mod = [&](const xreal& th) { return eval_complex_on_circle(f, t, th, rel_tol).modulus(); };
    const xreal step = 2 * xpi / xreal(static_cast<double>(scan));
    std::size_t best = 0;
    xreal best_m = xinfinity();
    for (std::size_t i = 0; i < scan; ++i) {
        const xreal m = mod(-xpi + step * xreal(static_cast<double>(i)));
        if (m < best_m) {
            best_m = m;
            best = i;
        }
    }
    xreal a = -xpi + step * (xreal(static_cast<double>(best)) - 1);
    xreal b = -xpi + step * (xreal(static_cast<double>(best)) + 1);
    const xreal g = (boost::multiprecision::sqrt(xreal(5)) - 1) / 2;
    xreal c = b - g * (b - a), d = a + g * (b - a);
    xreal fc = mod(c), fd = mod(d);
    for (int it = 0; it < 200 && b - a > xreal(1e-32); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = mod(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = mod(d);
        }
    }
    xreal th = (a + b) / 2;
    if (th <= -xpi) th += 2 * xpi;
    if (th > xpi) th -= 2 * xpi;
    return {th, mod(th)};
}

// ---------------------------------------------------------------------------
// Euler summation harness, g(x) = k^{m-1} x^{pm} e^{-k x^p}

struct EulerRow {
    double s = 0;
    double riemann_sum = 0;  // s sum_{j>=1} g(js)
    double integral = 0;     // int_0^inf g
    double L = 0;
    double R1 = 0;           // s int |g'|
    double R2 = 0;           // int x |g'|
    bool holds_r1 = false;
    bool holds_r2 = false;
};

struct EulerReport {
    int m = 0, p = 1, k = 1;
    double tolerance = 1e-8;
    std::vector<EulerRow> rows;
    bool all_hold() const {
        for (const auto& r : rows)
            if (!r.holds_r1 || !r.holds_r2) return false;
        return true;
    }
};

namespace detail {

struct EulerKernel {
    int m, p, k;
    double c;  // k^{m-1}
    double g(double x) const {
        const double pm = static_cast<double>(p * m);
        const double xp = std::pow(x, p);
        return c * (pm == 0 ? 1.0 : std::pow(x, pm)) * std::exp(-k * xp);
    }
    double dg(double x) const {
        // g'(x) = k^{m-1} e^{-k x^p} (pm x^{pm-1} - pk x^{pm+p-1})
        const double pm = static_cast<double>(p * m);
        const double e = std::exp(-k * std::pow(x, p));
        const double a = m == 0 ? 0.0 : pm * std::pow(x, pm - 1);
        const double b = static_cast<double>(p * k) * std::pow(x, pm + p - 1);
        return c * e * (a - b);
    }
    double kink() const { return m == 0 ? 0.0 : std::pow(static_cast<double>(m) / k, 1.0 / p); }
    /// Beyond this point g and x g' are below 1e-40 of their scale.
    double cutoff() const {
        double x = std::max(1.0, 2 * kink());
        while (c * std::pow(x, p * m + p) * std::exp(-k * std::pow(x, p)) > 1e-40 * c) x *= 1.25;
        return x;
    }
};

template <typename F>
double integrate_pieces(F&& fn, const std::vector<double>& breaks, double tol) {
    using boost::math::quadrature::gauss_kronrod;
    double total = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        double err = 0, l1 = 0;
        const double v = gauss_kronrod<double, 61>::integrate(fn, breaks[i], breaks[i + 1], 25, 1e-14, &err, &l1);
        if (!(err <= tol * std::max(1.0, l1))) throw quadrature_error("quadrature did not reach tolerance");
        total += v;
    }
    return total;
}

}  // namespace detail

inline EulerReport euler_bound_harness(int m, int p, int k, const std::vector<double>& s_grid,
                                       double tolerance = 1e-8) {
    if (m < 0 || m > 12 || p < 1 || p > 6 || k < 1 || k > 50)
        throw validation_error("euler harness needs 0 <= m <= 12, 1 <= p <= 6, 1 <= k <= 50");
    detail::EulerKernel ker{m, p, k, std::pow(static_cast<double>(k), m - 1)};
    const double x0 = ker.kink(), xc = ker.cutoff();
    std::vector<double> breaks{0.0};
    if (x0 > 0) breaks.push_back(x0);
    breaks.push_back(xc);
    const double I = detail::integrate_pieces([&](double x) { return ker.g(x); }, breaks, tolerance);
    const double V = detail::integrate_pieces([&](double x) { return std::fabs(ker.dg(x)); }, breaks, tolerance);
    const double W = detail::integrate_pieces([&](double x) { return x * std::fabs(ker.dg(x)); }, breaks, tolerance);

    EulerReport rep;
    rep.m = m;
    rep.p = p;
    rep.k = k;
    rep.tolerance = tolerance;
    for (double s : s_grid) {
        if (!(s > 0)) throw validation_error("euler harness needs s > 0");
        compensated_sum<xreal> sum;
        for (std::int64_t j = 1;; ++j) {
            const double x = static_cast<double>(j) * s;
            if (x > xc) break;
            sum += xreal(ker.g(x));
        }
        EulerRow row;
        row.s = s;
        row.riemann_sum = s * to_double(sum.value());
        row.integral = I;
        row.L = std::fabs(row.riemann_sum - I);
        row.R1 = s * V;
        row.R2 = W;
        const double slack = tolerance * std::max({1.0, std::fabs(I), V});
        row.holds_r1 = row.L <= row.R1 + slack;
        row.holds_r2 = row.L <= row.R2 + slack;
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Asymptotic constants of partition-type fulcrums

struct AsymptoticRow {
    double s = 0;
    xreal derivative;  // F^{(m)}(-s)
    double ratio = 0;  // s^alpha F^{(m)}(-s) / C
};

struct AsymptoticReport {
    std::string model;
    int m = 0;
    double alpha = 0;
    double constant = 0;
    double tolerance = 0;
    std::vector<AsymptoticRow> rows;
    bool monotone_toward_one = false;  // over the last half of the grid
    bool within_tolerance = false;     // at the smallest s
};

namespace detail {

/// Gamma on [0.5 - 1, 60] via one downward step when needed.
inline xreal gamma_ext(const xreal& x) {
    if (x < xreal(0.5)) return special::gamma_x(x + 1) / x;
    return special::gamma_x(x);
}

}  // namespace detail

/// Default tolerance on |ratio - 1| at the smallest s, per model.
inline double asymptotic_tolerance(const SeriesModel& f) {
    const auto* pf = std::get_if<PartitionForm>(&f.structure());
    if (!pf) throw unsupported_model(f.label() + ": not a partition-type model");
    if (f.kind() == ModelKind::density) return 0.10;
    if (f.kind() == ModelKind::partitions && pf->parts.power >= 2) return 0.08;
    return 0.05;
}

/// Ratio s^alpha F^{(m)}(-s) / C against the leading asymptotic of the
/// model: partitions(p): alpha = m + 1/p, C = (1/p) zeta(1+1/p) Gamma(m+1/p);
/// macmahon: alpha = m + 2, C = zeta(3) Gamma(m+2); density(a, d):
/// alpha = m + 1, C = (1/d) zeta(2) Gamma(m+1).
inline AsymptoticReport asymptotic_constant_check(const SeriesModel& f, int m, const std::vector<double>& s_grid,
                                                  std::optional<double> tolerance = std::nullopt,
                                                  const xreal& rel_tol = xreal(1e-24)) {
    using boost::multiprecision::pow;
    const auto* pf = std::get_if<PartitionForm>(&f.structure());
    if (!pf || !(f.kind() == ModelKind::partitions || f.kind() == ModelKind::macmahon ||
                 f.kind() == ModelKind::density))
        throw unsupported_model(f.label() + ": asymptotic constants exist for partitions, macmahon and density");
    if (m < 0 || m > 12) throw validation_error("m must lie in [0, 12]");
    if (s_grid.empty()) throw grid_error("s grid is empty");
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        if (!(s_grid[i] > 0)) throw validation_error("s values must be positive");
        if (i > 0 && !(s_grid[i] < s_grid[i - 1])) throw grid_error("s grid must decrease toward 0");
    }
    const PartSequence& ps = pf->parts;
    xreal alpha, C;
    if (f.kind() == ModelKind::partitions) {
        const xreal ip = 1 / xreal(ps.power);
        alpha = m + ip;
        C = ip * special::zeta_x(1 + ip) * detail::gamma_ext(m + ip);
    } else if (f.kind() == ModelKind::macmahon) {
        alpha = m + 2;
        C = special::zeta_x(xreal(3)) * special::gamma_x(xreal(m + 2));
    } else {
        alpha = m + 1;
        C = special::zeta_x(xreal(2)) * special::gamma_x(xreal(m + 1)) / xreal(ps.step);
    }
    AsymptoticReport rep;
    rep.model = f.label();
    rep.m = m;
    rep.alpha = to_double(alpha);
    rep.constant = to_double(C);
    rep.tolerance = tolerance.value_or(asymptotic_tolerance(f));
    for (double s : s_grid) {
        const EulerSums e = euler_product_fulcrum(ps, xreal(-s), m, rel_tol);
        AsymptoticRow row;
        row.s = s;
        row.derivative = e.value[m];
        row.ratio = to_double(pow(xreal(s), alpha) * e.value[m] / C);
        rep.rows.push_back(row);
    }
    const std::size_t n = rep.rows.size();
    // The last half holds at least one step, so a two-point grid compares its pair.
    bool mono = true;
    const std::size_t start = n >= 2 ? std::min(n / 2, n - 2) : n;
    for (std::size_t i = start; i + 1 < n; ++i)
        if (!(std::fabs(rep.rows[i + 1].ratio - 1) < std::fabs(rep.rows[i].ratio - 1))) mono = false;
    rep.monotone_toward_one = mono;
    rep.within_tolerance = std::fabs(rep.rows.back().ratio - 1) <= rep.tolerance;
    return rep;
}

}  // namespace khinchin

#endif  // KHINCHIN_CRITERIA_HPP
