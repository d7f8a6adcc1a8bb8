#ifndef KHINCHIN_SERIES_HPP
#define KHINCHIN_SERIES_HPP

// Power series in the class K (non-negative coefficients, a_0 > 0, radius
// R in (0, inf]) and their certified truncated evaluation.
//
// Every infinite sum is cut at the first N whose Chernoff-type tail bound
//
//     sum_{n>N} a_n t^n  <=  f(t') (t/t')^{N+1} / (1 - t/t')
//
// drops below rel_tol times the partial sum, with t' = 2t for entire series
// and t' = sqrt(tR) otherwise. The bound on f(t') comes from the
// coefficient source (closed forms, exact products, or a recursively
// certified evaluation); all of it is carried in log form so it cannot
// overflow.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "exact.hpp"
#include "xreal.hpp"

namespace khinchin {

class SeriesModel;

enum class ModelKind {
    exp,
    geometric,
    poly,
    partitions,
    macmahon,
    density,
    canonical,
    exp_of,
    exp_iter,
    explicit_list,
};

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::exp: return "exp";
        case ModelKind::geometric: return "geometric";
        case ModelKind::poly: return "poly";
        case ModelKind::partitions: return "partitions";
        case ModelKind::macmahon: return "macmahon";
        case ModelKind::density: return "density";
        case ModelKind::canonical: return "canonical";
        case ModelKind::exp_of: return "expof";
        case ModelKind::exp_iter: return "expiter";
        case ModelKind::explicit_list: return "explicit";
    }
    return "unknown";
}

/// Parts of an Euler-type product prod_j (1 - z^{lambda_j})^{-w_j} with
/// lambda_j = (first + step (j-1))^power and w_j = 1, or w_j = the base
/// value when `weight_is_part` (MacMahon). `count` makes the product finite.
struct PartSequence {
    std::int64_t first = 1;
    std::int64_t step = 1;
    int power = 1;
    bool weight_is_part = false;
    std::optional<std::int64_t> count;

    std::int64_t base(std::int64_t j) const { return first + step * (j - 1); }
    /// lambda_j as an integer; callers keep j within the degree budget.
    std::int64_t part(std::int64_t j) const {
        std::int64_t b = base(j), r = 1;
        for (int i = 0; i < power; ++i) r *= b;
        return r;
    }
    std::int64_t weight(std::int64_t j) const { return weight_is_part ? base(j) : 1; }
    bool finite() const { return count.has_value(); }
};

/// Analytic structure of a model; selects the route-B formulas.
struct ExpForm {};
struct PolyForm {
    std::vector<rational> coeffs;
};
struct PartitionForm {
    PartSequence parts;
};
struct CanonicalForm {
    std::vector<xreal> zeros;  // b_1 < b_2 < ... (zeros of f at -b_j)
    std::optional<double> rho;  // set for the b_j = j^{1/rho} family
};
struct ExpOfForm {
    std::shared_ptr<const SeriesModel> inner;  // f = exp(inner)
};
struct OpaqueForm {};

using Structure =
    std::variant<OpaqueForm, ExpForm, PolyForm, PartitionForm, CanonicalForm, ExpOfForm>;

/// Produces coefficients on demand. The prefix cache only ever grows and
/// every fill recomputes the same values, so concurrent readers always see
/// identical coefficients.
class CoefficientSource {
public:
    virtual ~CoefficientSource() = default;

    /// At least `count` leading coefficients, or all of them for a
    /// polynomial of lower degree.
    std::shared_ptr<const std::vector<xreal>> prefix(std::size_t count) const {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto deg = degree();
        const std::size_t want = deg ? std::min(count, *deg + 1) : count;
        if (cache_ && cache_->size() >= want) return cache_;
        std::size_t n = want;
        if (cache_ && !deg) n = std::max(want, 2 * cache_->size());
        if (deg) n = *deg + 1;
        cache_ = std::make_shared<const std::vector<xreal>>(compute(n));
        return cache_;
    }

    /// Exact integer coefficients when the family has them (partition types).
    virtual std::optional<std::vector<bigint>> exact_prefix(std::size_t) const { return std::nullopt; }

    virtual std::optional<std::size_t> degree() const { return std::nullopt; }

    /// ln of an upper bound on f(t) for 0 <= t < R.
    virtual xreal log_majorant(const xreal& t) const = 0;

    /// ln f(t) from a closed form, when one exists.
    virtual std::optional<xreal> log_value(const xreal&) const { return std::nullopt; }

protected:
    virtual std::vector<xreal> compute(std::size_t count) const = 0;

private:
    mutable std::mutex mutex_;
    mutable std::shared_ptr<const std::vector<xreal>> cache_;
};

struct EvalOptions {
    std::uint64_t term_budget = 10'000'000;
};

struct EvalResult {
    xreal value;
    xreal tail_bound;
    std::uint64_t terms_used = 0;
};

/// f(t e^{i theta}) together with the tail bound of the real evaluation.
struct CircleValue {
    xreal re;
    xreal im;
    xreal tail_bound;
    std::uint64_t terms_used = 0;

    xreal modulus() const { return boost::multiprecision::sqrt(re * re + im * im); }
};

class SeriesModel {
public:
    SeriesModel(ModelKind kind, std::string label, xreal radius,
                std::shared_ptr<const CoefficientSource> source, Structure structure,
                bool allow_zero_constant = false)
        : kind_(kind),
          label_(std::move(label)),
          radius_(radius),
          source_(std::move(source)),
          structure_(std::move(structure)) {
        if (!(radius_ > 0)) throw validation_error("series radius must be positive");
        validate_class_k(allow_zero_constant);
    }

    ModelKind kind() const { return kind_; }
    const std::string& label() const { return label_; }
    xreal radius() const { return radius_; }
    bool is_entire() const { return !is_finite(radius_); }
    const Structure& structure() const { return structure_; }
    const CoefficientSource& source() const { return *source_; }
    std::optional<std::size_t> degree() const { return source_->degree(); }

    xreal coeff(std::size_t n) const {
        auto p = source_->prefix(n + 1);
        return n < p->size() ? (*p)[n] : xreal(0);
    }
    std::shared_ptr<const std::vector<xreal>> prefix(std::size_t count) const {
        return source_->prefix(count);
    }
    std::optional<std::vector<bigint>> exact_coefficients(std::size_t count) const {
        return source_->exact_prefix(count);
    }

    void check_domain(const xreal& t) const {
        if (!(t >= 0)) throw domain_error("evaluation point must be non-negative");
        if (!(t < radius_))
            throw domain_error("evaluation point " + to_string(t, 17) + " is outside [0, R) for " + label_);
    }

private:
    // Exponents of expof models only need non-negative coefficients.
    void validate_class_k(bool allow_zero_constant) const {
        auto p = source_->prefix(64);
        if (p->empty() || !((*p)[0] > 0 || (allow_zero_constant && (*p)[0] == 0))) throw validation_error(label_ + ": class K requires a_0 > 0");
        bool nonconstant = false;
        for (std::size_t n = 0; n < p->size(); ++n) {
            if ((*p)[n] < 0) throw validation_error(label_ + ": negative coefficient");
            if (n > 0 && (*p)[n] > 0) nonconstant = true;
        }
        if (!nonconstant) throw validation_error(label_ + ": class K excludes constant series");
    }

    ModelKind kind_;
    std::string label_;
    xreal radius_;
    std::shared_ptr<const CoefficientSource> source_;
    Structure structure_;
};

namespace detail {

inline void check_rel_tol(const xreal& rel_tol) {
    if (!(rel_tol > 0 && rel_tol < 1)) throw validation_error("rel_tol must lie in (0, 1)");
}

/// Auxiliary radius for the tail bound.
inline xreal auxiliary_point(const SeriesModel& f, const xreal& t) {
    using boost::multiprecision::sqrt;
    return f.is_entire() ? xreal(2 * t) : xreal(sqrt(t * f.radius()));
}

/// ln of the bound on sum_{n>N} n^k r^n (falling-factorial weights are
/// majorized by n^k). Returns +inf while the ratio test has not yet kicked in.
inline xreal log_weighted_geometric_tail(std::uint64_t N, int k, const xreal& log_r) {
    using boost::multiprecision::exp;
    using boost::multiprecision::log;
    const xreal n1 = xreal(static_cast<double>(N + 1));
    const xreal ratio = exp(log_r + xreal(k) * log(1 + 1 / n1));
    if (!(ratio < 1)) return xinfinity();
    return xreal(k) * log(n1) + n1 * log_r - log(1 - ratio);
}

/// Shared truncation engine for eval / eval_derivative / eval_complex.
/// `visit(n, a_n)` accumulates term n; returns the partial-sum magnitude.
template <typename Visit>
EvalResult truncated_sum(const SeriesModel& f, const xreal& t, int order, const xreal& rel_tol,
                         const EvalOptions& opt, Visit&& visit) {
    using boost::multiprecision::log;
    f.check_domain(t);
    check_rel_tol(rel_tol);
    EvalResult res;
    if (auto deg = f.degree()) {
        auto p = f.prefix(*deg + 1);
        xreal mag = 0;
        for (std::size_t n = 0; n < p->size(); ++n) mag = visit(n, (*p)[n]);
        res.value = mag;
        res.tail_bound = 0;
        res.terms_used = p->size();
        return res;
    }
    if (t == 0) {
        auto p = f.prefix(static_cast<std::size_t>(order) + 1);
        res.value = visit(static_cast<std::size_t>(order), (*p)[order]);
        res.tail_bound = 0;
        res.terms_used = 1;
        return res;
    }
    const xreal tp = auxiliary_point(f, t);
    const xreal log_b = f.source().log_majorant(tp);
    const xreal log_r = log(t / tp);
    const xreal log_t = log(t);
    const xreal log_tol = log(rel_tol);

    std::size_t chunk = 256;
    std::shared_ptr<const std::vector<xreal>> p = f.prefix(chunk);
    xreal mag = 0;
    for (std::uint64_t n = 0;; ++n) {
        if (n >= opt.term_budget)
            throw budget_exceeded(f.label() + ": tail bound not reached within " +
                                  std::to_string(opt.term_budget) + " terms at t = " + to_string(t, 17));
        if (n >= p->size()) {
            chunk = std::min<std::size_t>(2 * p->size(), static_cast<std::size_t>(opt.term_budget) + 1);
            p = f.prefix(chunk);
        }
        if (n >= static_cast<std::uint64_t>(order)) mag = visit(static_cast<std::size_t>(n), (*p)[n]);
        if (n < static_cast<std::uint64_t>(order) || !(mag > 0)) continue;
        // tail_N <= B t^{-k} sum_{n>N} n^k r^n
        const xreal log_tail = log_b - xreal(order) * log_t + log_weighted_geometric_tail(n, order, log_r);
        if (log_tail <= log_tol + log(mag)) {
            using boost::multiprecision::exp;
            res.value = mag;
            res.tail_bound = exp(log_tail);
            res.terms_used = n + 1;
            return res;
        }
    }
}

}  // namespace detail

/// f(t) = sum a_n t^n with a certified relative truncation error.
inline EvalResult eval(const SeriesModel& f, const xreal& t, const xreal& rel_tol,
                       const EvalOptions& opt = {}) {
    compensated_sum<xreal> sum;
    xreal tn = 1;
    std::size_t next = 0;
    auto visit = [&](std::size_t n, const xreal& a) {
        while (next < n) {
            tn *= t;
            ++next;
        }
        sum += a * tn;
        tn *= t;
        ++next;
        return sum.value();
    };
    return detail::truncated_sum(f, t, 0, rel_tol, opt, visit);
}

/// k-th derivative f^{(k)}(t) = sum n(n-1)...(n-k+1) a_n t^{n-k}, 1 <= k <= 12.
inline EvalResult eval_derivative(const SeriesModel& f, const xreal& t, int order, const xreal& rel_tol,
                                  const EvalOptions& opt = {}) {
    if (order < 1 || order > 12) throw validation_error("derivative order must lie in [1, 12]");
    compensated_sum<xreal> sum;
    xreal tn = 1;  // t^{n-k}
    std::size_t next = static_cast<std::size_t>(order);
    auto visit = [&](std::size_t n, const xreal& a) {
        if (n < static_cast<std::size_t>(order)) return sum.value();
        while (next < n) {
            tn *= t;
            ++next;
        }
        xreal falling = 1;
        for (int i = 0; i < order; ++i) falling *= xreal(static_cast<double>(n - i));
        sum += falling * a * tn;
        tn *= t;
        ++next;
        return sum.value();
    };
    return detail::truncated_sum(f, t, order, rel_tol, opt, visit);
}

/// f(t e^{i theta}). The rotation e^{in theta} is advanced by complex
/// multiplication and reseeded exactly every 32 steps.
inline CircleValue eval_complex_on_circle(const SeriesModel& f, const xreal& t, const xreal& theta,
                                          const xreal& rel_tol, const EvalOptions& opt = {}) {
    using boost::multiprecision::cos;
    using boost::multiprecision::sin;
    compensated_sum<xreal> re, im, mag;
    xreal tn = 1;
    const xreal c1 = cos(theta), s1 = sin(theta);
    xreal cn = 1, sn = 0;
    std::size_t next = 0;
    auto advance = [&]() {
        ++next;
        tn *= t;
        if (next % 32 == 0) {
            const xreal arg = theta * xreal(static_cast<double>(next));
            cn = cos(arg);
            sn = sin(arg);
        } else {
            const xreal c = cn * c1 - sn * s1;
            sn = sn * c1 + cn * s1;
            cn = c;
        }
    };
    auto visit = [&](std::size_t n, const xreal& a) {
        while (next < n) advance();
        const xreal w = a * tn;
        re += w * cn;
        im += w * sn;
        mag += w;
        advance();
        return mag.value();
    };
    EvalResult r = detail::truncated_sum(f, t, 0, rel_tol, opt, visit);
    return CircleValue{re.value(), im.value(), r.tail_bound, r.terms_used};
}

/// ln f(t): closed form when the source has one, otherwise ln(eval).
inline xreal log_eval(const SeriesModel& f, const xreal& t, const xreal& rel_tol = xreal(1e-20)) {
    f.check_domain(t);
    if (auto v = f.source().log_value(t)) return *v;
    return boost::multiprecision::log(eval(f, t, rel_tol).value);
}

}  // namespace khinchin

#endif  // KHINCHIN_SERIES_HPP
