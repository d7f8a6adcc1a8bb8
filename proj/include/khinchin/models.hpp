#ifndef KHINCHIN_MODELS_HPP
#define KHINCHIN_MODELS_HPP

// Built-in model families and the model-spec mini-language:
//
//   exp | geometric | poly:c0,c1,... | partitions:p=<int> | macmahon
//   | density:a=<int>,d=<int> | canonical:rho=<float>,J=<int>
//   | canonical-list:b1,b2,... | expof:<spec> | expiter:k=<int>
//   | explicit:<path>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "euler_product.hpp"
#include "exact.hpp"
#include "family.hpp"
#include "series.hpp"
#include "xreal.hpp"

namespace khinchin {

// ---------------------------------------------------------------------------
// Coefficient sources

namespace sources {

class Exp final : public CoefficientSource {
public:
    xreal log_majorant(const xreal& t) const override { return t; }
    std::optional<xreal> log_value(const xreal& t) const override { return t; }

protected:
    std::vector<xreal> compute(std::size_t count) const override {
        std::vector<xreal> a(count);
        xreal c = 1;
        for (std::size_t n = 0; n < count; ++n) {
            if (n > 0) c /= xreal(static_cast<double>(n));
            a[n] = c;
        }
        return a;
    }
};

class Polynomial final : public CoefficientSource {
public:
    explicit Polynomial(std::vector<rational> c) : exact_(std::move(c)) {
        while (exact_.size() > 1 && exact_.back() == 0) exact_.pop_back();
        for (const auto& q : exact_) values_.push_back(to_xreal(q));
    }
    std::optional<std::size_t> degree() const override { return exact_.size() - 1; }
    xreal log_majorant(const xreal& t) const override {
        xreal s = 0, tn = 1;
        for (const auto& a : values_) {
            s += a * tn;
            tn *= t;
        }
        return boost::multiprecision::log(s) + xreal(1e-30);
    }
    std::optional<xreal> log_value(const xreal& t) const override { return log_majorant(t) - xreal(1e-30); }
    const std::vector<rational>& exact() const { return exact_; }

protected:
    std::vector<xreal> compute(std::size_t) const override { return values_; }

private:
    std::vector<rational> exact_;
    std::vector<xreal> values_;
};

/// prod_j (1 - z^{lambda_j})^{-w_j}, coefficients as exact integers.
/// Factors with lambda_j above the requested degree cannot reach it, so
/// every prefix is exact.
class EulerProduct final : public CoefficientSource {
public:
    explicit EulerProduct(PartSequence parts, std::size_t degree_budget = 1'000'000)
        : parts_(parts), degree_budget_(degree_budget) {}

    std::optional<std::vector<bigint>> exact_prefix(std::size_t count) const override {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!exact_ || exact_->size() < count) {
            const std::size_t n = std::max(count, exact_ ? 2 * exact_->size() : count);
            exact_ = std::make_shared<const std::vector<bigint>>(expand(n));
        }
        return std::vector<bigint>(exact_->begin(), exact_->begin() + static_cast<std::ptrdiff_t>(count));
    }

    xreal log_majorant(const xreal& t) const override {
        if (parts_.finite()) return *log_value(t) + xreal(1e-30);
        return euler_product_log_majorant(parts_, t);
    }
    std::optional<xreal> log_value(const xreal& t) const override {
        using boost::multiprecision::log;
        if (t == 0) return xreal(0);
        return euler_product_fulcrum(parts_, log(t), 0, xreal(1e-32)).value[0];
    }
    const PartSequence& parts() const { return parts_; }

protected:
    std::vector<xreal> compute(std::size_t count) const override {
        std::shared_ptr<const std::vector<bigint>> ex;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (!exact_ || exact_->size() < count) exact_ = std::make_shared<const std::vector<bigint>>(expand(count));
            ex = exact_;
        }
        std::vector<xreal> a(count);
        for (std::size_t n = 0; n < count; ++n) a[n] = to_xreal((*ex)[n]);
        return a;
    }

private:
    std::vector<bigint> expand(std::size_t count) const {
        if (count > degree_budget_)
            throw budget_exceeded("coefficient degree " + std::to_string(count) + " exceeds the budget " +
                                  std::to_string(degree_budget_));
        std::vector<bigint> c(count, 0);
        if (count == 0) return c;
        c[0] = 1;
        for (std::int64_t j = 1;; ++j) {
            if (parts_.count && j > *parts_.count) break;
            const std::int64_t b = parts_.base(j);
            // lambda_j >= count: the factor is 1 modulo z^count.
            if (static_cast<double>(b) >= std::pow(static_cast<double>(count), 1.0 / parts_.power) + 1) break;
            const std::int64_t lam = parts_.part(j);
            if (lam >= static_cast<std::int64_t>(count)) continue;
            const auto L = static_cast<std::size_t>(lam);
            const std::int64_t w = parts_.weight(j);
            if (w == 1) {
                // (1 - z^L)^{-1}: ascending in-place geometric convolution.
                for (std::size_t n = L; n < count; ++n) c[n] += c[n - L];
            } else {
                // (1 - z^L)^{-w} = sum_k C(k+w-1, k) z^{Lk}.
                std::vector<bigint> binom(count / L + 1);
                binom[0] = 1;
                for (std::size_t k = 1; k < binom.size(); ++k)
                    binom[k] = binom[k - 1] * (static_cast<std::int64_t>(k) + w - 1) / static_cast<std::int64_t>(k);
                for (std::size_t n = count - 1; n >= L; --n) {
                    bigint acc = 0;
                    for (std::size_t k = 1; k * L <= n; ++k) acc += binom[k] * c[n - k * L];
                    c[n] += acc;
                    if (n == L) break;
                }
            }
        }
        return c;
    }

    PartSequence parts_;
    std::size_t degree_budget_;
    mutable std::mutex mutex_;
    mutable std::shared_ptr<const std::vector<bigint>> exact_;
};

/// prod_{j<=J} (1 + z/b_j): coefficients are elementary symmetric functions
/// of 1/b_j, expanded degree by degree as needed.
class CanonicalProduct final : public CoefficientSource {
public:
    explicit CanonicalProduct(std::vector<xreal> zeros) : zeros_(std::move(zeros)) {}

    xreal log_majorant(const xreal& t) const override { return *log_value(t) * (1 + xreal(1e-30)); }
    std::optional<xreal> log_value(const xreal& t) const override {
        using boost::multiprecision::log1p;
        compensated_sum<xreal> s;
        for (auto it = zeros_.rbegin(); it != zeros_.rend(); ++it) s += log1p(t / *it);
        return s.value();
    }
    const std::vector<xreal>& zeros() const { return zeros_; }

protected:
    std::vector<xreal> compute(std::size_t count) const override {
        const std::size_t deg = std::min(count, zeros_.size() + 1);
        std::vector<xreal> e(count, 0);
        e[0] = 1;
        for (std::size_t j = 0; j < zeros_.size(); ++j) {
            const xreal inv = 1 / zeros_[j];
            for (std::size_t n = std::min(j + 1, deg - 1); n >= 1; --n) e[n] += e[n - 1] * inv;
        }
        return e;
    }

private:
    std::vector<xreal> zeros_;
};

/// e^{g}: b_0 = e^{a_0}, b_n = (1/n) sum_{k=1}^{n} k a_k b_{n-k}.
class ExpOf final : public CoefficientSource {
public:
    explicit ExpOf(std::shared_ptr<const SeriesModel> inner) : inner_(std::move(inner)) {}

    xreal log_majorant(const xreal& t) const override {
        const EvalResult r = eval(*inner_, t, xreal(1e-12));
        return (r.value + r.tail_bound) * (1 + xreal(1e-30));
    }
    std::optional<xreal> log_value(const xreal& t) const override { return eval(*inner_, t, xreal(1e-32)).value; }

protected:
    std::vector<xreal> compute(std::size_t count) const override {
        auto a = inner_->prefix(count);
        std::vector<xreal> b(count, 0);
        b[0] = boost::multiprecision::exp((*a)[0]);
        const std::size_t na = a->size();
        for (std::size_t n = 1; n < count; ++n) {
            compensated_sum<xreal> s;
            const std::size_t top = std::min(n, na - 1);
            for (std::size_t k = 1; k <= top; ++k)
                if ((*a)[k] != 0) s += xreal(static_cast<double>(k)) * (*a)[k] * b[n - k];
            b[n] = s.value() / xreal(static_cast<double>(n));
        }
        return b;
    }

private:
    std::shared_ptr<const SeriesModel> inner_;
};

}  // namespace sources

// ---------------------------------------------------------------------------
// Model specs

struct ModelSpec {
    ModelKind kind = ModelKind::exp;
    std::vector<rational> coeffs;  // poly, explicit
    int p = 1;                     // partitions
    std::int64_t a = 1, d = 1;     // density
    double rho = 0.5;              // canonical
    std::int64_t J = 0;            // canonical
    std::vector<xreal> zeros;      // canonical-list
    std::shared_ptr<ModelSpec> inner;  // expof
    int k = 1;                     // expiter
    std::string path;              // explicit
    std::string text;              // canonical textual form
};

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::int64_t parse_int(const std::string& v, const std::string& key) {
    std::size_t pos = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw validation_error("parameter " + key + " must be an integer, got '" + v + "'");
    }
    if (pos != v.size()) throw validation_error("parameter " + key + " must be an integer, got '" + v + "'");
    return x;
}

inline double parse_real(const std::string& v, const std::string& key) {
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw validation_error("parameter " + key + " must be a number, got '" + v + "'");
    }
    if (pos != v.size() || !std::isfinite(x))
        throw validation_error("parameter " + key + " must be a number, got '" + v + "'");
    return x;
}

/// "k1=v1,k2=v2" with exactly the given keys.
inline std::map<std::string, std::string> parse_params(std::string_view body, const std::vector<std::string>& keys,
                                                       const std::string& model) {
    std::map<std::string, std::string> out;
    for (const auto& item : split(body, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw validation_error(model + ": expected key=value, got '" + item + "'");
        std::string key = item.substr(0, eq);
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw validation_error(model + ": unknown parameter '" + key + "'");
        if (out.count(key)) throw validation_error(model + ": duplicate parameter '" + key + "'");
        out[key] = item.substr(eq + 1);
    }
    for (const auto& k : keys)
        if (!out.count(k)) throw validation_error(model + ": missing parameter '" + k + "'");
    return out;
}

inline std::string format_rational(const rational& q) {
    if (boost::multiprecision::denominator(q) == 1) return boost::multiprecision::numerator(q).str();
    return to_string(to_xreal(q), 17);
}

}  // namespace detail

inline std::vector<rational> read_coefficient_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open coefficient file '" + path + "'");
    std::vector<rational> c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
            static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
            line.erase(0, 3);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            c.push_back(parse_decimal(line));
        } catch (const validation_error&) {
            throw validation_error(path + ":" + std::to_string(lineno) + ": not a decimal number");
        }
        if (c.back() < 0) throw validation_error(path + ":" + std::to_string(lineno) + ": negative coefficient");
    }
    if (c.empty()) throw validation_error("coefficient file '" + path + "' is empty");
    return c;
}

inline ModelSpec parse_model_spec(std::string_view text) {
    ModelSpec spec;
    const auto colon = text.find(':');
    const std::string head(text.substr(0, colon));
    const std::string_view body = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    const bool has_body = colon != std::string_view::npos;
    auto no_body = [&] {
        if (has_body) throw validation_error("model '" + head + "' takes no parameters");
    };
    auto need_body = [&] {
        if (!has_body || body.empty()) throw validation_error("model '" + head + "' needs parameters");
    };

    if (head == "exp") {
        no_body();
        spec.kind = ModelKind::exp;
        spec.text = "exp";
    } else if (head == "geometric") {
        no_body();
        spec.kind = ModelKind::geometric;
        spec.text = "geometric";
    } else if (head == "poly") {
        need_body();
        spec.kind = ModelKind::poly;
        for (const auto& c : detail::split(body, ',')) {
            spec.coeffs.push_back(parse_decimal(c));
            if (spec.coeffs.back() < 0) throw validation_error("poly: coefficients must be non-negative");
        }
        spec.text = "poly:" + std::string(body);
    } else if (head == "partitions") {
        need_body();
        spec.kind = ModelKind::partitions;
        auto kv = detail::parse_params(body, {"p"}, head);
        const auto p = detail::parse_int(kv["p"], "p");
        if (p < 1 || p > 6) throw validation_error("partitions: p must lie in [1, 6]");
        spec.p = static_cast<int>(p);
        spec.text = "partitions:p=" + std::to_string(p);
    } else if (head == "macmahon") {
        no_body();
        spec.kind = ModelKind::macmahon;
        spec.text = "macmahon";
    } else if (head == "density") {
        need_body();
        spec.kind = ModelKind::density;
        auto kv = detail::parse_params(body, {"a", "d"}, head);
        spec.a = detail::parse_int(kv["a"], "a");
        spec.d = detail::parse_int(kv["d"], "d");
        if (spec.a < 1 || spec.d < 1) throw validation_error("density: requires a >= 1 and d >= 1");
        spec.text = "density:a=" + std::to_string(spec.a) + ",d=" + std::to_string(spec.d);
    } else if (head == "canonical") {
        need_body();
        spec.kind = ModelKind::canonical;
        auto kv = detail::parse_params(body, {"rho", "J"}, head);
        spec.rho = detail::parse_real(kv["rho"], "rho");
        spec.J = detail::parse_int(kv["J"], "J");
        if (!(spec.rho > 0 && spec.rho < 1)) throw validation_error("canonical: rho must lie in (0, 1)");
        if (spec.J < 1 || spec.J > 10'000'000) throw validation_error("canonical: J must lie in [1, 1e7]");
        spec.text = "canonical:rho=" + kv["rho"] + ",J=" + std::to_string(spec.J);
    } else if (head == "canonical-list") {
        need_body();
        spec.kind = ModelKind::canonical;
        xreal prev = 0;
        for (const auto& b : detail::split(body, ',')) {
            const rational q = parse_decimal(b);
            if (!(q > 0)) throw validation_error("canonical-list: zeros must be positive");
            const xreal x = to_xreal(q);
            if (!(x > prev)) throw validation_error("canonical-list: zeros must be strictly increasing");
            spec.zeros.push_back(x);
            prev = x;
        }
        spec.text = "canonical-list:" + std::string(body);
    } else if (head == "expof") {
        need_body();
        spec.kind = ModelKind::exp_of;
        spec.inner = std::make_shared<ModelSpec>(parse_model_spec(body));
        spec.text = "expof:" + spec.inner->text;
    } else if (head == "expiter") {
        need_body();
        spec.kind = ModelKind::exp_iter;
        auto kv = detail::parse_params(body, {"k"}, head);
        const auto k = detail::parse_int(kv["k"], "k");
        if (k < 1 || k > 4) throw validation_error("expiter: k must lie in [1, 4]");
        spec.k = static_cast<int>(k);
        spec.text = "expiter:k=" + std::to_string(k);
    } else if (head == "explicit") {
        need_body();
        spec.kind = ModelKind::explicit_list;
        spec.path = std::string(body);
        spec.coeffs = read_coefficient_file(spec.path);
        spec.text = "explicit:" + spec.path;
    } else {
        throw validation_error("unknown model '" + head + "'");
    }
    return spec;
}

inline std::shared_ptr<const SeriesModel> build(const ModelSpec& spec);

namespace detail {

inline std::shared_ptr<const SeriesModel> build_model(const ModelSpec& spec, bool as_exponent);

inline std::shared_ptr<const SeriesModel> build_euler(ModelKind kind, const std::string& label, PartSequence ps) {
    const xreal radius = 1;
    return std::make_shared<const SeriesModel>(kind, label, radius, std::make_shared<sources::EulerProduct>(ps),
                                               PartitionForm{ps});
}

inline std::shared_ptr<const SeriesModel> build_exp_iter(int k) {
    if (k == 1)
        return std::make_shared<const SeriesModel>(ModelKind::exp_iter, "expiter:k=1", xinfinity(),
                                                   std::make_shared<sources::Exp>(), ExpForm{});
    auto inner = build_exp_iter(k - 1);
    return std::make_shared<const SeriesModel>(ModelKind::exp_iter, "expiter:k=" + std::to_string(k), xinfinity(),
                                               std::make_shared<sources::ExpOf>(inner), ExpOfForm{inner});
}

}  // namespace detail

inline std::shared_ptr<const SeriesModel> build(const ModelSpec& spec) { return detail::build_model(spec, false); }

namespace detail {

inline std::shared_ptr<const SeriesModel> build_model(const ModelSpec& spec, bool as_exponent) {
    switch (spec.kind) {
        case ModelKind::exp:
            return std::make_shared<const SeriesModel>(ModelKind::exp, "exp", xinfinity(),
                                                       std::make_shared<sources::Exp>(), ExpForm{});
        case ModelKind::geometric: {
            PartSequence ps;
            ps.count = 1;
            return detail::build_euler(ModelKind::geometric, "geometric", ps);
        }
        case ModelKind::poly:
        case ModelKind::explicit_list: {
            auto src = std::make_shared<sources::Polynomial>(spec.coeffs);
            return std::make_shared<const SeriesModel>(spec.kind, spec.text, xinfinity(), src,
                                                       PolyForm{src->exact()}, as_exponent);
        }
        case ModelKind::partitions: {
            PartSequence ps;
            ps.power = spec.p;
            return detail::build_euler(ModelKind::partitions, spec.text, ps);
        }
        case ModelKind::macmahon: {
            PartSequence ps;
            ps.weight_is_part = true;
            return detail::build_euler(ModelKind::macmahon, "macmahon", ps);
        }
        case ModelKind::density: {
            PartSequence ps;
            ps.first = spec.a;
            ps.step = spec.d;
            return detail::build_euler(ModelKind::density, spec.text, ps);
        }
        case ModelKind::canonical: {
            std::vector<xreal> zeros = spec.zeros;
            std::optional<double> rho;
            if (zeros.empty()) {
                rho = spec.rho;
                zeros.reserve(static_cast<std::size_t>(spec.J));
                const xreal e = 1 / xreal(spec.rho);
                for (std::int64_t j = 1; j <= spec.J; ++j)
                    zeros.push_back(boost::multiprecision::pow(xreal(static_cast<double>(j)), e));
            }
            auto src = std::make_shared<sources::CanonicalProduct>(zeros);
            return std::make_shared<const SeriesModel>(ModelKind::canonical, spec.text, xinfinity(), src,
                                                       CanonicalForm{zeros, rho});
        }
        case ModelKind::exp_of: {
            if (!spec.inner) throw validation_error("expof: missing inner model");
            auto inner = build_model(*spec.inner, true);
            return std::make_shared<const SeriesModel>(ModelKind::exp_of, spec.text, inner->radius(),
                                                       std::make_shared<sources::ExpOf>(inner), ExpOfForm{inner});
        }
        case ModelKind::exp_iter:
            return detail::build_exp_iter(spec.k);
    }
    throw validation_error("unsupported model kind");
}

}  // namespace detail

inline std::shared_ptr<const SeriesModel> build(std::string_view text) { return build(parse_model_spec(text)); }

// ---------------------------------------------------------------------------
// Model-level diagnostics

/// First `count` members of {a, a+d, a+2d, ...}.
inline std::vector<std::int64_t> density_set_members(std::int64_t a, std::int64_t d, std::size_t count) {
    if (a < 1 || d < 1) throw validation_error("density set requires a >= 1 and d >= 1");
    std::vector<std::int64_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = a + d * static_cast<std::int64_t>(i);
    return out;
}

/// #(A ∩ [1, n]) / n for the progression A = {a, a+d, ...}.
inline double empirical_density(std::int64_t a, std::int64_t d, std::int64_t n) {
    if (n < 1) throw validation_error("empirical density needs n >= 1");
    const std::int64_t count = n < a ? 0 : (n - a) / d + 1;
    return static_cast<double>(count) / static_cast<double>(n);
}

struct ClanCurve {
    std::vector<xreal> t;
    std::vector<xreal> ratio;  // sigma_f(t) / m_f(t)
    bool clan_evidence = false;
};

/// sigma_f/m_f along the grid. Clan evidence: the curve is decreasing over
/// its last half and ends below 0.1.
inline ClanCurve clan_ratio_curve(const SeriesModel& f, const std::vector<xreal>& grid) {
    using boost::multiprecision::sqrt;
    ClanCurve c;
    for (const auto& t : grid) {
        if (!(t > 0)) throw domain_error("clan ratio requires t > 0");
        const MeanVariance mv = mean_variance(f, t);
        c.t.push_back(t);
        c.ratio.push_back(sqrt(mv.variance) / mv.mean);
    }
    if (c.ratio.size() >= 2) {
        bool decreasing = true;
        for (std::size_t i = c.ratio.size() / 2; i + 1 < c.ratio.size(); ++i)
            if (!(c.ratio[i + 1] < c.ratio[i])) decreasing = false;
        c.clan_evidence = decreasing && c.ratio.back() < xreal(0.1);
    }
    return c;
}

/// Least-squares slope of ln ln f(t) against ln t over the top decade of
/// the grid.
inline double order_estimate(const SeriesModel& f, const std::vector<xreal>& grid) {
    using boost::multiprecision::log;
    if (!f.is_entire()) throw unsupported_model(f.label() + ": order estimate needs an entire function");
    if (grid.size() < 2) throw grid_error("order estimate needs at least two grid points");
    const xreal tmax = *std::max_element(grid.begin(), grid.end());
    const xreal tmin = *std::min_element(grid.begin(), grid.end());
    if (!(tmin > 0) || !(tmax >= 1000 * tmin)) throw grid_error("order estimate needs a grid spanning 3 decades");
    std::vector<xreal> xs, ys;
    for (const auto& t : grid) {
        if (t < tmax / 10) continue;
        const xreal lf = log_eval(f, t);
        if (!(lf > 0)) throw domain_error("ln f(t) must be positive for the order estimate");
        xs.push_back(log(t));
        ys.push_back(log(lf));
    }
    if (xs.size() < 2) throw grid_error("order estimate needs two points in the top decade");
    xreal mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xreal(static_cast<double>(xs.size()));
    my /= xreal(static_cast<double>(xs.size()));
    xreal sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return to_double(sxy / sxx);
}

}  // namespace khinchin

#endif  // KHINCHIN_MODELS_HPP
