#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <khinchin/models.hpp>
#include <khinchin/series.hpp>

using namespace khinchin;

namespace {
double rel(const xreal& a, const xreal& b) { return to_double(boost::multiprecision::abs(a - b) / boost::multiprecision::abs(b)); }
}  // namespace

TEST_CASE("eval at closed-form points", "[series]") {
    auto e = build("exp");
    auto g = build("geometric");
    auto p = build("poly:1,2,3");
    CHECK(rel(eval(*e, 1, 1e-12).value, boost::multiprecision::exp(xreal(1))) < 1e-12);
    CHECK(rel(eval(*g, 0.5, 1e-12).value, 2) < 1e-12);
    const auto r = eval(*p, 2, 1e-3);
    CHECK(r.value == 17);
    CHECK(r.tail_bound == 0);
}

TEST_CASE("eval meets a tight tolerance and reports its tail", "[series]") {
    auto e = build("exp");
    const xreal ref = boost::multiprecision::exp(xreal(7.5));
    const auto r = eval(*e, 7.5, 1e-30);
    CHECK(rel(r.value, ref) < 1e-30);
    CHECK(r.tail_bound <= 1e-30 * r.value);
    CHECK(r.terms_used > 40);
}

TEST_CASE("tolerances 1e-12 and 1e-9 agree to 1e-9", "[series]") {
    for (const char* m : {"exp", "geometric", "partitions:p=1", "macmahon", "density:a=1,d=3"}) {
        auto f = build(m);
        for (double t : {0.1, 0.5, 0.8}) {
            const xreal a = eval(*f, t, 1e-12).value, b = eval(*f, t, 1e-9).value;
            CHECK(rel(b, a) < 1e-9);
        }
    }
}

TEST_CASE("derivatives at closed-form points", "[series]") {
    auto e = build("exp");
    auto g = build("geometric");
    auto p = build("poly:1,2,3");
    CHECK(rel(eval_derivative(*e, 1, 1, 1e-12).value, boost::multiprecision::exp(xreal(1))) < 1e-12);
    CHECK(eval_derivative(*p, 2, 1, 1e-12).value == 14);
    CHECK(eval_derivative(*p, 2, 2, 1e-12).value == 6);
    CHECK(eval_derivative(*p, 2, 3, 1e-12).value == 0);
    CHECK(rel(eval_derivative(*g, 0.5, 1, 1e-12).value, 4) < 1e-12);
    // k-th derivative of 1/(1-t) is k!/(1-t)^{k+1}
    xreal fact = 1;
    for (int k = 1; k <= 12; ++k) {
        fact *= k;
        CHECK(rel(eval_derivative(*g, 0.3, k, 1e-20).value, fact / boost::multiprecision::pow(1 - xreal(0.3), k + 1)) <
              1e-18);
    }
    CHECK_THROWS_AS(eval_derivative(*g, 0.3, 0, 1e-12), validation_error);
    CHECK_THROWS_AS(eval_derivative(*g, 0.3, 13, 1e-12), validation_error);
}

TEST_CASE("derivatives match central differences of eval", "[series]") {
    auto f = build("partitions:p=1");
    const xreal t = 0.6, h = 1e-8;
    const xreal fd = (eval(*f, t + h, 1e-30).value - eval(*f, t - h, 1e-30).value) / (2 * h);
    CHECK(rel(eval_derivative(*f, t, 1, 1e-25).value, fd) < 1e-12);
}

TEST_CASE("eval is increasing in t for class K", "[series]") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 0.95);
    for (const char* m : {"geometric", "partitions:p=2", "macmahon"}) {
        auto f = build(m);
        for (int i = 0; i < 10; ++i) {
            double a = u(rng), b = u(rng);
            if (a > b) std::swap(a, b);
            if (b - a < 1e-6) continue;
            CHECK(eval(*f, a, 1e-15).value < eval(*f, b, 1e-15).value);
        }
    }
}

TEST_CASE("values on the circle", "[series]") {
    using boost::multiprecision::exp;
    auto e = build("exp");
    auto one_z = build("poly:1,1");
    auto g = build("geometric");
    const auto c0 = eval_complex_on_circle(*g, 0.4, 0, 1e-20);
    CHECK(rel(c0.re, eval(*g, 0.4, 1e-20).value) < 1e-18);
    CHECK(boost::multiprecision::abs(c0.im) < 1e-25);
    const auto cz = eval_complex_on_circle(*one_z, 1, xpi, 1e-20);
    CHECK(cz.modulus() < 1e-30);
    const auto ce = eval_complex_on_circle(*e, 1, xpi, 1e-20);
    CHECK(rel(ce.re, exp(xreal(-1))) < 1e-18);
    CHECK(boost::multiprecision::abs(ce.im) < 1e-25);
    // exp(t e^{i theta}) = e^{t cos theta} (cos(t sin theta) + i sin(t sin theta))
    const xreal t = 3.7, th = 1.3;
    const auto cw = eval_complex_on_circle(*e, t, th, 1e-25);
    using boost::multiprecision::cos;
    using boost::multiprecision::sin;
    CHECK(rel(cw.re, exp(t * cos(th)) * cos(t * sin(th))) < 1e-20);
    CHECK(rel(cw.im, exp(t * cos(th)) * sin(t * sin(th))) < 1e-20);
}

TEST_CASE("circle modulus is dominated by the real value", "[series]") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> th(-3.14, 3.14);
    for (const char* m : {"exp", "geometric", "partitions:p=1", "poly:1,3,0,2"}) {
        auto f = build(m);
        const xreal t = 0.7;
        const xreal v = eval(*f, t, 1e-20).value;
        for (int i = 0; i < 20; ++i) CHECK(eval_complex_on_circle(*f, t, th(rng), 1e-20).modulus() <= v * (1 + 1e-18));
    }
}

TEST_CASE("log_eval reaches beyond the binary128 range", "[series]") {
    auto e = build("exp");
    CHECK(rel(log_eval(*e, 5), 5) < 1e-18);
    CHECK(rel(log_eval(*e, 20000), 20000) < 1e-15);
    auto g = build("geometric");
    CHECK(rel(log_eval(*g, 0.5), boost::multiprecision::log(xreal(2))) < 1e-18);
}

TEST_CASE("domain and tolerance checks", "[series]") {
    auto g = build("geometric");
    CHECK_THROWS_AS(eval(*g, 1.0, 1e-12), domain_error);
    CHECK_THROWS_AS(eval(*g, -0.1, 1e-12), domain_error);
    CHECK_THROWS_AS(eval(*g, 0.5, 0), validation_error);
    CHECK(eval(*g, 0, 1e-12).value == 1);
}

TEST_CASE("term budget is enforced", "[series]") {
    auto g = build("geometric");
    EvalOptions opt;
    opt.term_budget = 100;
    CHECK_THROWS_AS(eval(*g, 0.999, 1e-20, opt), budget_exceeded);
}
