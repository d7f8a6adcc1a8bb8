#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include <khinchin/family.hpp>
#include <khinchin/models.hpp>

#include "oracles.hpp"

using namespace khinchin;

namespace {

std::vector<int> powers(int p, int n) {
    std::vector<int> parts;
    for (int j = 1;; ++j) {
        long v = 1;
        for (int i = 0; i < p; ++i) v *= j;
        if (v > n) break;
        parts.push_back(static_cast<int>(v));
    }
    return parts;
}

std::vector<xreal> log_grid(double lo, double hi, int n) {
    std::vector<xreal> g;
    for (int i = 0; i < n; ++i) g.push_back(xreal(lo * std::pow(hi / lo, double(i) / (n - 1))));
    return g;
}

}  // namespace

TEST_CASE("partition coefficients match enumeration", "[models]") {
    auto f = build("partitions:p=1");
    auto exact = *f->exact_coefficients(41);
    const std::vector<int> head{1, 1, 2, 3, 5, 7};
    for (int n = 0; n < 6; ++n) CHECK(exact[n] == head[n]);
    for (int n = 0; n <= 40; ++n) CHECK(exact[n] == oracle::count_partitions(n, powers(1, n)));
    CHECK(exact[40] == 37338);
}

TEST_CASE("p-th power partition coefficients match enumeration", "[models]") {
    for (int p = 2; p <= 3; ++p) {
        auto f = build("partitions:p=" + std::to_string(p));
        auto exact = *f->exact_coefficients(61);
        for (int n = 0; n <= 60; ++n) CHECK(exact[n] == oracle::count_partitions(n, powers(p, n)));
    }
    CHECK((*build("partitions:p=2")->exact_coefficients(5))[4] == 2);
}

TEST_CASE("MacMahon coefficients match plane-partition enumeration", "[models]") {
    auto f = build("macmahon");
    auto exact = *f->exact_coefficients(21);
    const std::vector<int> head{1, 1, 3, 6, 13, 24};
    for (int n = 0; n < 6; ++n) CHECK(exact[n] == head[n]);
    for (int n = 0; n <= 20; ++n) CHECK(exact[n] == oracle::count_plane_partitions(n));
}

TEST_CASE("density partitions count parts from the progression", "[models]") {
    auto f = build("density:a=1,d=3");
    auto exact = *f->exact_coefficients(41);
    std::vector<int> parts;
    for (int v : density_set_members(1, 3, 14)) parts.push_back(v);
    for (int n = 0; n <= 40; ++n) CHECK(exact[n] == oracle::count_partitions(n, parts));
}

TEST_CASE("density set members and empirical density", "[models]") {
    CHECK(density_set_members(1, 3, 4) == std::vector<std::int64_t>{1, 4, 7, 10});
    CHECK(density_set_members(2, 2, 3) == std::vector<std::int64_t>{2, 4, 6});
    CHECK(std::fabs(empirical_density(1, 3, 300) - 1.0 / 3) < 1e-12);
    CHECK(std::fabs(empirical_density(1, 3, 300) - 0.3333) < 1e-4);
    CHECK(empirical_density(5, 2, 4) == 0);
    CHECK_THROWS_AS(density_set_members(0, 3, 4), validation_error);
}

TEST_CASE("iterated exponential coefficients are e Bell_n / n!", "[models]") {
    auto f = build("expiter:k=2");
    const std::vector<double> bell{1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975};
    double fact = 1;
    for (int n = 0; n <= 10; ++n) {
        if (n > 0) fact *= n;
        const double ref = std::exp(1.0) * bell[n] / fact;
        CHECK(std::fabs(to_double(f->coeff(n)) - ref) < 1e-14 * ref);
    }
    // expof:exp is the same series
    auto g = build("expof:exp");
    for (int n = 0; n <= 30; ++n) CHECK(f->coeff(n) == g->coeff(n));
}

TEST_CASE("exponential of a polynomial", "[models]") {
    // e^{z^2}: coefficient of z^{2k} is 1/k!
    auto f = build("expof:poly:0,0,1");
    double fact = 1;
    for (int k = 0; k <= 10; ++k) {
        if (k > 0) fact *= k;
        CHECK(std::fabs(to_double(f->coeff(2 * k)) - 1 / fact) < 1e-16);
        CHECK(f->coeff(2 * k + 1) == 0);
    }
    CHECK(f->is_entire());
}

TEST_CASE("canonical products", "[models]") {
    auto f = build("canonical-list:1,2,5");
    // (1+z)(1+z/2)(1+z/5) = 1 + 1.7 z + 0.8 z^2 + 0.1 z^3
    CHECK(f->is_entire());
    CHECK(std::fabs(to_double(f->coeff(1)) - 1.7) < 1e-15);
    CHECK(std::fabs(to_double(f->coeff(2)) - 0.8) < 1e-15);
    CHECK(std::fabs(to_double(f->coeff(3)) - 0.1) < 1e-15);
    CHECK(f->coeff(4) == 0);

    // sum_j t/(b_j+t) and sum_j t b_j/(b_j+t)^2 over the zeros
    auto c = build("canonical:rho=0.5,J=100");
    const double t = 30;
    double m = 0, v = 0;
    for (int j = 1; j <= 100; ++j) {
        const double b = double(j) * j;
        m += t / (b + t);
        v += t * b / ((b + t) * (b + t));
    }
    const auto mv = mean_variance(*c, t);
    CHECK(std::fabs(to_double(mv.mean) - m) < 1e-12 * m);
    CHECK(std::fabs(to_double(mv.variance) - v) < 1e-12 * v);
}

TEST_CASE("explicit coefficient files", "[models]") {
    const std::string path = "test_models_coeffs.txt";
    {
        std::ofstream out(path, std::ios::binary);
        out << "\xEF\xBB\xBF" << "1\n0.5\n\n0.25\n";
    }
    auto f = build("explicit:" + path);
    CHECK(f->coeff(0) == 1);
    CHECK(f->coeff(1) == xreal(0.5));
    CHECK(f->coeff(2) == xreal(0.25));
    CHECK(f->is_entire());
    {
        std::ofstream out(path);
        out << "1\n-2\n";
    }
    CHECK_THROWS_AS(build("explicit:" + path), validation_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(build("explicit:no/such/file.txt"), validation_error);
}

TEST_CASE("model grammar rejects bad input", "[models]") {
    for (const char* bad : {"nosuch", "exp:1", "poly:", "poly:1,-1", "poly:0,0", "poly:1", "partitions:p=0",
                            "partitions:p=7", "partitions:q=1", "partitions:p=1,p=2", "density:a=1",
                            "density:a=0,d=3", "canonical:rho=1.5,J=10", "canonical:rho=0.5,J=0",
                            "canonical-list:2,1", "expiter:k=5", "expof:nosuch", "partitions:p=x"}) {
        INFO(bad);
        CHECK_THROWS_AS(build(bad), validation_error);
    }
}

TEST_CASE("clan ratio curves", "[models]") {
    auto e = build("exp");
    auto c = clan_ratio_curve(*e, {1, 10, 100, 300, 1000});
    for (std::size_t i = 0; i < c.t.size(); ++i)
        CHECK(std::fabs(to_double(c.ratio[i] - 1 / boost::multiprecision::sqrt(c.t[i]))) < 1e-12);
    CHECK(std::fabs(to_double(c.ratio[2]) - 0.1) < 1e-12);
    CHECK(c.clan_evidence);
    // 1/n! underflows binary128 before the series converges at t = 1e4
    CHECK_THROWS_AS(clan_ratio_curve(*e, {1e4}), budget_exceeded);

    auto g = build("geometric");
    auto cg = clan_ratio_curve(*g, {0.5, 0.9, 0.99});
    CHECK(std::fabs(to_double(cg.ratio[2]) - 1 / std::sqrt(0.99)) < 1e-12);
    CHECK(std::fabs(to_double(cg.ratio[2]) - 1.005) < 1e-3);
    CHECK_FALSE(cg.clan_evidence);

    auto b = build("poly:1,1");
    CHECK(std::fabs(to_double(clan_ratio_curve(*b, {1}).ratio[0]) - 1) < 1e-15);
}

TEST_CASE("order estimates", "[models]") {
    const double e = order_estimate(*build("exp"), log_grid(10, 1e4, 13));
    CHECK(e >= 0.95);
    CHECK(e <= 1.05);
    const double e2 = order_estimate(*build("expof:poly:0,0,1"), log_grid(10, 1e4, 13));
    CHECK(e2 >= 1.9);
    CHECK(e2 <= 2.1);
    const double ec = order_estimate(*build("canonical:rho=0.5,J=10000"), log_grid(100, 1e5, 13));
    CHECK(ec >= 0.4);
    CHECK(ec <= 0.6);
    CHECK_THROWS_AS(order_estimate(*build("geometric"), log_grid(0.1, 0.9, 5)), unsupported_model);
    CHECK_THROWS_AS(order_estimate(*build("exp"), log_grid(10, 100, 5)), grid_error);
}
