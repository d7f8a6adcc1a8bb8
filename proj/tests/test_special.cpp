#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <khinchin/special.hpp>

#include "oracles.hpp"

using namespace khinchin;
using Catch::Approx;

namespace {
double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }
}  // namespace

TEST_CASE("gamma at classical points", "[special]") {
    const double sqrt_pi = std::sqrt(M_PI);
    CHECK(rel(special::gamma(0.5), sqrt_pi) < 1e-14);
    CHECK(rel(special::gamma(3.5), 15 * sqrt_pi / 8) < 1e-14);
    CHECK(rel(special::gamma(5.0), 24.0) < 1e-14);
    CHECK(rel(special::gamma(1.0), 1.0) < 1e-14);
    // 59! has 81 digits; compare logs.
    CHECK(std::fabs(std::log(special::gamma(60.0)) - std::lgamma(60.0)) < 1e-12);
}

TEST_CASE("gamma satisfies the functional equation", "[special]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.5, 59.0);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng);
        CHECK(rel(special::gamma(x + 1), x * special::gamma(x)) < 1e-12);
    }
}

TEST_CASE("gamma agrees with the C library on its range", "[special]") {
    for (double x = 0.5; x <= 60.0; x += 0.37) CHECK(rel(special::gamma(x), std::tgamma(x)) < 1e-12);
}

TEST_CASE("gamma rejects arguments outside [0.5, 60]", "[special]") {
    CHECK_THROWS_AS(special::gamma(0.4), khinchin::domain_error);
    CHECK_THROWS_AS(special::gamma(60.5), khinchin::domain_error);
}

TEST_CASE("zeta against identities and direct summation", "[special]") {
    CHECK(rel(special::zeta(2.0), M_PI * M_PI / 6) < 1e-14);
    CHECK(rel(special::zeta(4.0), std::pow(M_PI, 4) / 90) < 1e-14);
    CHECK(rel(special::zeta(3.0), to_double(oracle::zeta_direct(xreal(3)))) < 1e-13);
    CHECK(rel(special::zeta(1.5), to_double(oracle::zeta_direct(xreal(1.5)))) < 1e-12);
    CHECK(special::zeta(3.0) == Approx(1.2020569032).epsilon(1e-10));
    CHECK(special::zeta(1.5) == Approx(2.6123753487).epsilon(1e-10));
    CHECK(rel(special::zeta(40.0), 1.0 + std::pow(2.0, -40) + std::pow(3.0, -40)) < 1e-15);
}

TEST_CASE("zeta is accurate close to the pole", "[special]") {
    // zeta(1 + e) = 1/e + gamma_E + O(e)
    const double e = 1e-4;
    CHECK(std::fabs(special::zeta(1 + e) - (1 / e + 0.5772156649015329)) < 1e-3);
    CHECK(rel(special::zeta(1.1), to_double(oracle::zeta_direct(xreal(1.1), 400'000))) < 1e-8);
}

TEST_CASE("zeta rejects x <= 1", "[special]") {
    CHECK_THROWS_AS(special::zeta(1.0), khinchin::domain_error);
    CHECK_THROWS_AS(special::zeta(0.5), khinchin::domain_error);
}

TEST_CASE("normal CDF values and symmetry", "[special]") {
    CHECK(special::normal_cdf(0.0) == 0.5);
    CHECK(std::fabs(special::normal_cdf(1.0) - 0.8413447460685429) < 1e-15);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-8, 8);
    for (int i = 0; i < 300; ++i) {
        const double x = u(rng);
        CHECK(std::fabs(special::normal_cdf(x) + special::normal_cdf(-x) - 1) < 1e-15);
    }
}

TEST_CASE("normal CDF matches the Taylor series oracle on [-8, 8]", "[special]") {
    for (double x = -8; x <= 8; x += 0.25) {
        const double ref = to_double(oracle::normal_cdf_taylor(xreal(x)));
        CHECK(std::fabs(special::normal_cdf(x) - ref) < 1e-15);
    }
}

TEST_CASE("normal CDF saturates far out", "[special]") {
    CHECK(special::normal_cdf(50) == 1.0);
    CHECK(special::normal_cdf(-50) >= 0.0);
    CHECK(special::normal_cdf(-50) < 1e-300);
}
