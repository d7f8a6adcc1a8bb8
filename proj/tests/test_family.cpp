#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include <khinchin/family.hpp>
#include <khinchin/models.hpp>
#include <khinchin/special.hpp>

using namespace khinchin;

namespace {
double d(const xreal& x) { return to_double(x); }
}  // namespace

TEST_CASE("mean and variance at closed-form points", "[family]") {
    auto mv = mean_variance(*build("exp"), 2);
    CHECK(std::fabs(d(mv.mean) - 2) < 1e-28);
    CHECK(std::fabs(d(mv.variance) - 2) < 1e-28);
    mv = mean_variance(*build("geometric"), 0.5);
    CHECK(std::fabs(d(mv.mean) - 1) < 1e-28);
    CHECK(std::fabs(d(mv.variance) - 2) < 1e-28);
    mv = mean_variance(*build("poly:1,1"), 1);
    CHECK(mv.mean == xreal(0.5));
    CHECK(mv.variance == xreal(0.25));
    // geometric: t/(1-t) and t/(1-t)^2 on a sweep
    for (double t = 0.05; t < 0.95; t += 0.1) {
        mv = mean_variance(*build("geometric"), t);
        CHECK(std::fabs(d(mv.mean) - t / (1 - t)) < 1e-12 * t / (1 - t));
        CHECK(std::fabs(d(mv.variance) - t / ((1 - t) * (1 - t))) < 1e-12 * t / ((1 - t) * (1 - t)));
    }
}

TEST_CASE("mean is increasing in t", "[family]") {
    for (const char* m : {"exp", "partitions:p=1", "macmahon", "canonical:rho=0.5,J=1000"}) {
        auto f = build(m);
        xreal prev = -1;
        for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const auto mv = mean_variance(*f, t);
            CHECK(mv.mean > prev);
            CHECK(mv.variance > 0);
            prev = mv.mean;
        }
    }
}

TEST_CASE("distribution slices at closed-form points", "[family]") {
    auto s = distribution(*build("exp"), 1, 1e-13);
    CHECK(std::fabs(d(s.probs[0]) - std::exp(-1.0)) < 1e-15);
    s = distribution(*build("poly:1,1"), 3, 1e-13);
    REQUIRE(s.size() == 2);
    CHECK(s.probs[0] == xreal(0.25));
    CHECK(s.probs[1] == xreal(0.75));
    CHECK(s.tail_mass_bound == 0);
    s = distribution(*build("geometric"), 0.5, 1e-13);
    for (std::size_t n = 0; n < 60; ++n) CHECK(std::fabs(d(s.probs[n]) - std::ldexp(1.0, -int(n) - 1)) < 1e-30);
}

TEST_CASE("slices carry their mass and respect the tail bound", "[family]") {
    for (const char* m : {"exp", "geometric", "partitions:p=1", "partitions:p=2", "macmahon", "density:a=1,d=3"}) {
        auto f = build(m);
        for (double t : {0.3, 0.6}) {
            auto s = distribution(*f, t, 1e-13);
            xreal mass = 0;
            for (const auto& p : s.probs) {
                CHECK(p >= 0);
                mass += p;
            }
            INFO(m << " t=" << t);
            CHECK(s.tail_mass_bound <= 1e-13);
            CHECK(boost::multiprecision::abs(mass + s.tail_mass_bound - 1) <= 2e-13);
            CHECK(mass <= 1 + xreal(1e-25));
        }
    }
}

TEST_CASE("direct moments at closed-form points", "[family]") {
    auto r = direct_moments(distribution(*build("poly:1,1"), 1, 1e-13), 3);
    CHECK(r.normalized[3] == 0);
    r = direct_moments(distribution(*build("exp"), 1, 1e-13), 4);
    CHECK(std::fabs(d(r.normalized[3]) - 1) < 1e-10);
    CHECK(std::fabs(d(r.normalized[4]) - 4) < 1e-10);
    r = direct_moments(distribution(*build("exp"), 4, 1e-13), 3);
    CHECK(std::fabs(d(r.normalized[3]) - 0.5) < 1e-10);
    // Poisson(2) raw moments are Touchard polynomials: 2, 6, 22, 94
    r = direct_moments(distribution(*build("exp"), 2, 1e-13), 4);
    CHECK(std::fabs(d(r.raw[1]) - 2) < 1e-11);
    CHECK(std::fabs(d(r.raw[2]) - 6) < 1e-11);
    CHECK(std::fabs(d(r.raw[3]) - 22) < 1e-11);
    CHECK(std::fabs(d(r.raw[4]) - 94) < 1e-10);
}

TEST_CASE("direct moments agree with the closed-form mean and variance", "[family]") {
    for (const char* m : {"geometric", "partitions:p=1", "macmahon", "density:a=1,d=3", "expof:poly:0,0,1"}) {
        auto f = build(m);
        for (double t : {0.2, 0.5, 0.8}) {
            INFO(m << " t=" << t);
            const auto mv = mean_variance(*f, t);
            const auto r = direct_moments(distribution(*f, t, 1e-13), 6);
            CHECK(boost::multiprecision::abs(r.mean - mv.mean) <= 1e-10 * mv.mean);
            CHECK(boost::multiprecision::abs(r.variance - mv.variance) <= 1e-10 * mv.variance);
            // Pearson: nu_4 >= nu_3^2 + 1
            CHECK(r.normalized[4] >= r.normalized[3] * r.normalized[3] + 1 - 1e-10);
            CHECK(r.central[2] > 0);
        }
    }
}

TEST_CASE("direct moments validate their order", "[family]") {
    auto s = distribution(*build("exp"), 1, 1e-13);
    CHECK_THROWS_AS(direct_moments(s, 1), validation_error);
    CHECK_THROWS_AS(direct_moments(s, 11), validation_error);
}

TEST_CASE("normalized characteristic function", "[family]") {
    for (const char* m : {"exp", "geometric", "partitions:p=1"}) {
        auto phi = characteristic_normalized(*build(m), 0.5, 0);
        CHECK(std::abs(phi - std::complex<double>(1, 0)) < 1e-15);
    }
    auto phi = characteristic_normalized(*build("exp"), 100, 1);
    CHECK(std::fabs(std::abs(phi) - std::exp(-0.5)) < 0.01);
    // Bernoulli(1/2) normalized to unit variance: E e^{i theta Y} = cos(theta)
    auto b = build("poly:1,1");
    for (double th : {1e-3, 1e-2, 0.1}) {
        auto v = characteristic_normalized(*b, 1, th);
        CHECK(std::fabs(v.real() - (1 - th * th / 2)) < th * th * th);
        CHECK(std::fabs(v.imag()) < th * th * th);
        CHECK(std::fabs(v.real() - std::cos(th)) < 1e-15);
    }
    // Poisson: exp(t (e^{i u} - 1 - i u)) with u = theta/sqrt(t)
    const double t = 3, th = 0.8, u = th / std::sqrt(t);
    const std::complex<double> ref = std::exp(t * (std::exp(std::complex<double>(0, u)) - 1.0 - std::complex<double>(0, u)));
    CHECK(std::abs(characteristic_normalized(*build("exp"), t, th) - ref) < 1e-14);
}

TEST_CASE("distance to the normal law", "[family]") {
    auto s = distribution(*build("poly:1,1"), 1, 1e-13);
    // atoms at -1 and +1 after normalization: the largest gap is Phi(1) - 1/2
    CHECK(std::fabs(ks_distance_to_normal(s) - (special::normal_cdf(1.0) - 0.5)) < 1e-15);
    CHECK(std::fabs(ks_distance_to_normal(s) - 0.3413447) < 1e-7);
    const double big = ks_distance_to_normal(distribution(*build("exp"), 100, 1e-13));
    CHECK(big < 0.05);
    CHECK(big > 0);

    auto f = build("partitions:p=1");
    double prev = 1;
    for (double t : {0.5, 0.7, 0.85, 0.93, 0.95}) {
        const double ks = ks_distance_to_normal(distribution(*f, t, 1e-13));
        CHECK(ks < prev);
        CHECK(ks >= 0);
        CHECK(ks <= 1);
        prev = ks;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("family operations check the evaluation point", "[family]") {
    CHECK_THROWS_AS(mean_variance(*build("geometric"), 1), domain_error);
    CHECK_THROWS_AS(distribution(*build("geometric"), -0.5, 1e-13), domain_error);
}
