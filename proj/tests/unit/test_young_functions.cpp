#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "orlicz_ot/young_functions.hpp"

using namespace orlicz_ot;

TEST_CASE("builtin conjugates at reference points") {
    const Regularizer quad = make_power(2.0);
    CHECK(quad.conj(3.0) == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(quad.conj(-5.0) == 0.0);
    const Regularizer entropy = make_entropy();
    CHECK(entropy.conj(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(entropy.conj(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(entropy.phi(0.0) == 0.0);
    CHECK(entropy.phi(std::exp(-1.0)) == doctest::Approx(-std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("closed-form conjugates agree with a ternary-search oracle") {
    for (const Regularizer& reg : testgen::regularizer_pool()) {
        CAPTURE(reg.name());
        const double r0 = reg.slope_threshold();
        const double lo = std::isfinite(r0) ? r0 - 5.0 : -5.0;
        for (double r = lo; r <= lo + 15.0; r += 0.5) {
            const double expect = oracle::conjugate([&](double t) { return reg.phi(t); }, r);
            CHECK(reg.conj(r) == doctest::Approx(expect).epsilon(1e-7).scale(1.0));
        }
    }
}

TEST_CASE("conjugate derivative matches finite differences") {
    for (const Regularizer& reg : testgen::regularizer_pool()) {
        CAPTURE(reg.name());
        const double r0 = reg.slope_threshold();
        const double lo = std::isfinite(r0) ? r0 + 0.1 : -3.0;
        for (double r = lo; r < lo + 6.0; r += 0.37) {
            const double h = 1e-6;
            const double fd = (reg.conj(r + h) - reg.conj(r - h)) / (2.0 * h);
            CHECK(reg.conj_deriv(r) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
    }
}

TEST_CASE("conj equals -Phi(0) below the slope threshold") {
    const Regularizer tsallis = make_tsallis(2.0);
    CHECK(tsallis.slope_threshold() == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(tsallis.conj(-1.5) == doctest::Approx(-tsallis.phi_at_zero()));
    CHECK(make_power(3.0).slope_threshold() == 0.0);
    CHECK(make_entropy().slope_threshold() == -std::numeric_limits<double>::infinity());
}

TEST_CASE("make_builtin rejects out-of-range parameters") {
    CHECK_THROWS_AS(make_power(1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_power(0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_tsallis(1.0), std::invalid_argument);
    CHECK_NOTHROW(make_builtin(Family::power, 1.25));
}

TEST_CASE("ext_value extends by +infinity") {
    const Regularizer quad = make_power(2.0);
    CHECK(ext_value(quad, -1.0) == std::numeric_limits<double>::infinity());
    CHECK(ext_value(quad, 2.0) == 2.0);
    CHECK(ext_value(make_entropy(), 0.0) == 0.0);
}

TEST_CASE("numeric_legendre reference values") {
    CHECK(numeric_legendre(make_power(2.0), 3.0) == doctest::Approx(4.5).epsilon(1e-8));
    CHECK(numeric_legendre(make_entropy(), 0.0) == doctest::Approx(0.367879441171).epsilon(1e-8));
    const Regularizer tsallis = make_tsallis(1.5);
    CHECK(numeric_legendre(tsallis, tsallis.slope_threshold() - 1.0) ==
          doctest::Approx(-tsallis.phi_at_zero()).scale(1.0));
}

TEST_CASE("numeric_legendre flags a non-superlinear function") {
    const Regularizer linear = make_custom({{0.0, 1.0}, {1.0, 1.0}}, false);
    CHECK_THROWS_AS(numeric_legendre(linear, 2.0), std::domain_error);
}

TEST_CASE("complementary functions") {
    SUBCASE("p = 2 is self-complementary") {
        const Regularizer psi = complementary(make_power(2.0));
        for (double t : {0.0, 0.3, 1.0, 2.5, 7.0}) CHECK(psi.phi(t) == doctest::Approx(t * t / 2.0).epsilon(1e-9));
    }
    SUBCASE("p = 3 gives the q = 3/2 power") {
        const Regularizer psi = complementary(make_power(3.0));
        for (double t : {0.1, 0.5, 1.0, 3.0, 10.0}) {
            CHECK(psi.phi(t) == doctest::Approx(std::pow(t, 1.5) / 1.5).epsilon(1e-8));
        }
    }
    SUBCASE("step density: psi = 1 on (0, 1], Psi(t) = t there") {
        const Regularizer step = make_custom({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, false);
        const Regularizer psi = complementary(step);
        CHECK(psi.density(0.5) == doctest::Approx(1.0));
        CHECK(psi.density(1.0) == doctest::Approx(1.0));
        CHECK(psi.phi(0.5) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(psi.phi(1.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("quasi-Young input is rejected") { CHECK_THROWS_AS(complementary(make_entropy()), std::invalid_argument); }
}

TEST_CASE("shifted positive part") {
    const Regularizer quad = make_power(2.0);
    const Regularizer same = shifted_positive_part(quad, 0.0);
    for (double t : {0.0, 0.5, 2.0, 9.0}) CHECK(same.phi(t) == doctest::Approx(quad.phi(t)));
    const Regularizer shifted = shifted_positive_part(quad, 1.0);
    CHECK(shifted.phi(2.0) == doctest::Approx(1.5));
    CHECK(shifted.phi(0.5) == 0.0);
    CHECK(shifted.density(0.5) == 0.0);
    CHECK(shifted.density(2.0) == doctest::Approx(2.0));
    CHECK(check_invariants(shifted).empty());
}

TEST_CASE("Luxemburg norm reference values") {
    const std::vector<double> two(4, 2.0), quarter(4, 0.25);
    CHECK(luxemburg_norm(make_power(2.0), two, quarter) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    const std::vector<double> zero(4, 0.0);
    CHECK(luxemburg_norm(make_entropy(), zero, quarter) == 0.0);
    // (e / g) log(e / g) = 1 at g = e / u with u log u = 1.
    const double u = oracle::luxemburg([](double t) { return t > 0.0 ? t * std::log(t) : 0.0; }, {1.0}, {1.0});
    const std::vector<double> e{std::exp(1.0)}, one{1.0};
    const double norm = luxemburg_norm(make_entropy(), e, one);
    CHECK(norm == doctest::Approx(std::exp(1.0) * u).epsilon(1e-11));
    CHECK(norm == doctest::Approx(1.541655).epsilon(1e-6));
}

TEST_CASE("Luxemburg norm agrees with the bisection oracle") {
    testgen::Rng rng(11);
    for (int c = 0; c < 200; ++c) {
        const Regularizer& reg = testgen::pick(rng, testgen::regularizer_pool());
        const std::size_t n = testgen::index(rng, 1, 10);
        std::vector<double> f = testgen::values(rng, n, 8.0);
        const auto w = testgen::masses(rng, n, testgen::uniform(rng, 0.2, 3.0));
        const double bound = testgen::uniform(rng, 0.5, 4.0);
        CAPTURE(reg.name());
        const double expect = oracle::luxemburg([&](double t) { return reg.phi(t); }, f, w, bound);
        CHECK(luxemburg_norm(reg, f, w, bound) == doctest::Approx(expect).epsilon(1e-10).scale(1e-12));
    }
}

TEST_CASE("scaled conjugate: the transform of gamma conj(r / gamma) is gamma Phi") {
    for (const Regularizer& reg : {make_entropy(), make_power(2.0), make_power(3.0), make_tsallis(1.5)}) {
        for (double gamma : {0.1, 1.0, 10.0}) {
            for (double t : {0.2, 1.0, 2.5}) {
                // sup_r (t r - gamma conj(r / gamma)), concave in r.
                auto g = [&](double r) { return t * r - gamma * reg.conj(r / gamma); };
                double a = -50.0 * gamma, b = 50.0 * gamma;
                for (int it = 0; it < 300; ++it) {
                    const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
                    if (g(m1) < g(m2)) {
                        a = m1;
                    } else {
                        b = m2;
                    }
                }
                CAPTURE(reg.name());
                CHECK(g(0.5 * (a + b)) == doctest::Approx(gamma * reg.phi(t)).epsilon(1e-4).scale(1.0));
            }
        }
    }
}

TEST_CASE("shifted and unshifted norms are equivalent on a fixed corpus") {
    const Regularizer quad = make_power(2.0);
    const Regularizer shifted = shifted_positive_part(quad, 1.0);
    testgen::Rng rng(12);
    for (int c = 0; c < 100; ++c) {
        const std::size_t n = testgen::index(rng, 1, 10);
        std::vector<double> f = testgen::values(rng, n, 20.0);
        f[0] = testgen::uniform(rng, 0.5, 20.0);
        const auto w = testgen::masses(rng, n);
        const double a = luxemburg_norm(quad, f, w), b = luxemburg_norm(shifted, f, w);
        REQUIRE(std::isfinite(a));
        REQUIRE(std::isfinite(b));
        CHECK(a / b <= 100.0);
        CHECK(b / a <= 100.0);
    }
}

TEST_CASE("invariant checks") {
    for (const Regularizer& reg : testgen::regularizer_pool()) {
        CAPTURE(reg.name());
        const auto v = check_invariants(reg);
        CHECK(v.empty());
    }
    CHECK(phi_over_t_monotone(make_power(2.0)));
    CHECK(phi_over_t_monotone(make_entropy()));
    CHECK_THROWS(make_custom({{0.0, 0.0}, {1.0, 1.0}, {2.0, 1.0}}));  // flat tail: not superlinear
}

TEST_CASE("superlinearity: Phi(t)/t increases across decades") {
    for (const Regularizer& reg : testgen::regularizer_pool()) {
        const double a = reg.phi(1e2) / 1e2, b = reg.phi(1e4) / 1e4, c = reg.phi(1e6) / 1e6;
        CAPTURE(reg.name());
        CHECK(a < b);
        CHECK(b < c);
    }
}

TEST_CASE("custom table with a jump is left-continuous") {
    const Regularizer reg = make_custom({{0.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}, {2.0, 4.0}});
    CHECK(reg.density(1.0) == doctest::Approx(1.0));
    CHECK(reg.density(1.0 + 1e-9) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(reg.phi(1.0) == doctest::Approx(0.5));
    CHECK(reg.phi(2.0) == doctest::Approx(0.5 + 3.0));
}
