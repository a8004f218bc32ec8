#include "oracles.hpp"

#include "chfe/errors.hpp"
#include "chfe/geometry.hpp"
#include "chfe/quadrature.hpp"
#include "chfe/random.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace chfe;

TEST_CASE("gauss-legendre integrates polynomials exactly")
{
    for (int n : {2, 5, 16, 32}) {
        const quad::Rule r = quad::gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
            const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("gegenbauer rule averages against (1-u^2)^a")
{
    // a = 1/2: E[u^2] = 1/4 and E[u^4] = 1/8 under the semicircle
    const quad::Rule r = quad::gauss_gegenbauer(12, 0.5);
    double m2 = 0.0, m4 = 0.0, m0 = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        m0 += r.weights[i];
        m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
        m4 += r.weights[i] * std::pow(r.nodes[i], 4);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m2 == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(0.125).epsilon(1e-13));
}

TEST_CASE("adaptive integration against antiderivatives")
{
    auto r1 = quad::integrate([](double x) { return std::exp(-x) * std::sin(3 * x); }, 0.0, 20.0, 1e-12);
    const double exact1 = (3.0 - std::exp(-20.0) * (std::sin(60.0) + 3 * std::cos(60.0))) / 10.0;
    CHECK(r1.converged);
    CHECK(r1.value == doctest::Approx(exact1).epsilon(1e-11));
    // log integral of e^{x} on [0, 800] = log(e^800 - 1)
    auto r2 = quad::integrate_log([](double x) { return x; }, 0.0, 800.0, 1e-12);
    CHECK(r2.value == doctest::Approx(800.0).epsilon(1e-13));
}

TEST_CASE("constant profile matches sinh closed form")
{
    for (double c : {0.25, 1.0, 4.0}) {
        const PsiSolution psi = solve_psi(CurvatureProfile::constant(c), 10.0);
        for (int i = 0; i <= 400; ++i) {
            const double t = 10.0 * i / 400.0;
            const double exact = std::sinh(std::sqrt(c) * t) / std::sqrt(c);
            CHECK(std::abs(psi.value(t) - exact) <= 1e-8 * std::max(exact, 1e-300) + 1e-300);
        }
    }
}

TEST_CASE("constant profile invariant on a long range in log mode")
{
    const double c = 4.0;
    const PsiSolution psi = solve_psi(CurvatureProfile::constant(c), 400.0);
    CHECK(psi.log_start < psi.theta.size());
    for (double t : {50.0, 150.0, 399.0}) {
        const double exact = std::sqrt(c) * t - std::log(2.0 * std::sqrt(c)) + std::log1p(-std::exp(-4.0 * t));
        CHECK(psi.log_value(t) == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("linear profile matches Airy functions")
{
    const double a = 1.0, b = 1.0;
    const PsiSolution psi = solve_psi(CurvatureProfile::tabulated({0, 1, 2, 3, 4, 5, 6}, {1, 2, 3, 4, 5, 6, 7}, true, true), 6.0);
    for (double t : {0.5, 1.0, 2.5, 4.0, 6.0}) {
        const double exact = oracle::psi_airy(a, b, t);
        CHECK(psi.value(t) == doctest::Approx(exact).epsilon(1e-7));
    }
}

TEST_CASE("power profile c = 1 + theta^2 matches erf closed form")
{
    const PsiSolution psi = solve_psi(CurvatureProfile::power(2.0, 1.0), 8.0);
    for (double t : {0.1, 1.0, 3.0, 5.0, 8.0}) CHECK(psi.value(t) == doctest::Approx(oracle::psi_gauss(t)).epsilon(1e-8));
}

TEST_CASE("upper bound and relaxed lower bound hold on random profiles")
{
    CounterRng rng(7);
    for (int k = 0; k < 30; ++k) {
        const CurvatureProfile prof = k % 2 ? CurvatureProfile::power(rng.uniform(0.5, 2.0), rng.uniform(0.2, 2.0))
                                            : CurvatureProfile::exponential(rng.uniform(0.1, 0.5), rng.uniform(0.5, 2));
        const PsiSolution psi = solve_psi(prof, 6.0);
        for (double t : {0.5, 2.0, 4.0, 6.0}) {
            CHECK(psi.log_value(t) <= log_psi_upper_bound(prof, t) + 1e-9);
            const PsiLowerBound lb = psi_lower_bound(prof, 0.1, 0.5, t, psi);
            CHECK(lb.holds);
        }
    }
}

TEST_CASE("sandwich slope condition flags the failing pivots")
{
    const CurvatureProfile prof = CurvatureProfile::power(2.0, 1.0);
    const PsiSolution psi = solve_psi(prof, 5.0);
    const PsiSandwich s = psi_sandwich(prof, 3.0, psi, 3.1);
    CHECK_FALSE(s.slope_condition);
    // the claimed lower bound exceeds psi here
    CHECK(s.log_bound > std::log(oracle::psi_gauss(3.1)));
    const CurvatureProfile flat = CurvatureProfile::constant(2.0);
    const PsiSolution psi2 = solve_psi(flat, 5.0);
    for (double t : {0.5, 2.0, 4.5}) {
        const PsiSandwich s2 = psi_sandwich(flat, 2.0, psi2, t);
        CHECK(s2.slope_condition);
        if (t >= 2.0)
            CHECK(psi2.log_value(t) >= s2.log_bound - 1e-9);
        else
            CHECK(psi2.log_value(t) <= s2.log_bound + 1e-9);
    }
}

TEST_CASE("invalid profiles are rejected")
{
    CHECK_THROWS_AS(CurvatureProfile::constant(-1.0)(0.0), InvalidProfile);
    CHECK_THROWS_AS(solve_psi(CurvatureProfile::constant(-1.0), 1.0), InvalidProfile);
    const CurvatureProfile t = CurvatureProfile::tabulated({0, 1, 2, 3}, {1, 2, 3, 4}, true, true);
    CHECK_THROWS_AS(CurvatureProfile::tabulated({0, 1, 2}, {1, 2, 3}, true, true), InvalidProfile);
    CHECK_THROWS_AS(t(3.5), InvalidProfile);
}

TEST_CASE("space-form distance matches the hyperboloid model")
{
    CounterRng rng(3);
    for (int k = 0; k < 2000; ++k) {
        const double c = rng.uniform(0.1, 4.0);
        const double r = rng.uniform(0.0, 8.0), s = rng.uniform(0.0, 8.0), phi = rng.uniform(0.0, std::numbers::pi);
        const double d = hyperbolic_distance(c, r, s, phi);
        const double ref = oracle::hyperboloid_distance(c, r, s, phi);
        CHECK(d == doctest::Approx(ref).epsilon(1e-9).scale(1e-6));
        CHECK(d >= chordal_lower_bound(r, s, phi) * (1 - 1e-12));
    }
    CHECK(hyperbolic_distance(1.0, 2.0, 2.0, 0.0) == 0.0);
    CHECK(hyperbolic_distance(1.0, 300.0, 400.0, std::numbers::pi) == doctest::Approx(700.0).epsilon(1e-14));
    CHECK(hyperbolic_distance(0.0, 3.0, 4.0, std::numbers::pi / 2) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("ball volumes against closed forms")
{
    for (int d : {2, 3, 4})
        for (double c : {0.0, 0.01, 1.0, 4.0})
            for (double R : {0.1, 1.0, 5.0}) {
                const Interval v = ball_volume(ModelManifold::constant(d, c), R);
                const double exact = oracle::ball_volume(d, c, R);
                CHECK(v.lower == doctest::Approx(exact).epsilon(1e-10));
                CHECK(v.upper == doctest::Approx(exact).epsilon(1e-10));
            }
}

TEST_CASE("bound manifolds bracket the exact ones")
{
    const CurvatureProfile lo = CurvatureProfile::constant(1.0), hi = CurvatureProfile::constant(2.0);
    const ModelManifold m = ModelManifold::bounds(3, hi, lo, 10.0);
    for (double R : {0.5, 2.0, 6.0}) {
        const Interval v = ball_volume(m, R);
        CHECK(v.lower == doctest::Approx(oracle::ball_volume(3, 1.0, R)).epsilon(1e-9));
        CHECK(v.upper == doctest::Approx(oracle::ball_volume(3, 2.0, R)).epsilon(1e-9));
        const Interval j = jacobian_bounds(m, R);
        CHECK(j.lower <= j.upper);
    }
    CHECK_THROWS_AS(m.warp(1.0), UnsupportedManifold);
}
