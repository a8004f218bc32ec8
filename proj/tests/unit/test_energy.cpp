#include "oracles.hpp"

#include "chfe/energy.hpp"
#include "chfe/errors.hpp"
#include "chfe/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace chfe;

TEST_CASE("entropy of uniform balls against the volume closed form")
{
    CounterRng rng(2024);
    for (int k = 0; k < 50; ++k) {
        const int d = 2 + static_cast<int>(rng.uniform() * 3.0);
        const double c = rng.uniform(0.0, 4.0), q = rng.uniform(0.2, 0.9), R = rng.uniform(0.1, 10.0);
        const ModelManifold m = ModelManifold::constant(d, c);
        const double exact = -std::pow(oracle::ball_volume(d, c, R), 1 - q) / (1 - q);
        CHECK(entropy_term(uniform_ball(m, R), q) == doctest::Approx(exact).epsilon(1e-8));
        CHECK(rhoR_entropy_bound(m, R, q) == doctest::Approx(exact).epsilon(1e-10));
    }
}

TEST_CASE("q outside (0, 1) is rejected")
{
    const RadialDensity rho = uniform_ball(ModelManifold::constant(2, 1.0), 1.0);
    CHECK_THROWS_AS(entropy_term(rho, 1.0), ParameterError);
    CHECK_THROWS_AS(entropy_term(rho, 0.0), ParameterError);
}

TEST_CASE("interaction of a ball is at most h(2R)/2")
{
    const ModelManifold m = ModelManifold::constant(3, 1.0);
    const Potential h = Potential::sinh_power(2.0, 1.0);
    for (double R : {0.3, 1.0, 3.0}) {
        const EnergyBreakdown e = total_energy(uniform_ball(m, R), 0.5, h);
        CHECK(e.interaction <= 0.5 * h(2 * R));
        CHECK(e.total <= rhoR_energy_bound(m, R, 0.5, h) + 1e-9 * std::abs(e.total));
    }
}

TEST_CASE("interaction kernel at s = 0 is h(r)")
{
    const Potential h = Potential::log1p();
    for (double r : {0.1, 1.0, 5.0}) CHECK(interaction_kernel(1.0, 2, h, r, 0.0) == doctest::Approx(h(r)).epsilon(1e-13));
    // symmetric in (r, s)
    CHECK(interaction_kernel(2.0, 3, h, 0.7, 1.9) == doctest::Approx(interaction_kernel(2.0, 3, h, 1.9, 0.7)).epsilon(1e-14));
}

TEST_CASE("spreading scan for log1p on H^2")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const ScanResult s = spreading_scan(m, 0.5, Potential::log1p(), log_spaced(10.0, 100.0, 46));
    CHECK(s.verdict == ScanVerdict::unbounded_below_spreading);
    for (std::size_t i = 1; i < s.bounds.size(); ++i) CHECK(s.bounds[i] < s.bounds[i - 1]);
    CHECK(s.bounds.back() < -1e3);
}

TEST_CASE("spreading scan stays inconclusive for a fast potential")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const ScanResult s = spreading_scan(m, 0.5, Potential::sinh_power(3.0, 1.0), log_spaced(1.0, 50.0, 20));
    CHECK(s.verdict == ScanVerdict::bounded_below_inconclusive);
}

TEST_CASE("blow-up scan for a log-singular potential")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const ScanResult s = blowup_scan(m, 0.5, Potential::power(0.0), log_spaced(1e-3, 1e-100, 40));
    CHECK(s.verdict == ScanVerdict::unbounded_below_blowup);
    const ScanResult t = blowup_scan(m, 0.5, Potential::log1p(), log_spaced(1e-3, 1e-10, 20));
    CHECK(t.verdict == ScanVerdict::bounded_below_inconclusive);
}

TEST_CASE("growth checks classify against their comparators")
{
    const GrowthReport slow = growth_condition_check(Potential::log1p(), NonexistConst{1.0, 0.5, 2});
    CHECK(slow.classification == GrowthClass::vanishing);
    const GrowthReport fast = growth_condition_check(Potential::sinh_power(3.0, 1.0), ExistConst{1.0, 0.5, 2, 3.0});
    CHECK(fast.classification == GrowthClass::bounded_away_from_zero);
    // sinh^3 / e^{3 theta} -> 1/8
    CHECK(fast.liminf_estimate == doctest::Approx(0.125).epsilon(1e-6));
    const GrowthReport var = growth_condition_check(
        Potential::exp_rate(1.0, 1.0), NonexistVar{CurvatureProfile::power(2.0, 0.0), 0.5, 0.1, 0.5, 2});
    CHECK(var.classification == GrowthClass::vanishing);
    CHECK(lambda_threshold(3, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("ratio limit at large theta")
{
    for (auto [lambda, c] : {std::pair{1.0, 1.0}, {2.0, 1.0}, {1.0, 4.0}, {3.5, 0.5}}) {
        const RatioLimit r = ratio_limit_2lambda(lambda, c, 50.0);
        CHECK(r.limit == doctest::Approx(std::pow(2.0, lambda) * std::pow(c, lambda / 2)).epsilon(1e-14));
        CHECK(r.deviation < 1e-6);
    }
}

TEST_CASE("log_spaced endpoints")
{
    const auto v = log_spaced(100.0, 10.0, 5);
    CHECK(v.front() == doctest::Approx(100.0));
    CHECK(v.back() == doctest::Approx(10.0));
    CHECK(v[2] == doctest::Approx(std::sqrt(1000.0)));
}
