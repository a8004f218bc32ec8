#include "chfe/campaigns.hpp"
#include "chfe/errors.hpp"
#include "chfe/inequalities.hpp"

#include <doctest.h>

#include <cmath>

using namespace chfe;

TEST_CASE("CL constants reject invalid parameters")
{
    CHECK_THROWS_AS(cl_constants(1.0, 0.5, 1.0, 2), ParameterError); // lambda = threshold
    CHECK_THROWS_AS(cl_constants(3.0, 1.2, 1.0, 2), ParameterError);
    CHECK_THROWS_AS(cl_constants(3.0, 0.5, 0.0, 2), ParameterError);
    CHECK_NOTHROW(cl_constants(1.01, 0.5, 1.0, 2));
}

TEST_CASE("optimal radius minimizes the two-term bound")
{
    const CLConstants k = cl_constants(3.0, 0.5, 1.0, 3);
    for (double mom : {0.5, 3.0, 1e4}) {
        const double R = optimal_R(k, 1.0, mom);
        const double best = nonopt_rhs(k, R, 1.0, mom);
        CHECK(best <= nonopt_rhs(k, R * 1.05, 1.0, mom));
        CHECK(best <= nonopt_rhs(k, R * 0.95, 1.0, mom));
        // the closed form C1 m^{(1-p)q} mom^{pq} is the value at the optimum
        CHECK(best == doctest::Approx(k.C1 * std::pow(mom, k.p * k.q)).epsilon(1e-9));
    }
}

TEST_CASE("CL ratio is invariant under mass scaling")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    CounterRng rng(5, 1);
    const RadialDensity rho = random_radial_density(m, rng);
    const InequalityReport a = verify_carlson_levin(rho, 2.5, 0.6);
    const InequalityReport b = verify_carlson_levin(rho.scaled(7.0), 2.5, 0.6);
    CHECK(a.passed);
    CHECK(a.ratio == doctest::Approx(b.ratio).epsilon(1e-12));
}

TEST_CASE("CL holds on random densities and is tight-ish for uniform balls")
{
    const ModelManifold m = ModelManifold::constant(3, 2.0);
    for (std::uint64_t k = 0; k < 40; ++k) {
        CounterRng rng(77, k);
        const InequalityReport r = verify_carlson_levin(random_radial_density(m, rng), 3.0, 0.5);
        CHECK(r.ratio <= 1 + 1e-6);
    }
    const InequalityReport ball = verify_carlson_levin(uniform_ball(m, 1.0), 3.0, 0.5);
    CHECK(ball.ratio > 0.05);
}

TEST_CASE("general CL with a constant profile reproduces the constant case")
{
    const double c = 1.5;
    const ModelManifold m = ModelManifold::constant(2, c);
    const PsiSolution psi = solve_psi(CurvatureProfile::constant(c), 10.0);
    CounterRng rng(9, 4);
    const RadialDensity rho = random_radial_density(m, rng);
    const InequalityReport a = verify_carlson_levin(rho, 2.0, 0.5);
    const InequalityReport b = verify_carlson_levin_general(rho, 2.0, 0.5, psi);
    CHECK(a.constant_used == doctest::Approx(b.constant_used).epsilon(1e-12));
    CHECK(a.ratio == doctest::Approx(b.ratio).epsilon(1e-10));
}

TEST_CASE("general CL on a variable-curvature model")
{
    const CurvatureProfile prof = CurvatureProfile::power(2.0, 1.0);
    const ModelManifold m = ModelManifold::model(2, prof, 6.0);
    for (std::uint64_t k = 0; k < 10; ++k) {
        CounterRng rng(3, k);
        const RadialDensity rho = random_radial_density(m, rng, 400, 5.0);
        CHECK(verify_carlson_levin_general(rho, 2.0, 0.5, m.psi_m()).ratio <= 1 + 1e-6);
    }
    CHECK_THROWS_AS(cl_constants_general(2.0, 0.5, CurvatureProfile::power(2.0, 0.0), 2), ParameterError);
}

TEST_CASE("convexity inequality on centred clouds")
{
    const Potential H = Potential::sinh_power(2.0, 1.0);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const DiscreteMeasure mu = make_centred_cloud(2 + static_cast<int>(s % 2), 1.0, 150, s, s % 3 == 0, 1.2);
        const InequalityReport r = verify_convexity(mu, H);
        CHECK(r.passed);
        CHECK(verify_convexity_unnormalized(mu.scaled(3.0), H).passed);
    }
}

TEST_CASE("convexity needs centring")
{
    const DiscreteMeasure mu = make_centred_cloud(2, 1.0, 100, 1, true, 0.1);
    Eigen::VectorXd off(2);
    off << 2.0, 0.0;
    const DiscreteMeasure far = mu.shifted(off);
    CHECK_THROWS_AS(verify_convexity(far, Potential::sinh_power(2.0, 1.0)), PreconditionError);
    CHECK_FALSE(verify_convexity(far, Potential::sinh_power(2.0, 1.0), 1e-9, false).passed);
}

TEST_CASE("tail bound is Markov's inequality")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const RadialDensity rho = uniform_ball(m, 3.0);
    for (double R : {0.5, 1.0, 2.5}) {
        const TailBound t = tightness_tail_bound(rho, 2.0, 1.0, R);
        CHECK(t.holds);
        CHECK(t.bound == doctest::Approx(sinh_moment(rho, 2.0) / std::pow(std::sinh(R), 2)).epsilon(1e-12));
    }
}

TEST_CASE("energy lower bound minorant holds pointwise")
{
    const Potential h = Potential::sinh_power(3.0, 1.0);
    const EnergyLowerBound b = energy_lower_bound_constants(0.5, h, 3.0, 1.0, 2);
    CHECK(b.gamma1 > 0.0);
    for (double t = 0.0; t <= 30.0; t += 0.25) CHECK(h(t) >= b.gamma1 * std::pow(std::sinh(t), 3) + b.gamma2 - 1e-9 * h(t));
    CHECK_THROWS_AS(energy_lower_bound_constants(0.5, Potential::log1p(), 3.0, 1.0, 2), GrowthConditionError);
}

TEST_CASE("reversed HLS on a Euclidean density")
{
    const ModelManifold m = ModelManifold::constant(2, 0.0);
    CounterRng rng(12, 0);
    const ReversedHLSReport r = reversed_hls_check(random_radial_density(m, rng, 129), 2.0, 0.5, {1e-1, 1e-2, 1e-3, 1e-4}, 1e-6, 32);
    CHECK(r.cauchy);
    for (std::size_t i = 1; i < r.differences.size(); ++i) CHECK(r.differences[i] < r.differences[i - 1]);
    for (const auto& f : r.finite_c) CHECK(f.passed);
    CHECK(r.limit.passed);
}
