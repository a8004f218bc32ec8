#include "chfe/errors.hpp"
#include "chfe/groundstate.hpp"

#include <doctest.h>

#include <cmath>

using namespace chfe;

TEST_CASE("multiplier solve normalizes and inverts the FOC map")
{
    const int n = 50;
    Eigen::VectorXd V(n), W(n);
    for (int i = 0; i < n; ++i) {
        V[i] = 0.3 + 0.05 * i * i;
        W[i] = 0.02 * (1 + i);
    }
    const double q = 0.5;
    const MultiplierSolve s = solve_multiplier(V, W, q);
    CHECK(W.dot(s.density) == doctest::Approx(1.0).epsilon(1e-10));
    for (int i = 0; i < n; ++i) {
        // (q/(q-1)) T^{q-1} + V = lambda
        CHECK(q / (q - 1) * std::pow(s.density[i], q - 1) + V[i] == doctest::Approx(s.lambda).epsilon(1e-9));
    }
}

TEST_CASE("minimizer on a coarse grid reaches the first-order condition")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const Potential h = Potential::sinh_power(3.0, 1.0);
    MinimizeOptions o;
    o.grid_size = 256;
    o.angular_nodes = 32;
    o.foc_tol = 1e-6;
    const MinimizerResult r = minimize_radial(m, 0.5, h, std::nullopt, o);
    CHECK(r.converged);
    CHECK(r.foc_residual < 1e-6);
    CHECK(mass(r.density) == doctest::Approx(1.0).epsilon(1e-8));
    // energy never increases along the run
    for (std::size_t i = 1; i < r.history.size(); ++i)
        CHECK(r.history[i].energy <= r.history[i - 1].energy + 1e-14 * std::abs(r.history[i - 1].energy));
    // the minimizer is radially decreasing
    for (std::size_t i = 1; i < r.density.size(); ++i) CHECK(r.density.rho[i] <= r.density.rho[i - 1] * (1 + 1e-12));
    const KernelMatrix K(m, r.density.r, h, 32);
    CHECK(foc_residual(r.density, 0.5, K, r.lagrange_multiplier) == doctest::Approx(r.foc_residual).epsilon(1e-9));
    // every uniform ball is worse
    for (double R : {0.3, 0.8, 1.5}) CHECK(r.energy.total <= total_energy(uniform_ball(m, R), 0.5, h).total);
}

TEST_CASE("minimizer refuses nonexistence regimes")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    MinimizeOptions o;
    o.grid_size = 64;
    CHECK_THROWS_AS(check_existence_regime(m, 0.5, Potential::log1p(), o), GrowthConditionError);
    CHECK_THROWS_AS(check_existence_regime(m, 0.5, Potential::power(0.0), o), GrowthConditionError);
    o.lambda = 0.5;
    CHECK_THROWS_AS(check_existence_regime(m, 0.5, Potential::sinh_power(3.0, 1.0), o), GrowthConditionError);
    o.lambda.reset();
    CHECK(check_existence_regime(m, 0.5, Potential::sinh_power(3.0, 1.0), o) == doctest::Approx(3.0));
    CHECK(infer_growth_rate(Potential::exp_rate(2.0, 4.0), 1.0) == doctest::Approx(4.0));
}

TEST_CASE("W1 to the pole of a uniform ball")
{
    const ModelManifold m = ModelManifold::constant(2, 0.0);
    // E|x| = 2R/3 in the Euclidean disc
    CHECK(wasserstein1_to_pole(uniform_ball(m, 3.0)) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("probe energies are the uniform-ball energies")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const Potential h = Potential::sinh_power(3.0, 1.0);
    const ProbeComparison p = probe_energies(m, 0.5, h, 5, 0.1, 2.0, 129, 32);
    REQUIRE(p.R.size() == 5);
    for (std::size_t i = 0; i < p.R.size(); ++i) {
        CHECK(p.energy[i] == doctest::Approx(total_energy(uniform_ball(m, p.R[i], 129), 0.5, h, {32, 1}).total).epsilon(1e-12));
        CHECK(p.best_energy <= p.energy[i]);
    }
}
