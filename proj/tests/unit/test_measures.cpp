#include "oracles.hpp"

#include "chfe/energy.hpp"
#include "chfe/errors.hpp"
#include "chfe/measures.hpp"
#include "chfe/random.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace chfe;

TEST_CASE("uniform ball has unit mass and the closed-form density")
{
    for (int d : {2, 3, 4})
        for (double c : {0.0, 0.5, 2.0}) {
            const ModelManifold m = ModelManifold::constant(d, c);
            const RadialDensity rho = uniform_ball(m, 1.5);
            CHECK(mass(rho) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(rho(0.3) == doctest::Approx(1.0 / oracle::ball_volume(d, c, 1.5)).epsilon(1e-12));
            CHECK(rho(2.0) == 0.0);
        }
}

TEST_CASE("tail mass of a uniform ball is the volume ratio")
{
    const ModelManifold m = ModelManifold::constant(3, 1.0);
    const RadialDensity rho = uniform_ball(m, 4.0, 513);
    for (double R : {0.5, 1.0, 3.0}) {
        const double exact = 1.0 - oracle::ball_volume(3, 1.0, R) / oracle::ball_volume(3, 1.0, 4.0);
        CHECK(tail_mass(rho, R) == doctest::Approx(exact).epsilon(1e-6));
    }
}

TEST_CASE("sinh moment of a uniform ball in H^2")
{
    const double R = 2.0;
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const RadialDensity rho = uniform_ball(m, R);
    // int_B sinh(r) dV = 2 pi int_0^R sinh^2
    const double exact = 2.0 * std::numbers::pi * (std::sinh(2 * R) / 4 - R / 2) / oracle::ball_volume(2, 1.0, R);
    CHECK(sinh_moment(rho, 1.0) == doctest::Approx(exact).epsilon(1e-10));
    CHECK(sinh_moment(rho, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power integral scales like mass^q for uniform balls")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const RadialDensity rho = uniform_ball(m, 1.0);
    const double V = oracle::ball_volume(2, 1.0, 1.0);
    for (double q : {0.2, 0.5, 0.9}) CHECK(power_integral(rho, q) == doctest::Approx(std::pow(V, 1 - q)).epsilon(1e-10));
}

TEST_CASE("density_from_function normalizes")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const RadialDensity rho = density_from_function(m, radial_grid(12.0, 1024), [](double r) { return std::exp(-r * r); });
    CHECK(mass(rho) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rho(0.0) > rho(1.0));
}

TEST_CASE("centred clouds have zero tangent mean")
{
    for (bool eq : {true, false}) {
        const DiscreteMeasure mu = make_centred_cloud(3, 1.0, 200, 11, eq, 0.7);
        CHECK(mu.total_weight() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(mu.tangent_mean().norm() < 1e-14);
        CHECK(mu.centred);
    }
}

TEST_CASE("cloud distances match the hyperboloid model in H^2")
{
    const DiscreteMeasure mu = make_centred_cloud(2, 1.0, 30, 5, true, 2.0);
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < mu.size(); ++j) {
            const Eigen::VectorXd a = mu.log_points.row(i), b = mu.log_points.row(j);
            const double ra = a.norm(), rb = b.norm();
            const double phi = std::abs(std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b)));
            CHECK(mu.distance(i, j) == doctest::Approx(oracle::hyperboloid_distance(1.0, ra, rb, phi)).epsilon(1e-9).scale(1e-7));
        }
}

TEST_CASE("potentials evaluate their closed forms")
{
    CHECK(Potential::log1p()(2.0) == doctest::Approx(std::log(3.0)));
    CHECK(Potential::power(2.0)(3.0) == doctest::Approx(4.5));
    CHECK(Potential::power(0.0)(std::exp(1.0)) == doctest::Approx(1.0));
    CHECK(Potential::exp_rate(2.0, 4.0)(1.0) == doctest::Approx(std::exp(4.0) - 1));
    CHECK(Potential::sinh_power(3.0, 1.0)(1.5) == doctest::Approx(std::pow(std::sinh(1.5), 3)));
    CHECK(Potential::sinh_power(2.0, 0.0)(1.5) == doctest::Approx(2.25));
    CHECK(Potential::double_exp(1.0, 0.5)(2.0) == doctest::Approx(std::exp(std::exp(1.0)) - std::exp(1.0)));
    CHECK(Potential::sinh_power(3.0, 1.0).log_eval(1000.0) == doctest::Approx(3 * (1000 - std::log(2.0))));
    CHECK(Potential::power(0.0).singular_at_origin());
    CHECK_FALSE(Potential::log1p().singular_at_origin());
    CHECK(Potential::sinh_power(2.0, 1.0).sampled_convex(5.0));
    CHECK_THROWS_AS(Potential::tabulated({0, 1, 2, 3}, {0, 2, 1, 3}, true).validate(3.0), ParameterError);
}

TEST_CASE("interaction energy of a uniform ball against Monte Carlo")
{
    const double c = 1.0, R = 1.0;
    const ModelManifold m = ModelManifold::constant(2, c);
    const Potential h = Potential::power(2.0);
    const double E = interaction_energy(uniform_ball(m, R), h);
    CounterRng rng(99);
    auto draw_r = [&] { return std::acosh(1.0 + rng.uniform() * (std::cosh(R) - 1.0)); };
    const int N = 200000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < N; ++k) {
        const double a = draw_r(), b = draw_r(), phi = rng.uniform(0.0, 2 * std::numbers::pi);
        const double v = 0.5 * h(oracle::hyperboloid_distance(c, a, b, std::abs(std::remainder(phi, 2 * std::numbers::pi))));
        s += v;
        s2 += v * v;
    }
    const double mean = s / N, se = std::sqrt((s2 / N - mean * mean) / N);
    CHECK(std::abs(E - mean) < 5 * se);
}

TEST_CASE("kernel matrix interaction agrees with direct quadrature")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const Potential h = Potential::sinh_power(2.0, 1.0);
    const RadialDensity rho = density_from_function(m, uniform_grid(4.0, 257), [](double r) { return std::exp(-2 * r); }, true);
    const KernelMatrix K(m, rho.r, h, 64);
    const double direct = interaction_energy(rho, h);
    CHECK(interaction_energy(rho, K) == doctest::Approx(direct).epsilon(1e-4));
    double W = 0.0;
    for (Eigen::Index i = 0; i < K.weights().size(); ++i) W += K.weights()[i] * rho.rho[i];
    CHECK(W == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("cloud interaction energy is the double sum")
{
    const DiscreteMeasure mu = make_centred_cloud(2, 1.0, 40, 8, false, 1.0);
    const Potential h = Potential::log1p();
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < mu.size(); ++j) s += 0.5 * mu.weights[i] * mu.weights[j] * h(mu.distance(i, j));
    CHECK(interaction_energy(mu, h) == doctest::Approx(s).epsilon(1e-13));
}
