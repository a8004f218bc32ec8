#pragma once

// Radial densities, centred point clouds and interaction potentials.

#include "chfe/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace chfe {

/// Radii 0 = r_0 < r_1 < ... < r_{n-1} = r_max: geometric spacing from r_max * 1e-6 up to
/// r_max * split, then uniform. n >= 3.
std::vector<double> radial_grid(double r_max, std::size_t n = 2048, double split = 0.05);
/// Uniform grid on [0, r_max].
std::vector<double> uniform_grid(double r_max, std::size_t n);

/// Density w.r.t. Riemannian volume, piecewise linear in r on the grid.
/// With compact_support the density vanishes beyond the last node (the jump radius);
/// otherwise the grid is a truncation and moments run a tail test.
struct RadialDensity {
    ModelManifold manifold = ModelManifold::constant(2, 0.0);
    std::vector<double> r;
    std::vector<double> rho;
    bool compact_support = true;

    RadialDensity() = default;
    RadialDensity(ModelManifold m, std::vector<double> r, std::vector<double> rho, bool compact = true);

    double operator()(double radius) const;
    double r_max() const { return r.back(); }
    std::size_t size() const { return r.size(); }
    RadialDensity scaled(double t) const;
};

/// Gauss points of every grid cell with weights d w(d) psi^{d-1} folded in,
/// so sum_k w_k f(x_k) approximates int f dV for radial f. Needs an exact manifold.
struct RadialQuadrature {
    std::vector<double> x;
    std::vector<double> w;
    std::vector<std::size_t> cell;
    std::vector<double> t; ///< local coordinate in [0, 1] inside the cell

    static RadialQuadrature build(const ModelManifold& manifold, const std::vector<double>& r, int order = 8);
    /// Value of the grid-linear interpolant of `values` at every point.
    std::vector<double> interpolate(const std::vector<double>& values) const;
};

/// Hat-function node weights W_i = int phi_i dV on the grid (exact manifolds).
std::vector<double> node_weights(const ModelManifold& manifold, const std::vector<double>& r);

RadialDensity uniform_ball(const ModelManifold& manifold, double R, std::size_t grid_size = 257);
/// Density proportional to f(r) on the given grid, normalized to mass 1.
RadialDensity density_from_function(const ModelManifold& manifold, const std::vector<double>& r,
                                    const std::function<double(double)>& f, bool compact_support = false);

double mass(const RadialDensity& rho);
RadialDensity normalize(const RadialDensity& rho);

/// int g(r) rho dV with a truncation tail test; +inf if the tail does not settle.
double radial_moment(const RadialDensity& rho, const std::function<double(double)>& log_weight);
/// int (sinh(sqrt(c) r)/sqrt(c))^lambda rho dV with c the manifold curvature (or c_sinh if given).
double sinh_moment(const RadialDensity& rho, double lambda);
double sinh_moment(const RadialDensity& rho, double lambda, double c_sinh);
/// int psi(r)^lambda rho dV.
double psi_moment(const RadialDensity& rho, double lambda, const PsiSolution& psi);
/// int rho^q dV.
double power_integral(const RadialDensity& rho, double q);
/// mass of {r >= R}.
double tail_mass(const RadialDensity& rho, double R);

/// Weighted cloud exp_o(v_i). Rows of log_points are the tangent vectors v_i.
struct DiscreteMeasure {
    int dim = 2;
    double c = 0.0;
    Eigen::MatrixXd log_points;
    Eigen::VectorXd weights;
    bool centred = false;

    std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
    double total_weight() const { return weights.sum(); }
    double radius(std::size_t i) const { return log_points.row(static_cast<Eigen::Index>(i)).norm(); }
    /// Geodesic distance between points i and j.
    double distance(std::size_t i, std::size_t j) const;
    /// sum_i w_i v_i
    Eigen::VectorXd tangent_mean() const;
    DiscreteMeasure scaled(double t) const;
    DiscreteMeasure shifted(const Eigen::VectorXd& offset) const;
};

/// n tangent vectors v_i ~ N(0, scale^2 I), weights equal or uniform in [0.5, 1.5] before
/// normalization, then the weighted mean is subtracted so sum w_i v_i = 0.
DiscreteMeasure make_centred_cloud(int dim, double c, std::size_t n, std::uint64_t seed, bool equal_weights = true,
                                   double scale = 1.0);

enum class PotentialKind { power, log1p, exp_rate, sinh_power, double_exp, tabulated };

/// Interaction profile h(theta).
///   power(beta)          theta^beta / beta  (log theta for beta = 0)
///   log1p                log(1 + theta)
///   exp_rate(lambda, c)  exp(lambda sqrt(c) theta) - 1
///   sinh_power(lambda,c) (sinh(sqrt(c) theta)/sqrt(c))^lambda, theta^lambda for c = 0
///   double_exp(a, b)     exp(a e^{b theta}) - e^a
///   tabulated            monotone cubic through (theta, h) samples
class Potential {
public:
    static Potential power(double beta);
    static Potential log1p();
    static Potential exp_rate(double lambda, double c);
    static Potential sinh_power(double lambda, double c);
    static Potential double_exp(double a, double b);
    static Potential tabulated(std::vector<double> theta, std::vector<double> h, bool nondecreasing);

    double operator()(double theta) const;
    /// log h(theta) for h(theta) > 0; -inf when h(theta) <= 0. Finite where h overflows.
    double log_eval(double theta) const;

    PotentialKind kind() const { return kind_; }
    const std::vector<double>& parameters() const { return params_; }
    const std::vector<double>& table_theta() const { return table_theta_; }
    const std::vector<double>& table_h() const { return table_h_; }
    bool nondecreasing() const { return nondecreasing_; }
    bool zero_at_origin() const { return zero_at_origin_; }
    /// h(0+) = -inf
    bool singular_at_origin() const;
    double domain_end() const;

    /// Sampled monotonicity and h(0) checks on [0, theta_max]; throws ParameterError.
    void validate(double theta_max) const;
    /// Sampled convexity on [0, theta_max].
    bool sampled_convex(double theta_max, std::size_t samples = 2001) const;

    std::string describe() const;

private:
    Potential() = default;
    PotentialKind kind_ = PotentialKind::log1p;
    std::vector<double> params_;
    std::vector<double> table_theta_;
    std::vector<double> table_h_;
    std::shared_ptr<const std::function<double(double)>> interp_;
    bool nondecreasing_ = true;
    bool zero_at_origin_ = true;
};

} // namespace chfe
