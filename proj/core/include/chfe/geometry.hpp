#pragma once

// Curvature profiles, the comparison ODE psi'' = c(theta) psi, and volume,
// Jacobian and distance bounds on rotationally symmetric model manifolds.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace chfe {

namespace detail {
struct TableInterp;
}

enum class ProfileKind { constant, power, exponential, tabulated };

/// Radial curvature magnitude c(theta) > 0 of a model manifold (sectional curvature -c).
///
/// Kinds:
///   constant     c(theta) = c
///   power        c(theta) = floor + theta^k (floor = 0 allowed: c vanishes only at the pole)
///   exponential  c(theta) = amplitude * exp(beta * theta)
///   tabulated    monotone piecewise-cubic interpolation of (theta, c) samples;
///                evaluating outside the table throws InvalidProfile.
///
/// The two flags are assertions made by the caller. The factories for the
/// analytic kinds set them to their true values.
class CurvatureProfile {
public:
    static CurvatureProfile constant(double c);
    static CurvatureProfile power(double k, double floor);
    static CurvatureProfile exponential(double beta, double amplitude);
    static CurvatureProfile tabulated(std::vector<double> theta, std::vector<double> c,
                                      bool monotone_nondecreasing, bool satisfies_c32);

    /// c(theta); throws InvalidProfile if the value is not finite and positive
    /// or theta lies outside a tabulated range.
    double operator()(double theta) const;

    /// Integral of sqrt(c) over [a, b] by composite Gauss-Legendre.
    double sqrt_integral(double a, double b) const;

    ProfileKind kind() const { return kind_; }
    /// Kind-specific parameters: constant {c}, power {k, floor}, exponential {beta, amplitude}.
    const std::vector<double>& parameters() const { return params_; }
    const std::vector<double>& table_theta() const { return table_theta_; }
    const std::vector<double>& table_c() const { return table_c_; }

    bool monotone_nondecreasing() const { return monotone_; }
    bool satisfies_c32() const { return c32_; }
    CurvatureProfile with_flags(bool monotone_nondecreasing, bool satisfies_c32) const;

    /// Largest radius at which the profile is defined (+inf for analytic kinds).
    double domain_end() const;
    /// c(0)
    double at_origin() const { return (*this)(0.0); }

    /// Sample positivity and, when flagged, monotonicity on [0, theta_max].
    void validate(double theta_max) const;

    /// Finite-difference spot check of Dc / c^{3/2} -> 0 on a log grid; returns a
    /// warning when the ratio does not appear to decay. Never throws for a valid profile.
    std::optional<std::string> c32_warning(double theta_max) const;

    std::string describe() const;

private:
    CurvatureProfile() = default;
    ProfileKind kind_ = ProfileKind::constant;
    std::vector<double> params_;
    std::vector<double> table_theta_;
    std::vector<double> table_c_;
    std::shared_ptr<const detail::TableInterp> interp_;
    bool monotone_ = true;
    bool c32_ = true;
};

/// Numerical solution of psi'' = c psi, psi(0) = 0, psi'(0) = 1 on [0, theta_max].
///
/// Nodes below log_start hold (psi, psi') from the linear system; from log_start on
/// the solver integrates (log psi, psi'/psi) instead, and psi / dpsi may be +inf there.
/// Values between nodes come from a partial integrator step off the nearest node.
struct PsiSolution {
    std::vector<double> theta;
    std::vector<double> psi;
    std::vector<double> dpsi;
    std::vector<double> log_psi;
    std::vector<double> log_derivative; ///< psi'/psi (+inf at theta = 0)
    std::size_t log_start = 0;
    std::shared_ptr<const CurvatureProfile> profile;
    double tolerance = 1e-10;

    double theta_max() const { return theta.back(); }

    struct State {
        double psi;
        double dpsi;
        double log_psi;
        double log_derivative;
    };
    State at(double theta) const;
    double value(double theta) const { return at(theta).psi; }
    double derivative(double theta) const { return at(theta).dpsi; }
    double log_value(double theta) const { return at(theta).log_psi; }
};

/// Adaptive Dormand-Prince 5(4) solve of the comparison IVP.
/// Throws InvalidProfile for a non-positive profile and IntegratorFailure on step underflow.
PsiSolution solve_psi(const CurvatureProfile& profile, double theta_max, double tol = 1e-10);

/// sinh(sqrt(c) theta) / sqrt(c), continuous at c = 0.
double psi_closed_form(double c, double theta);
double log_psi_closed_form(double c, double theta);

/// theta * exp(int_0^theta sqrt(c)); requires a non-decreasing profile.
double psi_upper_bound(const CurvatureProfile& profile, double theta);
double log_psi_upper_bound(const CurvatureProfile& profile, double theta);

struct PsiLowerBound {
    double bound;
    double log_bound;
    bool holds;
};

/// psi(theta0) * exp((1 - eps) int_theta0^theta sqrt(c)), and whether psi(theta) stays above it.
PsiLowerBound psi_lower_bound(const CurvatureProfile& profile, double eps, double theta0, double theta,
                              const PsiSolution& psi);

/// Smallest node theta0 of the solution grid (at or beyond theta_min) such that the
/// lower bound anchored at theta0 holds at every later node. Empty if none qualifies.
std::optional<double> find_theta0(const CurvatureProfile& profile, double eps, const PsiSolution& psi,
                                  double theta_min = 0.0);

enum class BoundSide { below, above };

struct PsiSandwich {
    double bound;
    double log_bound;
    BoundSide side;
    /// psi'(R)/psi(R) >= sqrt(c(R)). The bound is only guaranteed when this holds; it always
    /// does for constant profiles, and it can fail for strictly increasing ones
    /// (c = 1 + theta^2 has psi'/psi -> theta < sqrt(c)).
    bool slope_condition;
};

/// psi(R) exp(sqrt(c(R)) (theta - R)): claimed lower bound for psi(theta) when theta >= R and
/// upper bound when theta <= R (non-decreasing profiles); see slope_condition.
PsiSandwich psi_sandwich(const CurvatureProfile& profile, double R, const PsiSolution& psi, double theta);

struct Interval {
    double lower;
    double upper;
};

/// d-dimensional model manifold. Either constant curvature -c (c = 0 is Euclidean), or
/// a pair of profiles c_M <= c_m bounding the curvature from above and below. When both
/// profiles are identical the manifold is the exact warped product with warping psi.
class ModelManifold {
public:
    static ModelManifold constant(int dim, double c);
    static ModelManifold bounds(int dim, const CurvatureProfile& c_m, const CurvatureProfile& c_M,
                                double theta_max, double tol = 1e-10);
    static ModelManifold model(int dim, const CurvatureProfile& c, double theta_max, double tol = 1e-10);

    int dim() const { return dim_; }
    bool is_constant() const { return constant_; }
    bool is_exact() const { return constant_ || same_profile_; }
    /// Constant curvature magnitude; throws UnsupportedManifold in bound mode.
    double curvature() const;
    /// Largest radius the manifold's psi solutions cover (+inf for constant curvature).
    double radius_limit() const;

    /// psi_m (upper warp) and psi_M (lower warp); equal for exact manifolds.
    double log_warp_upper(double r) const;
    double log_warp_lower(double r) const;
    double warp_upper(double r) const;
    double warp_lower(double r) const;
    /// Exact warp; throws UnsupportedManifold if the manifold is bound-only.
    double warp(double r) const;
    double log_warp(double r) const;

    const PsiSolution& psi_m() const;
    const PsiSolution& psi_M() const;
    const CurvatureProfile& profile_m() const;
    const CurvatureProfile& profile_M() const;

private:
    int dim_ = 2;
    bool constant_ = true;
    bool same_profile_ = false;
    double c_ = 0.0;
    std::shared_ptr<const PsiSolution> psi_m_;
    std::shared_ptr<const PsiSolution> psi_M_;
};

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

/// Two-sided bound on |B_R(o)|: d w(d) int_0^R psi_M^{d-1} <= |B_R| <= d w(d) int_0^R psi_m^{d-1}.
Interval ball_volume(const ModelManifold& manifold, double R);
/// Same bounds in log form; finite where ball_volume would overflow.
Interval log_ball_volume(const ModelManifold& manifold, double R);

/// ((psi_M(r)/r)^{d-1}, (psi_m(r)/r)^{d-1}); (1, 1) at r = 0.
Interval jacobian_bounds(const ModelManifold& manifold, double r);

/// Geodesic distance between points at radii r, s separated by angle phi at the pole
/// of the space form of curvature -c (c = 0 gives the Euclidean law of cosines).
double hyperbolic_distance(double c, double r, double s, double phi);
/// Same, parametrized by sin^2(phi/2) to avoid the cosine cancellation.
double space_form_distance(double c, double r, double s, double sin2_half_angle);

/// Euclidean distance of the log-coordinates, a lower bound for every c >= 0.
double chordal_lower_bound(double r, double s, double phi);

} // namespace chfe
