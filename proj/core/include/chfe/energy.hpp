#pragma once

// Entropy and interaction terms, the uniform-ball energy bound, and the
// spreading / blow-up scans and growth tests used to decide (non)existence.

#include "chfe/geometry.hpp"
#include "chfe/measures.hpp"
#include "chfe/quadrature.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace chfe {

struct EnergyBreakdown {
    double entropy = 0.0;
    double interaction = 0.0;
    double total = 0.0;
    double q = 0.5;
    double quadrature_error_estimate = 0.0;
};

/// (1/(q-1)) int rho^q dV
double entropy_term(const RadialDensity& rho, double q);

/// Normalized Gauss rule for the angular weight sin^{d-2}(phi) in u = cos(phi); cached per (d, n).
const quad::Rule& angular_rule(int d, int nodes = 64);

/// Spherical average of h(d(x, y)) over the relative angle: K(r, s).
double interaction_kernel(double c, int d, const Potential& h, double r, double s, int angular_nodes = 64);

/// K(r_i, r_j) on a radial grid together with the hat-function volume weights W_i.
/// Built once, then read-only.
class KernelMatrix {
public:
    KernelMatrix(const ModelManifold& manifold, std::vector<double> r, const Potential& h, int angular_nodes = 64,
                 int threads = 1);

    const Eigen::MatrixXd& matrix() const { return K_; }
    const std::vector<double>& grid() const { return r_; }
    const Eigen::VectorXd& weights() const { return W_; }
    std::size_t size() const { return r_.size(); }

    /// V_i = sum_j K_ij W_j rho_j, the potential W * rho at the nodes.
    Eigen::VectorXd convolve(const Eigen::VectorXd& rho) const;
    /// 1/2 sum_ij W_i W_j rho_i rho_j K_ij
    double interaction(const Eigen::VectorXd& rho) const;
    /// Same sum on the every-other-node subgrid (last node kept); used for error estimates.
    double interaction_coarse(const Eigen::VectorXd& rho) const;

private:
    std::vector<double> r_;
    Eigen::MatrixXd K_;
    Eigen::VectorXd W_;
    Eigen::VectorXd W_coarse_;
    std::vector<std::size_t> coarse_;
};

struct InteractionOptions {
    int angular_nodes = 64;
    int threads = 1;
};

/// 1/2 int int h(d) rho rho dV dV on a constant-curvature manifold; +inf if the truncated tail
/// carries a non-negligible share of a non-compact density.
double interaction_energy(const RadialDensity& rho, const Potential& h, const InteractionOptions& opts = {});
double interaction_energy(const RadialDensity& rho, const KernelMatrix& K);
/// 1/2 sum_ij w_i w_j h(d_ij), diagonal included.
double interaction_energy(const DiscreteMeasure& mu, const Potential& h);

EnergyBreakdown total_energy(const RadialDensity& rho, double q, const Potential& h,
                             const InteractionOptions& opts = {});
EnergyBreakdown total_energy(const RadialDensity& rho, double q, const KernelMatrix& K);
/// Entropy of a cloud is 0 (no absolutely continuous part).
EnergyBreakdown total_energy(const DiscreteMeasure& mu, double q, const Potential& h);

/// -|B_R|^{1-q}/(1-q) + h(2R)/2, using the lower volume bound on bound-only manifolds.
double rhoR_energy_bound(const ModelManifold& manifold, double R, double q, const Potential& h);
/// The entropy part -|B_R|^{1-q}/(1-q) alone.
double rhoR_entropy_bound(const ModelManifold& manifold, double R, double q);

enum class ScanVerdict { unbounded_below_blowup, unbounded_below_spreading, bounded_below_inconclusive };
std::string to_string(ScanVerdict v);

struct ScanResult {
    std::vector<double> R_values;
    /// E[rho_R] where computable (exact constant-curvature manifolds); NaN fields otherwise.
    std::vector<EnergyBreakdown> energies;
    std::vector<double> bounds;
    ScanVerdict verdict = ScanVerdict::bounded_below_inconclusive;
    std::string reason;
};

struct ScanOptions {
    double floor = -1e6;          ///< spreading: bound must end below this
    double blowup_floor = -100.0; ///< blow-up: h(2R)/2 must end below this
    double window = 0.5;          ///< trailing fraction of the scan that must decrease
    bool compute_energy = true;
    std::size_t grid_size = 129;
    int angular_nodes = 32;
    int threads = 1;
};

ScanResult spreading_scan(const ModelManifold& manifold, double q, const Potential& h,
                          const std::vector<double>& R_list, const ScanOptions& opts = {});
ScanResult blowup_scan(const ModelManifold& manifold, double q, const Potential& h, const std::vector<double>& R_list,
                       const ScanOptions& opts = {});

/// log-spaced list of n radii from a to b (either order)
std::vector<double> log_spaced(double a, double b, std::size_t n);

// ---------------------------------------------------------------- growth tests

struct NonexistConst {
    double c_M;
    double q;
    int d;
};
struct ExistConst {
    double c_m;
    double q;
    int d;
    double lambda;
};
struct NonexistVar {
    CurvatureProfile c_M;
    double delta;
    double eps;
    double q;
    int d;
};
struct ExistVar {
    CurvatureProfile c_m;
    double lambda_tilde;
    double q;
    int d;
};
using GrowthMode = std::variant<NonexistConst, ExistConst, NonexistVar, ExistVar>;

enum class GrowthClass { vanishing, bounded_away_from_zero, inconclusive };
std::string to_string(GrowthClass g);

struct GrowthReport {
    GrowthClass classification = GrowthClass::inconclusive;
    std::vector<double> theta;
    std::vector<double> log_ratio; ///< log h - log comparator
    /// exp(min log_ratio over the trailing half), an empirical liminf
    double liminf_estimate = 0.0;
    std::string comparator;
};

struct GrowthOptions {
    double theta_min = 1.0;
    double theta_max = 200.0;
    std::size_t samples = 256;
    double vanish_level = 1e-8;
};

/// log of the comparator function for a mode at theta.
double log_comparator(const GrowthMode& mode, double theta);

/// Classifies the trend of h / comparator on a geometric grid. An empirical verdict: it never
/// decides the true limit.
GrowthReport growth_condition_check(const Potential& h, const GrowthMode& mode, const GrowthOptions& opts = {});

/// (d - 1)(1 - q)/q, the growth threshold for lambda.
double lambda_threshold(int d, double q);

struct RatioLimit {
    double value;
    double limit;
    double deviation;
};
/// exp(sqrt(c) lambda theta) / (sinh(sqrt(c) theta)/sqrt(c))^lambda against 2^lambda c^{lambda/2}.
RatioLimit ratio_limit_2lambda(double lambda, double c_m, double theta);

} // namespace chfe
