#pragma once

// Radial ground-state search: damped fixed-point iteration on the first-order
// condition with a mass-normalizing multiplier, plus consistency certificates.

#include "chfe/energy.hpp"
#include "chfe/inequalities.hpp"
#include "chfe/measures.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace chfe {

struct MinimizeOptions {
    double r_max = 8.0;
    std::size_t grid_size = 1024;
    std::size_t max_iterations = 20000;
    double energy_tol = 1e-12;
    double foc_tol = 1e-6;
    double initial_damping = 0.5;
    double min_damping = 1e-12;
    double multiplier_tol = 1e-10; ///< relative mass error accepted from the multiplier solve
    int angular_nodes = 64;
    int threads = 1;
    /// growth rate lambda for the existence test; inferred from h when unset
    std::optional<double> lambda;
    GrowthOptions growth{};
    /// called after every accepted step
    std::function<void(const struct IterationRecord&)> on_iteration;
};

struct IterationRecord {
    std::size_t iter;
    double energy;
    double entropy;
    double interaction;
    double foc_residual;
    double lambda_mult;
    double damping;
};

struct MinimizerResult {
    RadialDensity density;
    EnergyBreakdown energy;
    double foc_residual = 0.0;
    std::size_t iterations = 0;
    double lagrange_multiplier = 0.0;
    bool converged = false;
    std::string diagnostics;
    /// share of mass in the first grid cell (reported, not interpreted)
    double concentration = 0.0;
    double lambda_used = 0.0;
    std::vector<IterationRecord> history;
};

/// Growth rate to use in the existence test for h on curvature c: exact for sinh_power and
/// exp_rate, a slope estimate otherwise.
double infer_growth_rate(const Potential& h, double c, const GrowthOptions& growth = {});

/// Refuses (GrowthConditionError) when h falls in a nonexistence regime or fails the existence test.
/// Returns the lambda used for the test.
double check_existence_regime(const ModelManifold& manifold, double q, const Potential& h,
                              const MinimizeOptions& opts);

MinimizerResult minimize_radial(const ModelManifold& manifold, double q, const Potential& h,
                                const std::optional<RadialDensity>& init = std::nullopt,
                                const MinimizeOptions& opts = {});
MinimizerResult minimize_radial(const ModelManifold& manifold, double q, const Potential& h, const KernelMatrix& K,
                                const std::optional<RadialDensity>& init, const MinimizeOptions& opts);

/// T(lambda) = [((1-q)/q)(V - lambda)]^{-1/(1-q)} with lambda chosen so that sum_i W_i T_i = 1.
struct MultiplierSolve {
    Eigen::VectorXd density;
    double lambda;
    double mass_error;
};
MultiplierSolve solve_multiplier(const Eigen::VectorXd& V, const Eigen::VectorXd& W, double q, double rel_tol = 1e-10);

/// sup over {rho >= 1e-14 max rho} of |(q/(q-1)) rho^{q-1} + W*rho - lambda| / max(1, |lambda|).
double foc_residual(const RadialDensity& rho, double q, const KernelMatrix& K, double lambda_mult);
double foc_residual(const RadialDensity& rho, double q, const Potential& h, double lambda_mult, int angular_nodes = 64);

double wasserstein1_to_pole(const RadialDensity& rho);
double wasserstein1_to_pole(const DiscreteMeasure& mu);

struct ProbeComparison {
    std::vector<double> R;
    std::vector<double> energy;
    double best_R = 0.0;
    double best_energy = 0.0;
};
/// E[rho_R] for n radii log-spaced in [R_min, R_max].
ProbeComparison probe_energies(const ModelManifold& manifold, double q, const Potential& h, std::size_t n = 50,
                               double R_min = 1e-2, double R_max = 1e2, std::size_t grid_size = 256,
                               int angular_nodes = 64, int threads = 1);

struct ExistenceCertificate {
    EnergyLowerBound lower_bound;
    std::vector<double> tail_R;
    std::vector<TailBound> tails;
    ProbeComparison probes;
    bool lower_bound_ok = false;
    bool tails_ok = false;
    bool probes_ok = false;
    bool passed = false;
};

ExistenceCertificate existence_certificate(const MinimizerResult& result, double lambda, double c_m,
                                           const Potential& h, double q, const LowerBoundOptions& lb_opts = {},
                                           std::size_t probe_count = 50);

} // namespace chfe
