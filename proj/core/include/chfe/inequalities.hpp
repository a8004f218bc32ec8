#pragma once

// Carlson-Levin type bounds of int rho^q by mass and a sinh (or psi) moment, the
// convexity inequality for centred measures, its Euclidean limit, and the
// tightness and energy lower bounds built on them.

#include "chfe/energy.hpp"
#include "chfe/geometry.hpp"
#include "chfe/measures.hpp"

#include <string>
#include <vector>

namespace chfe {

struct CLConstants {
    double lambda = 0.0;
    double q = 0.0;
    double c_m = 0.0;
    int d = 2;
    double p = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double C1 = 0.0;
};

/// Closed-form constants; throws ParameterError unless 0 < q < 1, c_m > 0, d >= 2 and
/// lambda > (d-1)(1-q)/q.
CLConstants cl_constants(double lambda, double q, double c_m, int d);
/// Variable-curvature version: alpha_i use sqrt(c_m(0)); same beta_i and C1 form.
CLConstants cl_constants_general(double lambda, double q, const CurvatureProfile& c_m, int d);

struct InequalityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double constant_used = 0.0;
    bool passed = false;
    bool degenerate = false;
    double tolerance = 1e-6;
    double lhs_error = 0.0;
    double rhs_error = 0.0;
};

/// Fills ratio and passed from lhs and rhs.
InequalityReport make_report(double lhs, double rhs, double constant, double tolerance);

InequalityReport verify_carlson_levin(const RadialDensity& rho, double lambda, double q, double tolerance = 1e-6);
/// rho must live on the exact model manifold of psi's profile (or on any exact manifold when
/// only the moment weight should change).
InequalityReport verify_carlson_levin_general(const RadialDensity& rho, double lambda, double q,
                                              const PsiSolution& psi, double tolerance = 1e-6);

/// Radius minimizing alpha1 S^beta1 mass^q + alpha2 S^-beta2 mom^q, S = sinh(sqrt(c) R)/sqrt(c).
double optimal_R(const CLConstants& k, double mass, double sinh_mom);
/// That right-hand side at a given R.
double nonopt_rhs(const CLConstants& k, double R, double mass, double sinh_mom);

/// int H(r_x) dmu <= int int H(d) dmu dmu for a centred probability cloud; lhs is the single
/// integral. With require_centred = false the centring is not checked (negative controls).
InequalityReport verify_convexity(const DiscreteMeasure& mu, const Potential& H, double tolerance = 1e-9,
                                  bool require_centred = true);
/// (int H(r_x) dmu)(int dmu) <= int int H(d) dmu dmu for a centred cloud of any mass.
InequalityReport verify_convexity_unnormalized(const DiscreteMeasure& mu, const Potential& H,
                                               double tolerance = 1e-9, bool require_centred = true);

struct ReversedHLSReport {
    std::vector<double> c_values;
    /// C1(c)^{-1/(pq)} along c_values
    std::vector<double> constants;
    std::vector<double> differences;
    bool cauchy = false;
    /// power-law extrapolation of the constant to c -> 0
    double limit_constant = 0.0;
    double limit_exponent = 0.0;
    /// per c: kappa(c) (int rho^q)^{1/(pq)} m^{-(1-2p)/p} <= int int (sinh(sqrt(c) d)/sqrt(c))^lambda rho rho
    std::vector<InequalityReport> finite_c;
    /// the c -> 0 inequality with kernel |x - y|^lambda
    InequalityReport limit;
    bool passed = false;
};

/// Euclidean-limit check for rho on R^d (c = 0 manifold).
ReversedHLSReport reversed_hls_check(const RadialDensity& rho, double lambda, double q,
                                     const std::vector<double>& c_values = {1e-1, 1e-2, 1e-3, 1e-4},
                                     double tolerance = 1e-6, int angular_nodes = 64);

struct TailBound {
    double tail_mass;
    double bound;
    bool holds;
};
/// mu(r >= R) <= int S^lambda dmu / S(R)^lambda.
TailBound tightness_tail_bound(const RadialDensity& rho, double lambda, double c_m, double R);
TailBound tightness_tail_bound(const DiscreteMeasure& mu, double lambda, double c_m, double R);

struct LowerBoundOptions {
    double gamma_factor = 0.5;
    double theta_max = 200.0;
    std::size_t theta_samples = 4000;
    GrowthOptions growth{};
    InteractionOptions interaction{};
};

struct EnergyLowerBound {
    double energy = 0.0;
    double bound = 0.0;
    double w1 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma_tilde1 = 1.0;
    double gamma_tilde2 = 0.0;
    double C2 = 0.0;
    double C1_tilde = 0.0;
    double C2_tilde = 0.0;
    CLConstants constants;
    GrowthReport growth;
    bool holds = false;
    std::string assumptions;
};

/// Minorant constants of h and the resulting energy lower bound C1~ + C2~ W1(mu, delta_o).
/// Throws GrowthConditionError if h is not bounded below by a multiple of exp(sqrt(c_m) lambda theta).
EnergyLowerBound energy_lower_bound_constants(double q, const Potential& h, double lambda, double c_m, int d,
                                              const LowerBoundOptions& opts = {});
EnergyLowerBound energy_lower_bound_check(const RadialDensity& rho, double q, const Potential& h, double lambda,
                                          double c_m, const LowerBoundOptions& opts = {});
EnergyLowerBound energy_lower_bound_check(const RadialDensity& rho, double q, const KernelMatrix& K,
                                          const Potential& h, double lambda, double c_m,
                                          const LowerBoundOptions& opts = {});
EnergyLowerBound energy_lower_bound_check(const DiscreteMeasure& mu, double q, const Potential& h, double lambda,
                                          double c_m, const LowerBoundOptions& opts = {});

} // namespace chfe
