#pragma once

// Seeded fuzz campaigns over the inequalities and the psi bounds. Case k of a
// family draws from its own counter stream, so results do not depend on the
// thread count.

#include "chfe/geometry.hpp"
#include "chfe/inequalities.hpp"
#include "chfe/measures.hpp"
#include "chfe/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chfe {

struct CaseResult {
    std::string case_id;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool passed = false;
};

struct CampaignOptions {
    std::uint64_t seed = 1;
    int threads = 1;
    double tolerance = 1e-6;
    std::size_t grid_size = 400;
    /// fix parameters that are otherwise drawn per case
    std::optional<int> dim;
    std::optional<double> q;
    std::optional<double> lambda;
};

/// Throws ParameterError if a fixed (dim, q, lambda) is invalid: q outside (0, 1), dim < 2 or
/// lambda not above (d-1)(1-q)/q.
void validate_campaign_options(const CampaignOptions& opts);

/// Random probability density on the grid [0, r_max]: a truncated mixture of Gaussian
/// bumps with an exponential factor, or a uniform ball. Always compactly supported.
RadialDensity random_radial_density(const ModelManifold& manifold, CounterRng& rng, std::size_t grid_size = 400,
                                    double r_max_cap = 7.0);

/// (q, lambda) with q in [0.2, 0.9] and lambda in (threshold, threshold + spread], at least lambda_min.
/// Fixed values in opts take precedence.
std::pair<double, double> random_q_lambda(int d, CounterRng& rng, const CampaignOptions& opts, double spread = 3.0,
                                          double lambda_min = 0.0);

/// Carlson-Levin bound on H^d, d in {2, 3, 4}, c in [0.25, 4]. ids "cl-<k>".
std::vector<CaseResult> carlson_levin_campaign(std::size_t cases, const CampaignOptions& opts);

/// Variable-curvature bound for c = 1 + theta^2 (even k) and c = exp(theta/2) (odd k). ids "gcl-<k>".
std::vector<CaseResult> general_cl_campaign(std::size_t cases, const CampaignOptions& opts);

/// Ratio of the variable-curvature check run with a constant profile against the constant
/// check; lhs and rhs are the two ratios, passed when they agree to 1e-10. ids "gcl-const-<k>".
std::vector<CaseResult> general_cl_constant_agreement(std::size_t cases, const CampaignOptions& opts);

struct ConvexityOptions {
    std::size_t max_points = 1000;
    /// false: shift every cloud off the pole and skip the centring check (negative control)
    bool centred = true;
    double tolerance = 1e-9;
};
/// Centred clouds on H^2 and H^3 with H = sinh_power(lambda in [1, 4]). ids "cvx-<k>" or "cvx-uncentred-<k>".
std::vector<CaseResult> convexity_campaign(std::size_t cases, const CampaignOptions& opts,
                                           const ConvexityOptions& cvx = {});

/// Upper, sandwich and lower psi bounds over random constant, power and exponential profiles.
/// lhs / rhs are the logs of the smaller / larger side of the worst check; ratio = exp(lhs - rhs).
/// With only_where_slope_holds the sandwich bound is checked only at pivots R where
/// psi'(R)/psi(R) >= sqrt(c(R)). ids "psi-<k>".
std::vector<CaseResult> sandwich_campaign(std::size_t cases, const CampaignOptions& opts,
                                          bool only_where_slope_holds = false);

/// Reversed-HLS check on random densities in R^2; lhs / rhs are those of the limit
/// inequality, passed requires every finite-c check, the Cauchy test and the limit. ids "hls-<k>".
std::vector<CaseResult> reversed_hls_campaign(std::size_t cases, const CampaignOptions& opts,
                                              const std::vector<double>& c_values = {1e-1, 1e-2, 1e-3, 1e-4});

bool all_passed(const std::vector<CaseResult>& cases);

} // namespace chfe
