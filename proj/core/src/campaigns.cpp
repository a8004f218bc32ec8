#include "chfe/campaigns.hpp"

#include "chfe/errors.hpp"
#include "chfe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace chfe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// stream ids keep the families independent under one seed
enum : std::uint64_t {
    stream_cl = 1,
    stream_gcl = 2,
    stream_gcl_const = 3,
    stream_cvx = 4,
    stream_cvx_neg = 5,
    stream_psi = 6,
    stream_hls = 7,
};

std::string case_id(const char* prefix, std::size_t k)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s-%04zu", prefix, k);
    return buf;
}

CaseResult from_report(std::string id, const InequalityReport& r)
{
    return {std::move(id), r.lhs, r.rhs, r.ratio, r.passed};
}

std::uint64_t stream_of(std::uint64_t family, std::size_t k)
{
    return (family << 40) | static_cast<std::uint64_t>(k);
}

int pick_dim(CounterRng& rng, const CampaignOptions& opts)
{
    const int d = 2 + static_cast<int>(rng.uniform() * 3.0);
    return opts.dim ? *opts.dim : d;
}

} // namespace

RadialDensity random_radial_density(const ModelManifold& manifold, CounterRng& rng, std::size_t grid_size,
                                    double r_max_cap)
{
    if (rng.uniform() < 0.2) {
        const double R = rng.uniform(0.1, std::min(3.0, r_max_cap));
        return uniform_ball(manifold, R, grid_size);
    }
    const int bumps = 1 + static_cast<int>(rng.uniform() * 3.0);
    std::vector<double> centre, width, amp;
    double reach = 0.0;
    for (int k = 0; k < bumps; ++k) {
        centre.push_back(rng.uniform(0.0, 2.5));
        width.push_back(rng.uniform(0.15, 1.0));
        amp.push_back(rng.uniform(0.2, 1.0));
        reach = std::max(reach, centre.back() + 6.0 * width.back());
    }
    const double decay = rng.uniform(0.0, 2.0);
    const double r_max = std::min(reach, r_max_cap);
    auto f = [&](double r) {
        double s = 0.0;
        for (int k = 0; k < bumps; ++k) {
            const double z = (r - centre[static_cast<std::size_t>(k)]) / width[static_cast<std::size_t>(k)];
            s += amp[static_cast<std::size_t>(k)] * std::exp(-0.5 * z * z);
        }
        return s * std::exp(-decay * r);
    };
    return density_from_function(manifold, uniform_grid(r_max, grid_size), f, true);
}

void validate_campaign_options(const CampaignOptions& opts)
{
    if (opts.dim && *opts.dim < 2) throw ParameterError("campaign: dim must be at least 2");
    if (opts.q && !(*opts.q > 0.0 && *opts.q < 1.0)) throw ParameterError("campaign: q must lie in (0, 1)");
    if (opts.lambda) {
        const double q = opts.q ? *opts.q : 0.2;
        const int d = opts.dim ? *opts.dim : 4;
        const double thr = lambda_threshold(d, q);
        if (!(*opts.lambda > thr)) {
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "campaign: lambda = %g must exceed the threshold (d-1)(1-q)/q = %g for d = %d, q = %g%s",
                          *opts.lambda, thr, d, q, opts.q && opts.dim ? "" : " (largest over the sampled d and q)");
            throw ParameterError(buf);
        }
    }
    if (!(opts.tolerance >= 0.0)) throw ParameterError("campaign: tolerance must be >= 0");
    if (opts.grid_size < 8) throw ParameterError("campaign: grid_size must be at least 8");
}

std::pair<double, double> random_q_lambda(int d, CounterRng& rng, const CampaignOptions& opts, double spread,
                                          double lambda_min)
{
    // draw both so the stream position does not depend on what is fixed
    const double uq = rng.uniform();
    const double ul = rng.uniform();
    const double q = opts.q ? *opts.q : 0.2 + 0.7 * uq;
    if (opts.lambda) return {q, *opts.lambda};
    const double lo = std::max(lambda_threshold(d, q), lambda_min);
    // open at the threshold
    double lambda = lo + spread * ul;
    if (!(lambda > lo)) lambda = lo + 0.5 * spread;
    return {q, lambda};
}

std::vector<CaseResult> carlson_levin_campaign(std::size_t cases, const CampaignOptions& opts)
{
    std::vector<CaseResult> out(cases);
    parallel_for(cases, opts.threads, [&](std::size_t k) {
        CounterRng rng(opts.seed, stream_of(stream_cl, k));
        const int d = pick_dim(rng, opts);
        const double c = rng.uniform(0.25, 4.0);
        const auto [q, lambda] = random_q_lambda(d, rng, opts);
        const ModelManifold m = ModelManifold::constant(d, c);
        const RadialDensity rho = random_radial_density(m, rng, opts.grid_size);
        out[k] = from_report(case_id("cl", k), verify_carlson_levin(rho, lambda, q, opts.tolerance));
    });
    return out;
}

std::vector<CaseResult> general_cl_campaign(std::size_t cases, const CampaignOptions& opts)
{
    std::vector<CaseResult> out(cases);
    parallel_for(cases, opts.threads, [&](std::size_t k) {
        CounterRng rng(opts.seed, stream_of(stream_gcl, k));
        const int d = pick_dim(rng, opts);
        const auto [q, lambda] = random_q_lambda(d, rng, opts);
        const CurvatureProfile prof =
            k % 2 == 0 ? CurvatureProfile::power(2.0, 1.0) : CurvatureProfile::exponential(0.5, 1.0);
        const double r_cap = 5.0;
        const ModelManifold m = ModelManifold::model(d, prof, r_cap + 0.5);
        const RadialDensity rho = random_radial_density(m, rng, opts.grid_size, r_cap);
        out[k] = from_report(case_id("gcl", k),
                             verify_carlson_levin_general(rho, lambda, q, m.psi_m(), opts.tolerance));
    });
    return out;
}

std::vector<CaseResult> general_cl_constant_agreement(std::size_t cases, const CampaignOptions& opts)
{
    std::vector<CaseResult> out(cases);
    parallel_for(cases, opts.threads, [&](std::size_t k) {
        CounterRng rng(opts.seed, stream_of(stream_gcl_const, k));
        const int d = pick_dim(rng, opts);
        const double c = rng.uniform(0.25, 4.0);
        const auto [q, lambda] = random_q_lambda(d, rng, opts);
        const ModelManifold m = ModelManifold::constant(d, c);
        const RadialDensity rho = random_radial_density(m, rng, opts.grid_size);
        const PsiSolution psi = solve_psi(CurvatureProfile::constant(c), rho.r_max() + 0.5, 1e-13);
        const InequalityReport a = verify_carlson_levin_general(rho, lambda, q, psi, opts.tolerance);
        const InequalityReport b = verify_carlson_levin(rho, lambda, q, opts.tolerance);
        const double ka = cl_constants_general(lambda, q, CurvatureProfile::constant(c), d).C1;
        const double kb = cl_constants(lambda, q, c, d).C1;
        const bool agree = std::abs(a.ratio - b.ratio) <= 1e-10 * std::max(1.0, std::abs(b.ratio)) &&
                           std::abs(ka - kb) <= 1e-10 * std::abs(kb);
        out[k] = {case_id("gcl-const", k), a.ratio, b.ratio, b.ratio != 0.0 ? a.ratio / b.ratio : kInf, agree};
    });
    return out;
}

std::vector<CaseResult> convexity_campaign(std::size_t cases, const CampaignOptions& opts, const ConvexityOptions& cvx)
{
    std::vector<CaseResult> out(cases);
    const std::uint64_t family = cvx.centred ? stream_cvx : stream_cvx_neg;
    parallel_for(cases, opts.threads, [&](std::size_t k) {
        CounterRng rng(opts.seed, stream_of(family, k));
        const int d = rng.uniform() < 0.5 ? 2 : 3;
        const double c = rng.uniform(0.25, 4.0);
        const double lambda = rng.uniform(1.0, 4.0);
        // log-uniform point count in [2, max_points]
        const double lmax = std::log(static_cast<double>(std::max<std::size_t>(cvx.max_points, 2)));
        const auto n = static_cast<std::size_t>(std::clamp(std::exp(rng.uniform(std::log(2.0), lmax)), 2.0,
                                                           static_cast<double>(cvx.max_points)));
        const bool equal = rng.uniform() < 0.5;
        const double scale = cvx.centred ? rng.uniform(0.05, 1.5) : rng.uniform(0.05, 0.3);
        DiscreteMeasure mu = make_centred_cloud(d, c, n, rng.next_u64(), equal, scale);
        const Potential H = Potential::sinh_power(lambda, c);
        if (cvx.centred) {
            out[k] = from_report(case_id("cvx", k), verify_convexity(mu, H, cvx.tolerance, true));
        } else {
            Eigen::VectorXd offset = Eigen::VectorXd::Zero(d);
            offset(0) = rng.uniform(1.0, 3.0);
            mu = mu.shifted(offset);
            out[k] = from_report(case_id("cvx-uncentred", k), verify_convexity(mu, H, cvx.tolerance, false));
        }
    });
    return out;
}

std::vector<CaseResult> sandwich_campaign(std::size_t cases, const CampaignOptions& opts,
                                          bool only_where_slope_holds)
{
    std::vector<CaseResult> out(cases);
    parallel_for(cases, opts.threads, [&](std::size_t k) {
        CounterRng rng(opts.seed, stream_of(stream_psi, k));
        const double u = rng.uniform();
        const CurvatureProfile prof = u < 1.0 / 3.0   ? CurvatureProfile::constant(rng.uniform(0.1, 4.0))
                                      : u < 2.0 / 3.0 ? CurvatureProfile::power(rng.uniform(0.5, 3.0), rng.uniform(0.1, 2.0))
                                                      : CurvatureProfile::exponential(rng.uniform(0.1, 1.0),
                                                                                      rng.uniform(0.1, 2.0));
        const double theta_max = rng.uniform(2.0, 10.0);
        const PsiSolution psi = solve_psi(prof, theta_max, 1e-10);
        const double R = rng.uniform(0.01, theta_max);
        const double eps = rng.uniform(0.05, 0.5);
        const std::optional<double> theta0 = find_theta0(prof, eps, psi);
        // relative slack on the log scale for the solver error
        const double slack = 1e-8;
        double worst = -kInf, w_small = 0.0, w_large = 0.0;
        auto record = [&](double small, double large) {
            const double gap = small - large - slack * std::max(1.0, std::abs(large));
            if (gap > worst) {
                worst = gap;
                w_small = small;
                w_large = large;
            }
        };
        for (int j = 0; j < 16; ++j) {
            const double theta = j == 0 ? R : rng.uniform(0.0, theta_max);
            if (theta <= 0.0) continue;
            const double lp = psi.log_value(theta);
            record(lp, log_psi_upper_bound(prof, theta));
            const PsiSandwich s = psi_sandwich(prof, R, psi, theta);
            if (!only_where_slope_holds || s.slope_condition) {
                if (s.side == BoundSide::below)
                    record(s.log_bound, lp);
                else
                    record(lp, s.log_bound);
            }
            if (theta0 && theta >= *theta0) {
                const PsiLowerBound lb = psi_lower_bound(prof, eps, *theta0, theta, psi);
                record(lb.log_bound, lp);
            }
        }
        out[k] = {case_id("psi", k), w_small, w_large, std::exp(w_small - w_large), worst <= 0.0};
    });
    return out;
}

std::vector<CaseResult> reversed_hls_campaign(std::size_t cases, const CampaignOptions& opts,
                                              const std::vector<double>& c_values)
{
    std::vector<CaseResult> out(cases);
    parallel_for(cases, opts.threads, [&](std::size_t k) {
        CounterRng rng(opts.seed, stream_of(stream_hls, k));
        const auto [q, lambda] = random_q_lambda(2, rng, opts, 3.0, 1.0);
        const ModelManifold m = ModelManifold::constant(2, 0.0);
        const RadialDensity rho = random_radial_density(m, rng, 129, 6.0);
        const ReversedHLSReport rep = reversed_hls_check(rho, lambda, q, c_values, opts.tolerance, 32);
        out[k] = {case_id("hls", k), rep.limit.lhs, rep.limit.rhs, rep.limit.ratio, rep.passed};
    });
    return out;
}

bool all_passed(const std::vector<CaseResult>& cases)
{
    return std::all_of(cases.begin(), cases.end(), [](const CaseResult& c) { return c.passed; });
}

} // namespace chfe
