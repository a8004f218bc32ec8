#include "chfe/inequalities.hpp"

#include "chfe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chfe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_params(double lambda, double q, int d)
{
    if (!(q > 0.0 && q < 1.0)) throw ParameterError("q must lie in (0, 1)");
    if (d < 2) throw ParameterError("dimension must be at least 2");
    const double thr = lambda_threshold(d, q);
    if (!(lambda > thr)) {
        std::ostringstream msg;
        msg << "lambda = " << lambda << " must exceed the threshold (d-1)(1-q)/q = " << thr;
        throw ParameterError(msg.str());
    }
}

// closes the constants once alpha1, alpha2 are known
CLConstants finish(double lambda, double q, double c, int d, double log_a1, double log_a2)
{
    CLConstants k;
    k.lambda = lambda;
    k.q = q;
    k.c_m = c;
    k.d = d;
    k.beta1 = (1.0 - q) * (d - 1);
    k.beta2 = lambda * q - k.beta1;
    k.p = k.beta1 / (lambda * q);
    k.alpha1 = std::exp(log_a1);
    k.alpha2 = std::exp(log_a2);
    const double b1 = k.beta1, b2 = k.beta2, bs = b1 + b2;
    const double log_prod = (b2 * log_a1 + b1 * log_a2) / bs;
    const double shape = std::pow(b2 / b1, b1 / bs) + std::pow(b1 / b2, b2 / bs);
    k.C1 = std::exp(log_prod) * shape;
    return k;
}

double log_S(double c, double r)
{
    return log_psi_closed_form(c, r);
}

} // namespace

CLConstants cl_constants(double lambda, double q, double c_m, int d)
{
    check_params(lambda, q, d);
    if (!(c_m > 0.0) || !std::isfinite(c_m)) throw ParameterError("c_m must be positive");
    const double dw = d * unit_ball_volume(d);
    const double sc = std::sqrt(c_m);
    const double b1 = (1.0 - q) * (d - 1);
    const double b2 = lambda * q - b1;
    const double log_a1 = (1.0 - q) * std::log(dw / (sc * (d - 1)));
    const double log_a2 = (1.0 - q) * std::log(dw * (1.0 - q) / (sc * b2));
    return finish(lambda, q, c_m, d, log_a1, log_a2);
}

CLConstants cl_constants_general(double lambda, double q, const CurvatureProfile& c_m, int d)
{
    check_params(lambda, q, d);
    if (!c_m.monotone_nondecreasing())
        throw PreconditionError("variable-curvature constants need a non-decreasing profile c_m");
    const double c0 = c_m.at_origin();
    if (!(c0 > 0.0))
        throw ParameterError("variable-curvature constants need c_m(0) > 0; give the profile a positive floor");
    const double dw = d * unit_ball_volume(d);
    const double s0 = std::sqrt(c0);
    const double log_a1 = (1.0 - q) * std::log(dw / (s0 * (d - 1)));
    const double log_a2 = (1.0 - q) * std::log(dw / ((1.0 - d + lambda * q / (1.0 - q)) * s0));
    return finish(lambda, q, c0, d, log_a1, log_a2);
}

InequalityReport make_report(double lhs, double rhs, double constant, double tolerance)
{
    InequalityReport r;
    r.lhs = lhs;
    r.rhs = rhs;
    r.constant_used = constant;
    r.tolerance = tolerance;
    if (std::isinf(rhs) && rhs > 0.0) {
        r.ratio = 0.0;
        r.passed = true;
        r.degenerate = true;
    } else if (lhs == 0.0 && rhs == 0.0) {
        r.ratio = 0.0;
        r.passed = true;
        r.degenerate = true;
    } else {
        r.ratio = lhs / rhs;
        r.passed = rhs > 0.0 ? r.ratio <= 1.0 + tolerance : lhs <= rhs;
    }
    return r;
}

InequalityReport verify_carlson_levin(const RadialDensity& rho, double lambda, double q, double tolerance)
{
    const double c = rho.manifold.curvature();
    if (!(c > 0.0)) throw PreconditionError("verify_carlson_levin: needs a hyperbolic manifold (c > 0)");
    const CLConstants k = cl_constants(lambda, q, c, rho.manifold.dim());
    const double lhs = power_integral(rho, q);
    const double m = mass(rho);
    const double mom = sinh_moment(rho, lambda);
    const double rhs = k.C1 * std::pow(m, (1.0 - k.p) * q) * std::pow(mom, k.p * q);
    return make_report(lhs, rhs, k.C1, tolerance);
}

InequalityReport verify_carlson_levin_general(const RadialDensity& rho, double lambda, double q,
                                              const PsiSolution& psi, double tolerance)
{
    const CLConstants k = cl_constants_general(lambda, q, *psi.profile, rho.manifold.dim());
    const double lhs = power_integral(rho, q);
    const double m = mass(rho);
    const double mom = psi_moment(rho, lambda, psi);
    const double rhs = k.C1 * std::pow(m, (1.0 - k.p) * q) * std::pow(mom, k.p * q);
    return make_report(lhs, rhs, k.C1, tolerance);
}

double optimal_R(const CLConstants& k, double mass_, double sinh_mom)
{
    if (!(mass_ > 0.0) || !(sinh_mom > 0.0)) throw PreconditionError("optimal_R: mass and moment must be positive");
    const double log_target = std::log(k.alpha2 * k.beta2 / (k.alpha1 * k.beta1)) + k.q * std::log(sinh_mom / mass_);
    const double log_s = log_target / (k.beta1 + k.beta2);
    const double sc = std::sqrt(k.c_m);
    // S = sinh(sc R)/sc  =>  R = asinh(sc S)/sc, in logs once sc S is large
    const double log_x = log_s + std::log(sc);
    if (log_x > 300.0) return (log_x + std::log(2.0)) / sc;
    return std::asinh(std::exp(log_x)) / sc;
}

double nonopt_rhs(const CLConstants& k, double R, double mass_, double sinh_mom)
{
    if (!(R > 0.0)) throw PreconditionError("nonopt_rhs: R must be positive");
    const double ls = log_S(k.c_m, R);
    return k.alpha1 * std::exp(k.beta1 * ls) * std::pow(mass_, k.q) +
           k.alpha2 * std::exp(-k.beta2 * ls) * std::pow(sinh_mom, k.q);
}

namespace {

void check_convex_potential(const DiscreteMeasure& mu, const Potential& H)
{
    if (!H.nondecreasing()) throw PreconditionError("convexity check: H must be non-decreasing");
    if (H.singular_at_origin() || H(0.0) < 0.0) throw PreconditionError("convexity check: H must be >= 0");
    double rmax = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) rmax = std::max(rmax, mu.radius(i));
    if (!H.sampled_convex(std::max(2.0 * rmax, 1e-3)))
        throw PreconditionError("convexity check: H is not convex on the sampled range");
}

void check_centred(const DiscreteMeasure& mu)
{
    double rmax = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) rmax = std::max(rmax, mu.radius(i));
    const double off = mu.tangent_mean().norm();
    if (off > 1e-10 * mu.total_weight() * (1.0 + rmax))
        throw PreconditionError("convexity check: the measure is not centred (sum w_i v_i != 0)");
}

double single_sum(const DiscreteMeasure& mu, const Potential& H)
{
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weights(static_cast<Eigen::Index>(i)) * H(mu.radius(i));
    return s;
}

} // namespace

InequalityReport verify_convexity(const DiscreteMeasure& mu, const Potential& H, double tolerance,
                                  bool require_centred)
{
    if (std::abs(mu.total_weight() - 1.0) > 1e-12)
        throw PreconditionError("verify_convexity: weights must sum to 1 (use verify_convexity_unnormalized)");
    return verify_convexity_unnormalized(mu, H, tolerance, require_centred);
}

InequalityReport verify_convexity_unnormalized(const DiscreteMeasure& mu, const Potential& H, double tolerance,
                                               bool require_centred)
{
    if (!(mu.total_weight() > 0.0)) throw PreconditionError("convexity check: total mass must be positive");
    if (require_centred) check_centred(mu);
    check_convex_potential(mu, H);
    const double lhs = single_sum(mu, H) * mu.total_weight();
    const double rhs = 2.0 * interaction_energy(mu, H);
    return make_report(lhs, rhs, 1.0, tolerance);
}

ReversedHLSReport reversed_hls_check(const RadialDensity& rho, double lambda, double q,
                                     const std::vector<double>& c_values, double tolerance, int angular_nodes)
{
    if (!rho.manifold.is_constant() || rho.manifold.curvature() != 0.0)
        throw PreconditionError("reversed_hls_check: density must live on Euclidean space (c = 0)");
    if (lambda < 1.0) throw ParameterError("reversed_hls_check: needs lambda >= 1 so that the kernel is convex");
    if (c_values.size() < 2) throw PreconditionError("reversed_hls_check: need at least two curvature values");
    const int d = rho.manifold.dim();
    ReversedHLSReport rep;
    rep.c_values = c_values;
    const double m = mass(rho);
    const double Iq = power_integral(rho, q);
    double p = 0.0;
    for (double c : c_values) {
        const CLConstants k = cl_constants(lambda, q, c, d);
        p = k.p;
        const double kappa = std::pow(k.C1, -1.0 / (k.p * q));
        rep.constants.push_back(kappa);
        const double lhs = kappa * std::pow(Iq, 1.0 / (k.p * q)) * std::pow(m, -(1.0 - 2.0 * k.p) / k.p);
        const double rhs = 2.0 * interaction_energy(rho, Potential::sinh_power(lambda, c), {angular_nodes, 1});
        rep.finite_c.push_back(make_report(lhs, rhs, kappa, tolerance));
    }
    rep.cauchy = true;
    for (std::size_t i = 1; i < rep.constants.size(); ++i) {
        rep.differences.push_back(std::abs(rep.constants[i] - rep.constants[i - 1]));
        if (i >= 2 && !(rep.differences[i - 1] < rep.differences[i - 2])) rep.cauchy = false;
    }
    const std::size_t n = rep.constants.size();
    rep.limit_exponent =
        std::log(rep.constants[n - 1] / rep.constants[n - 2]) / std::log(c_values[n - 1] / c_values[n - 2]);
    if (rep.limit_exponent > 1e-12)
        rep.limit_constant = 0.0;
    else if (rep.limit_exponent > -1e-12)
        rep.limit_constant = rep.constants.back();
    else
        rep.limit_constant = kInf;
    const double lhs = rep.limit_constant * std::pow(Iq, 1.0 / (p * q)) * std::pow(m, -(1.0 - 2.0 * p) / p);
    const double rhs = 2.0 * interaction_energy(rho, Potential::sinh_power(lambda, 0.0), {angular_nodes, 1});
    rep.limit = make_report(lhs, rhs, rep.limit_constant, tolerance);
    rep.passed = rep.cauchy && rep.limit.passed &&
                 std::all_of(rep.finite_c.begin(), rep.finite_c.end(), [](const auto& r) { return r.passed; });
    return rep;
}

TailBound tightness_tail_bound(const RadialDensity& rho, double lambda, double c_m, double R)
{
    if (!(lambda > 0.0)) throw ParameterError("tightness_tail_bound: lambda must be positive");
    const double tail = tail_mass(rho, R);
    const double mom = sinh_moment(rho, lambda, c_m);
    const double bound = R <= 0.0 ? kInf : mom / std::exp(lambda * log_S(c_m, R));
    return {tail, bound, tail <= bound * (1.0 + 1e-9) + 1e-15};
}

TailBound tightness_tail_bound(const DiscreteMeasure& mu, double lambda, double c_m, double R)
{
    if (!(lambda > 0.0)) throw ParameterError("tightness_tail_bound: lambda must be positive");
    double tail = 0.0, mom = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double w = mu.weights(static_cast<Eigen::Index>(i));
        const double r = mu.radius(i);
        if (r >= R) tail += w;
        if (r > 0.0) mom += w * std::exp(lambda * log_S(c_m, r));
    }
    const double bound = R <= 0.0 ? kInf : mom / std::exp(lambda * log_S(c_m, R));
    return {tail, bound, tail <= bound * (1.0 + 1e-9) + 1e-15};
}

EnergyLowerBound energy_lower_bound_constants(double q, const Potential& h, double lambda, double c_m, int d,
                                              const LowerBoundOptions& opts)
{
    if (lambda < 1.0)
        throw ParameterError("energy lower bound: needs lambda >= 1 (convexity of (sinh(sqrt(c) r)/sqrt(c))^lambda)");
    if (h.singular_at_origin()) throw GrowthConditionError("energy lower bound: h is singular at 0");
    EnergyLowerBound out;
    out.constants = cl_constants(lambda, q, c_m, d);
    out.growth = growth_condition_check(h, ExistConst{c_m, q, d, lambda}, opts.growth);
    if (out.growth.classification != GrowthClass::bounded_away_from_zero) {
        std::ostringstream msg;
        msg << "h = " << h.describe() << " is not bounded below by a multiple of " << out.growth.comparator
            << " (trend: " << to_string(out.growth.classification) << ")";
        throw GrowthConditionError(msg.str());
    }
    // the empirical liminf of h / exp(sqrt(c) lambda theta) times the limit of exp(...)/S^lambda
    out.gamma1 = opts.gamma_factor * out.growth.liminf_estimate * std::pow(2.0, lambda) * std::pow(c_m, lambda / 2.0);
    const double log_g1 = std::log(out.gamma1);

    double g2 = kInf, gt2 = kInf;
    const std::size_t n = std::max<std::size_t>(opts.theta_samples, 16);
    const double tmax = std::min(opts.theta_max, h.domain_end());
    auto visit = [&](double t) {
        const double ls = t > 0.0 ? lambda * log_S(c_m, t) : -kInf;
        // h - gamma1 S^lambda without overflow
        const double lh = h.log_eval(t);
        const double lg = log_g1 + ls;
        double diff;
        if (std::isinf(lh) && lh < 0.0)
            diff = h(t) - std::exp(lg);
        else
            diff = -std::exp(lh) * std::expm1(lg - lh);
        g2 = std::min(g2, diff);
        gt2 = std::min(gt2, std::exp(ls) - t);
    };
    for (std::size_t i = 0; i < n; ++i) visit(tmax * static_cast<double>(i) / (n - 1));
    for (double t : log_spaced(1e-6, std::min(1.0, tmax), 200)) visit(t);
    out.gamma2 = g2;
    out.gamma_tilde1 = 1.0;
    out.gamma_tilde2 = gt2;

    const CLConstants& k = out.constants;
    const double pq = k.p * q;
    const double X = std::pow(4.0 * k.C1 * pq / ((1.0 - q) * out.gamma1), 1.0 / (1.0 - pq));
    out.C2 = -k.C1 / (1.0 - q) * std::pow(X, pq) + out.gamma1 * X / 4.0;
    out.C1_tilde = out.C2 + out.gamma2 / 2.0 + out.gamma1 / 4.0 * out.gamma_tilde2;
    out.C2_tilde = out.gamma1 / 4.0 * out.gamma_tilde1;
    std::ostringstream a;
    a << "gamma2 and gamma~2 are minima over a grid on [0, " << tmax << "]; beyond it h - gamma1 S^lambda and "
      << "S^lambda - theta are taken to be increasing, which holds once h / S^lambda stays above gamma1";
    out.assumptions = a.str();
    return out;
}

namespace {

double radial_w1(const RadialDensity& rho)
{
    return radial_moment(rho, [](double r) { return std::log(r); });
}

EnergyLowerBound finish_check(EnergyLowerBound b, double energy, double w1)
{
    b.energy = energy;
    b.w1 = w1;
    b.bound = b.C1_tilde + b.C2_tilde * w1;
    b.holds = energy >= b.bound - 1e-9 * std::max(1.0, std::abs(b.bound));
    return b;
}

} // namespace

EnergyLowerBound energy_lower_bound_check(const RadialDensity& rho, double q, const KernelMatrix& K,
                                          const Potential& h, double lambda, double c_m,
                                          const LowerBoundOptions& opts)
{
    EnergyLowerBound b = energy_lower_bound_constants(q, h, lambda, c_m, rho.manifold.dim(), opts);
    return finish_check(b, total_energy(rho, q, K).total, radial_w1(rho));
}

EnergyLowerBound energy_lower_bound_check(const RadialDensity& rho, double q, const Potential& h, double lambda,
                                          double c_m, const LowerBoundOptions& opts)
{
    const KernelMatrix K(rho.manifold, rho.r, h, opts.interaction.angular_nodes, opts.interaction.threads);
    return energy_lower_bound_check(rho, q, K, h, lambda, c_m, opts);
}

EnergyLowerBound energy_lower_bound_check(const DiscreteMeasure& mu, double q, const Potential& h, double lambda,
                                          double c_m, const LowerBoundOptions& opts)
{
    EnergyLowerBound b = energy_lower_bound_constants(q, h, lambda, c_m, mu.dim, opts);
    double w1 = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) w1 += mu.weights(static_cast<Eigen::Index>(i)) * mu.radius(i);
    return finish_check(b, total_energy(mu, q, h).total, w1);
}

} // namespace chfe
