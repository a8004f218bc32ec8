#include "chfe/groundstate.hpp"

#include "chfe/errors.hpp"
#include "chfe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chfe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd as_vector(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> as_std(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

// nodal energy: (1/(q-1)) sum W rho^q + 1/2 sum W W rho rho K
struct NodalEnergy {
    double entropy;
    double interaction;
    double total() const { return entropy + interaction; }
};

NodalEnergy nodal_energy(const KernelMatrix& K, const Eigen::VectorXd& rho, double q)
{
    const Eigen::VectorXd& W = K.weights();
    double s = 0.0;
    for (Eigen::Index i = 0; i < rho.size(); ++i)
        if (rho(i) > 0.0) s += W(i) * std::pow(rho(i), q);
    return {s / (q - 1.0), K.interaction(rho)};
}

double nodal_foc(const KernelMatrix& K, const Eigen::VectorXd& rho, const Eigen::VectorXd& V, double q,
                 double lambda)
{
    const double peak = rho.maxCoeff();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < rho.size(); ++i) {
        if (!(rho(i) >= 1e-14 * peak) || rho(i) <= 0.0) continue;
        const double r = std::abs(q / (q - 1.0) * std::pow(rho(i), q - 1.0) + V(i) - lambda);
        worst = std::max(worst, r);
    }
    (void)K;
    return worst / std::max(1.0, std::abs(lambda));
}

} // namespace

MultiplierSolve solve_multiplier(const Eigen::VectorXd& V, const Eigen::VectorXd& W, double q, double rel_tol)
{
    if (V.size() != W.size() || V.size() == 0) throw PreconditionError("solve_multiplier: size mismatch");
    const double vmin = V.minCoeff();
    const double a = 1.0 / (1.0 - q);
    const double log_k = std::log((1.0 - q) / q);
    // lambda = vmin - e^t; the mass decreases in t
    auto log_mass = [&](double t) {
        const double et = std::exp(t);
        double peak = -kInf;
        std::vector<double> terms(static_cast<std::size_t>(V.size()));
        for (Eigen::Index i = 0; i < V.size(); ++i) {
            const double lt = std::log(W(i)) - a * (log_k + std::log((V(i) - vmin) + et));
            terms[static_cast<std::size_t>(i)] = lt;
            peak = std::max(peak, lt);
        }
        double s = 0.0;
        for (double lt : terms) s += std::exp(lt - peak);
        return peak + std::log(s);
    };
    double lo = -1.0, hi = 1.0;
    int guard = 0;
    while (log_mass(lo) < 0.0) {
        lo = lo * 2.0 - 1.0;
        if (++guard > 200) throw IntegratorFailure("solve_multiplier: cannot bracket the multiplier from below");
    }
    guard = 0;
    while (log_mass(hi) > 0.0) {
        hi = hi * 2.0 + 1.0;
        if (++guard > 200) throw IntegratorFailure("solve_multiplier: cannot bracket the multiplier from above");
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
        t = 0.5 * (lo + hi);
        if (!(t > lo && t < hi)) break;
        const double lm = log_mass(t);
        if (lm == 0.0) break;
        if (lm > 0.0)
            lo = t;
        else
            hi = t;
    }
    const double et = std::exp(t);
    MultiplierSolve out;
    out.lambda = vmin - et;
    out.density.resize(V.size());
    for (Eigen::Index i = 0; i < V.size(); ++i) out.density(i) = std::exp(-a * (log_k + std::log((V(i) - vmin) + et)));
    const double m = W.dot(out.density);
    out.mass_error = std::abs(m - 1.0);
    if (!(out.mass_error <= rel_tol))
        throw IntegratorFailure("solve_multiplier: mass constraint not met to the requested tolerance");
    out.density /= m;
    return out;
}

double infer_growth_rate(const Potential& h, double c, const GrowthOptions& growth)
{
    const auto& p = h.parameters();
    switch (h.kind()) {
    case PotentialKind::sinh_power:
        return p[1] > 0.0 ? p[0] * std::sqrt(p[1] / c) : 0.0;
    case PotentialKind::exp_rate:
        return p[0] * std::sqrt(p[1] / c);
    case PotentialKind::double_exp:
        return kInf;
    case PotentialKind::power:
    case PotentialKind::log1p:
        return 0.0;
    case PotentialKind::tabulated: {
        const double b = std::min(growth.theta_max, h.domain_end());
        const double a = 0.5 * b;
        const double la = h.log_eval(a), lb = h.log_eval(b);
        if (!std::isfinite(la) || !std::isfinite(lb)) return 0.0;
        return (lb - la) / (std::sqrt(c) * (b - a));
    }
    }
    return 0.0;
}

double check_existence_regime(const ModelManifold& manifold, double q, const Potential& h,
                              const MinimizeOptions& opts)
{
    const double c = manifold.curvature();
    const int d = manifold.dim();
    if (!(c > 0.0)) throw UnsupportedManifold("ground-state search needs a hyperbolic manifold (c > 0)");
    if (h.singular_at_origin()) {
        throw GrowthConditionError("refusing: h(0+) = -inf, so uniform balls shrinking to the pole drive the energy "
                                   "to -infinity (nonexistence by blow-up); no ground state exists");
    }
    if (!h.zero_at_origin()) throw ParameterError("ground-state search requires h(0) = 0");
    const GrowthReport spread = growth_condition_check(h, NonexistConst{c, q, d}, opts.growth);
    if (spread.classification == GrowthClass::vanishing) {
        std::ostringstream msg;
        msg << "refusing: h = " << h.describe() << " grows slower than " << spread.comparator
            << ", so uniform balls spreading to infinity drive the energy to -infinity (nonexistence by spreading); "
            << "no ground state exists";
        throw GrowthConditionError(msg.str());
    }
    const double thr = lambda_threshold(d, q);
    double lambda = opts.lambda ? *opts.lambda : infer_growth_rate(h, c, opts.growth);
    if (std::isinf(lambda)) lambda = std::max(thr + 1.0, 1.0);
    if (!(lambda > thr)) {
        std::ostringstream msg;
        msg << "refusing: the growth rate of h = " << h.describe() << " is lambda = " << lambda
            << ", not above (d-1)(1-q)/q = " << thr << ", so existence of a ground state is not guaranteed";
        throw GrowthConditionError(msg.str());
    }
    const GrowthReport exist = growth_condition_check(h, ExistConst{c, q, d, lambda}, opts.growth);
    if (exist.classification != GrowthClass::bounded_away_from_zero) {
        std::ostringstream msg;
        msg << "refusing: h = " << h.describe() << " is not bounded below by a multiple of " << exist.comparator
            << " (trend: " << to_string(exist.classification) << ")";
        throw GrowthConditionError(msg.str());
    }
    return lambda;
}

MinimizerResult minimize_radial(const ModelManifold& manifold, double q, const Potential& h,
                                const std::optional<RadialDensity>& init, const MinimizeOptions& opts)
{
    if (!(q > 0.0 && q < 1.0)) throw ParameterError("q must lie in (0, 1)");
    if (!manifold.is_constant()) throw UnsupportedManifold("ground-state search needs a constant-curvature manifold");
    if (opts.grid_size < 8) throw ParameterError("minimize_radial: grid_size too small");
    if (!(opts.r_max > 0.0)) throw ParameterError("minimize_radial: r_max must be positive");
    check_existence_regime(manifold, q, h, opts);
    const KernelMatrix K(manifold, uniform_grid(opts.r_max, opts.grid_size), h, opts.angular_nodes, opts.threads);
    return minimize_radial(manifold, q, h, K, init, opts);
}

MinimizerResult minimize_radial(const ModelManifold& manifold, double q, const Potential& h, const KernelMatrix& K,
                                const std::optional<RadialDensity>& init, const MinimizeOptions& opts)
{
    if (!(q > 0.0 && q < 1.0)) throw ParameterError("q must lie in (0, 1)");
    h.validate(std::min(2.0 * K.grid().back(), 200.0));
    const double lambda_used = check_existence_regime(manifold, q, h, opts);
    const std::vector<double>& r = K.grid();
    const Eigen::VectorXd& W = K.weights();
    const std::size_t n = r.size();

    Eigen::VectorXd rho(static_cast<Eigen::Index>(n));
    {
        const RadialDensity start = init ? *init : uniform_ball(manifold, std::min(1.0, r.back()), 257);
        for (std::size_t i = 0; i < n; ++i) rho(static_cast<Eigen::Index>(i)) = start(r[i]);
        const double m = W.dot(rho);
        if (!(m > 0.0)) throw PreconditionError("minimize_radial: initial density has no mass on the grid");
        rho /= m;
    }

    MinimizerResult res;
    res.lambda_used = lambda_used;
    NodalEnergy E = nodal_energy(K, rho, q);
    double lambda = 0.0;
    double foc = kInf;
    double last_alpha = opts.initial_damping;
    bool stalled = false;
    std::size_t it = 0;
    for (; it < opts.max_iterations; ++it) {
        const Eigen::VectorXd V = K.convolve(rho);
        const MultiplierSolve ms = solve_multiplier(V, W, q, opts.multiplier_tol);
        lambda = ms.lambda;
        foc = nodal_foc(K, rho, V, q, lambda);
        if (it > 0 && foc < opts.foc_tol && !res.history.empty()) {
            const double prev = res.history.size() >= 2 ? res.history[res.history.size() - 2].energy : kInf;
            if (std::abs(prev - E.total()) <= opts.energy_tol * std::max(1.0, std::abs(E.total()))) break;
        }
        double alpha = opts.initial_damping;
        bool accepted = false;
        Eigen::VectorXd trial;
        NodalEnergy Et{};
        while (alpha >= opts.min_damping) {
            trial = (1.0 - alpha) * rho + alpha * ms.density;
            Et = nodal_energy(K, trial, q);
            if (Et.total() <= E.total() + 1e-15 * std::abs(E.total())) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            stalled = true;
            break;
        }
        rho = trial;
        E = Et;
        last_alpha = alpha;
        IterationRecord rec{it + 1, E.total(), E.entropy, E.interaction, foc, lambda, alpha};
        res.history.push_back(rec);
        if (opts.on_iteration) opts.on_iteration(rec);
    }
    // residual of the final iterate
    {
        const Eigen::VectorXd V = K.convolve(rho);
        const MultiplierSolve ms = solve_multiplier(V, W, q, opts.multiplier_tol);
        lambda = ms.lambda;
        foc = nodal_foc(K, rho, V, q, lambda);
    }
    res.iterations = res.history.size();
    // the discrete problem lives on the ball B_{r_max}, so the iterate is compactly supported there
    res.density = RadialDensity(manifold, r, as_std(rho), true);
    // report the discrete energy that was minimized; the gap to the quadrature of the
    // interpolant is folded into the error estimate
    {
        const EnergyBreakdown quad_e = total_energy(res.density, q, K);
        res.energy.q = q;
        res.energy.entropy = E.entropy;
        res.energy.interaction = E.interaction;
        res.energy.total = E.total();
        res.energy.quadrature_error_estimate =
            std::max(quad_e.quadrature_error_estimate, std::abs(quad_e.entropy - E.entropy));
    }
    res.foc_residual = foc;
    res.lagrange_multiplier = lambda;
    res.converged = foc < opts.foc_tol;
    const double m = mass(res.density);
    res.concentration = (m - tail_mass(res.density, r[1])) / m;
    std::ostringstream diag;
    diag << "iterations=" << res.iterations << " foc_residual=" << foc << " last_damping=" << last_alpha
         << " lambda_used=" << lambda_used;
    if (stalled) diag << " stalled: no damping down to " << opts.min_damping << " decreased the energy";
    if (!res.converged && it >= opts.max_iterations) diag << " iteration limit reached";
    res.diagnostics = diag.str();
    return res;
}

double foc_residual(const RadialDensity& rho, double q, const KernelMatrix& K, double lambda_mult)
{
    if (rho.r != K.grid()) throw PreconditionError("foc_residual: kernel built on a different grid");
    const Eigen::VectorXd v = as_vector(rho.rho);
    return nodal_foc(K, v, K.convolve(v), q, lambda_mult);
}

double foc_residual(const RadialDensity& rho, double q, const Potential& h, double lambda_mult, int angular_nodes)
{
    const KernelMatrix K(rho.manifold, rho.r, h, angular_nodes, 1);
    return foc_residual(rho, q, K, lambda_mult);
}

double wasserstein1_to_pole(const RadialDensity& rho)
{
    return radial_moment(rho, [](double r) { return std::log(r); });
}

double wasserstein1_to_pole(const DiscreteMeasure& mu)
{
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weights(static_cast<Eigen::Index>(i)) * mu.radius(i);
    return s;
}

ProbeComparison probe_energies(const ModelManifold& manifold, double q, const Potential& h, std::size_t n,
                               double R_min, double R_max, std::size_t grid_size, int angular_nodes, int threads)
{
    ProbeComparison out;
    out.R = log_spaced(R_min, R_max, n);
    out.energy.assign(n, kInf);
    parallel_for(n, threads, [&](std::size_t k) {
        const RadialDensity rho = uniform_ball(manifold, out.R[k], grid_size);
        out.energy[k] = total_energy(rho, q, h, {angular_nodes, 1}).total;
    });
    out.best_energy = kInf;
    for (std::size_t k = 0; k < n; ++k) {
        if (out.energy[k] < out.best_energy) {
            out.best_energy = out.energy[k];
            out.best_R = out.R[k];
        }
    }
    return out;
}

ExistenceCertificate existence_certificate(const MinimizerResult& result, double lambda, double c_m,
                                           const Potential& h, double q, const LowerBoundOptions& lb_opts,
                                           std::size_t probe_count)
{
    ExistenceCertificate cert;
    const RadialDensity& rho = result.density;
    const KernelMatrix K(rho.manifold, rho.r, h, lb_opts.interaction.angular_nodes, lb_opts.interaction.threads);
    cert.lower_bound = energy_lower_bound_check(rho, q, K, h, lambda, c_m, lb_opts);
    cert.lower_bound_ok = cert.lower_bound.holds;
    cert.tail_R = {1.0, 2.0, 5.0, 10.0};
    cert.tails_ok = true;
    for (double R : cert.tail_R) {
        cert.tails.push_back(tightness_tail_bound(rho, lambda, c_m, R));
        cert.tails_ok = cert.tails_ok && cert.tails.back().holds;
    }
    cert.probes = probe_energies(rho.manifold, q, h, probe_count, 1e-2, 1e2, 256, lb_opts.interaction.angular_nodes,
                                 lb_opts.interaction.threads);
    cert.probes_ok = result.energy.total <= cert.probes.best_energy;
    cert.passed = cert.lower_bound_ok && cert.tails_ok && cert.probes_ok;
    return cert;
}

} // namespace chfe
