#include "chfe/energy.hpp"

#include "chfe/errors.hpp"
#include "chfe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

namespace chfe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_q(double q)
{
    if (!(q > 0.0 && q < 1.0)) {
        std::ostringstream msg;
        msg << "diffusion exponent q = " << q << " must lie in (0, 1)";
        throw ParameterError(msg.str());
    }
}

} // namespace

double entropy_term(const RadialDensity& rho, double q)
{
    check_q(q);
    return power_integral(rho, q) / (q - 1.0);
}

const quad::Rule& angular_rule(int d, int nodes)
{
    if (d < 2) throw ParameterError("angular_rule: dimension must be at least 2");
    static std::mutex mtx;
    static std::map<std::pair<int, int>, std::unique_ptr<quad::Rule>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto& slot = cache[{d, nodes}];
    if (!slot) slot = std::make_unique<quad::Rule>(quad::gauss_gegenbauer(nodes, 0.5 * (d - 3)));
    return *slot;
}

double interaction_kernel(double c, int d, const Potential& h, double r, double s, int angular_nodes)
{
    if (r < 0.0 || s < 0.0) throw PreconditionError("interaction_kernel: radii must be >= 0");
    if (r == 0.0 || s == 0.0) return h(std::max(r, s));
    const quad::Rule& rule = angular_rule(d, angular_nodes);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        sum += rule.weights[k] * h(space_form_distance(c, r, s, 0.5 * (1.0 - rule.nodes[k])));
    return sum;
}

// ---------------------------------------------------------------- KernelMatrix

KernelMatrix::KernelMatrix(const ModelManifold& manifold, std::vector<double> r, const Potential& h,
                           int angular_nodes, int threads)
    : r_(std::move(r))
{
    if (!manifold.is_constant())
        throw UnsupportedManifold("interaction energies need exact distances, i.e. a constant-curvature manifold");
    const std::size_t n = r_.size();
    const double c = manifold.curvature();
    const int d = manifold.dim();
    const quad::Rule& rule = angular_rule(d, angular_nodes);
    const std::size_t m = rule.nodes.size();
    std::vector<double> S(m);
    for (std::size_t k = 0; k < m; ++k) S[k] = 0.5 * (1.0 - rule.nodes[k]);
    const double sc = std::sqrt(c);
    std::vector<double> sh(n);
    for (std::size_t i = 0; i < n; ++i) sh[i] = std::sinh(sc * r_[i]);

    K_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n, threads, [&](std::size_t i) {
        const double ri = r_[i];
        for (std::size_t j = i; j < n; ++j) {
            const double rj = r_[j];
            double val;
            if (ri == 0.0 || rj == 0.0) {
                val = h(std::max(ri, rj));
            } else if (c == 0.0) {
                val = 0.0;
                const double dr2 = (ri - rj) * (ri - rj);
                for (std::size_t k = 0; k < m; ++k) val += rule.weights[k] * h(std::sqrt(dr2 + 4.0 * ri * rj * S[k]));
            } else if (sc * (ri + rj) > 600.0) {
                val = 0.0;
                for (std::size_t k = 0; k < m; ++k) val += rule.weights[k] * h(space_form_distance(c, ri, rj, S[k]));
            } else {
                val = 0.0;
                const double half = std::sinh(0.5 * sc * (ri - rj));
                const double base = 2.0 * half * half;
                const double prod = 2.0 * sh[i] * sh[j];
                for (std::size_t k = 0; k < m; ++k) {
                    const double X = base + prod * S[k];
                    val += rule.weights[k] * h(std::log1p(X + std::sqrt(X * (X + 2.0))) / sc);
                }
            }
            K_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = val;
            K_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = val;
        }
    });

    const std::vector<double> W = node_weights(manifold, r_);
    W_ = Eigen::Map<const Eigen::VectorXd>(W.data(), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; i += 2) coarse_.push_back(i);
    if (coarse_.back() != n - 1) coarse_.push_back(n - 1);
    std::vector<double> rc;
    for (std::size_t i : coarse_) rc.push_back(r_[i]);
    const std::vector<double> Wc = node_weights(manifold, rc);
    W_coarse_ = Eigen::Map<const Eigen::VectorXd>(Wc.data(), static_cast<Eigen::Index>(Wc.size()));
}

Eigen::VectorXd KernelMatrix::convolve(const Eigen::VectorXd& rho) const
{
    return K_ * W_.cwiseProduct(rho);
}

double KernelMatrix::interaction(const Eigen::VectorXd& rho) const
{
    const Eigen::VectorXd m = W_.cwiseProduct(rho);
    return 0.5 * m.dot(K_ * m);
}

double KernelMatrix::interaction_coarse(const Eigen::VectorXd& rho) const
{
    const std::size_t nc = coarse_.size();
    Eigen::VectorXd m(static_cast<Eigen::Index>(nc));
    for (std::size_t a = 0; a < nc; ++a) m(static_cast<Eigen::Index>(a)) = W_coarse_(static_cast<Eigen::Index>(a)) * rho(static_cast<Eigen::Index>(coarse_[a]));
    double sum = 0.0;
    for (std::size_t a = 0; a < nc; ++a)
        for (std::size_t b = 0; b < nc; ++b)
            sum += m(static_cast<Eigen::Index>(a)) * m(static_cast<Eigen::Index>(b)) *
                   K_(static_cast<Eigen::Index>(coarse_[a]), static_cast<Eigen::Index>(coarse_[b]));
    return 0.5 * sum;
}

// ---------------------------------------------------------------- energies

namespace {

Eigen::VectorXd as_vector(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_same_grid(const RadialDensity& rho, const KernelMatrix& K)
{
    if (rho.r != K.grid()) throw PreconditionError("kernel matrix was built on a different radial grid");
}

// share of the interaction carried by nodes beyond 0.9 r_max
bool tail_dominated(const RadialDensity& rho, const KernelMatrix& K, double total)
{
    if (rho.compact_support || !(std::abs(total) > 0.0)) return false;
    const Eigen::VectorXd m = K.weights().cwiseProduct(as_vector(rho.rho));
    const Eigen::VectorXd v = K.matrix() * m;
    double tail = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho.r[i] >= 0.9 * rho.r_max()) tail += std::abs(m(static_cast<Eigen::Index>(i)) * v(static_cast<Eigen::Index>(i)));
    return tail > 1e-6 * 2.0 * std::abs(total);
}

} // namespace

double interaction_energy(const RadialDensity& rho, const KernelMatrix& K)
{
    check_same_grid(rho, K);
    const double val = K.interaction(as_vector(rho.rho));
    if (tail_dominated(rho, K, val)) return kInf;
    return val;
}

double interaction_energy(const RadialDensity& rho, const Potential& h, const InteractionOptions& opts)
{
    const KernelMatrix K(rho.manifold, rho.r, h, opts.angular_nodes, opts.threads);
    return interaction_energy(rho, K);
}

double interaction_energy(const DiscreteMeasure& mu, const Potential& h)
{
    const std::size_t n = mu.size();
    double sum = 0.0;
    const double h0 = h(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = mu.weights(static_cast<Eigen::Index>(i));
        sum += wi * wi * h0;
        double row = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) row += mu.weights(static_cast<Eigen::Index>(j)) * h(mu.distance(i, j));
        sum += 2.0 * wi * row;
    }
    return 0.5 * sum;
}

EnergyBreakdown total_energy(const RadialDensity& rho, double q, const KernelMatrix& K)
{
    check_q(q);
    check_same_grid(rho, K);
    EnergyBreakdown e;
    e.q = q;
    e.entropy = entropy_term(rho, q);
    const Eigen::VectorXd v = as_vector(rho.rho);
    const double fine = K.interaction(v);
    e.interaction = tail_dominated(rho, K, fine) ? kInf : fine;
    e.total = e.entropy + e.interaction;
    e.quadrature_error_estimate = std::abs(fine - K.interaction_coarse(v)) / 3.0;
    return e;
}

EnergyBreakdown total_energy(const RadialDensity& rho, double q, const Potential& h, const InteractionOptions& opts)
{
    check_q(q);
    const KernelMatrix K(rho.manifold, rho.r, h, opts.angular_nodes, opts.threads);
    return total_energy(rho, q, K);
}

EnergyBreakdown total_energy(const DiscreteMeasure& mu, double q, const Potential& h)
{
    check_q(q);
    EnergyBreakdown e;
    e.q = q;
    e.entropy = 0.0;
    e.interaction = interaction_energy(mu, h);
    e.total = e.interaction;
    return e;
}

double rhoR_entropy_bound(const ModelManifold& manifold, double R, double q)
{
    check_q(q);
    if (!(R > 0.0)) throw PreconditionError("rhoR_energy_bound: R must be positive");
    const double log_vol = log_ball_volume(manifold, R).lower;
    return -std::exp((1.0 - q) * log_vol) / (1.0 - q);
}

double rhoR_energy_bound(const ModelManifold& manifold, double R, double q, const Potential& h)
{
    return rhoR_entropy_bound(manifold, R, q) + 0.5 * h(2.0 * R);
}

std::string to_string(ScanVerdict v)
{
    switch (v) {
    case ScanVerdict::unbounded_below_blowup:
        return "unbounded_below_blowup";
    case ScanVerdict::unbounded_below_spreading:
        return "unbounded_below_spreading";
    case ScanVerdict::bounded_below_inconclusive:
        return "bounded_below_inconclusive";
    }
    return "?";
}

std::vector<double> log_spaced(double a, double b, std::size_t n)
{
    if (!(a > 0.0 && b > 0.0)) throw PreconditionError("log_spaced: endpoints must be positive");
    if (n == 0) return {};
    if (n == 1) return {a};
    std::vector<double> out(n);
    const double la = std::log(a), lb = std::log(b);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(la + (lb - la) * static_cast<double>(i) / (n - 1));
    out.front() = a;
    out.back() = b;
    return out;
}

namespace {

void fill_scan(ScanResult& res, const ModelManifold& manifold, double q, const Potential& h, const ScanOptions& opts,
               bool energies)
{
    const std::size_t n = res.R_values.size();
    res.bounds.assign(n, kNaN);
    res.energies.assign(n, EnergyBreakdown{kNaN, kNaN, kNaN, q, kNaN});
    parallel_for(n, opts.threads, [&](std::size_t k) {
        const double R = res.R_values[k];
        res.bounds[k] = rhoR_energy_bound(manifold, R, q, h);
        if (energies) {
            const RadialDensity rho = uniform_ball(manifold, R, opts.grid_size);
            res.energies[k] = total_energy(rho, q, h, InteractionOptions{opts.angular_nodes, 1});
        }
    });
}

bool trailing_decreasing(const std::vector<double>& v, double window)
{
    const std::size_t n = v.size();
    const std::size_t k0 = std::min(n - 1, static_cast<std::size_t>(std::floor(n * (1.0 - window))));
    for (std::size_t k = k0; k + 1 < n; ++k)
        if (!(v[k + 1] < v[k])) return false;
    return true;
}

} // namespace

ScanResult spreading_scan(const ModelManifold& manifold, double q, const Potential& h,
                          const std::vector<double>& R_list, const ScanOptions& opts)
{
    check_q(q);
    if (R_list.empty()) throw PreconditionError("spreading_scan: empty R list");
    for (std::size_t i = 0; i < R_list.size(); ++i) {
        if (!(R_list[i] > 0.0)) throw PreconditionError("spreading_scan: radii must be positive");
        if (i > 0 && !(R_list[i] > R_list[i - 1])) throw PreconditionError("spreading_scan: R list must increase");
    }
    ScanResult res;
    res.R_values = R_list;
    fill_scan(res, manifold, q, h, opts, opts.compute_energy && manifold.is_constant());
    const bool decreasing = trailing_decreasing(res.bounds, opts.window);
    const bool below = res.bounds.back() < opts.floor;
    std::ostringstream why;
    if (decreasing && below) {
        res.verdict = ScanVerdict::unbounded_below_spreading;
        why << "energy bound decreases over the last " << opts.window * 100 << "% of the scan and reaches "
            << res.bounds.back() << " < " << opts.floor
            << "; spreading uniform balls lower the energy without limit when h grows slower than the volume";
    } else {
        res.verdict = ScanVerdict::bounded_below_inconclusive;
        why << "energy bound " << (decreasing ? "decreases" : "does not decrease monotonically") << " and ends at "
            << res.bounds.back() << (below ? " (below floor)" : " (above floor)");
    }
    res.reason = why.str();
    return res;
}

ScanResult blowup_scan(const ModelManifold& manifold, double q, const Potential& h, const std::vector<double>& R_list,
                       const ScanOptions& opts)
{
    check_q(q);
    if (R_list.empty()) throw PreconditionError("blowup_scan: empty R list");
    for (std::size_t i = 0; i < R_list.size(); ++i) {
        if (!(R_list[i] > 0.0)) throw PreconditionError("blowup_scan: radii must be positive");
        if (i > 0 && !(R_list[i] < R_list[i - 1])) throw PreconditionError("blowup_scan: R list must decrease");
    }
    ScanResult res;
    res.R_values = R_list;
    fill_scan(res, manifold, q, h, opts, opts.compute_energy && manifold.is_constant() && !h.singular_at_origin());
    const std::size_t n = R_list.size();
    const double h_last = 0.5 * h(2.0 * R_list.back());
    const double ent_last = rhoR_entropy_bound(manifold, R_list.back(), q);
    const bool decreasing = trailing_decreasing(res.bounds, opts.window);
    // decrements must not saturate: compare the last quarter of the scan with the one before it
    bool sustained = false;
    if (n >= 8) {
        const std::size_t a = n / 2, b = (3 * n) / 4;
        const double d1 = res.bounds[a] - res.bounds[b];
        const double d2 = res.bounds[b] - res.bounds[n - 1];
        const double l1 = static_cast<double>(b - a), l2 = static_cast<double>(n - 1 - b);
        sustained = d1 > 0.0 && d2 / l2 >= 0.5 * d1 / l1;
    }
    const bool entropy_vanishes = std::abs(ent_last) < 1e-6;
    std::ostringstream why;
    if (decreasing && sustained && h_last < opts.blowup_floor && entropy_vanishes) {
        res.verdict = ScanVerdict::unbounded_below_blowup;
        why << "h(2R)/2 reaches " << h_last << " < " << opts.blowup_floor << " with sustained decrease while the "
            << "entropy term is " << ent_last << "; concentrating uniform balls drive the energy to -infinity when h "
            << "is singular at 0";
    } else {
        res.verdict = ScanVerdict::bounded_below_inconclusive;
        why << "h(2R)/2 ends at " << h_last << ", entropy term " << ent_last
            << (decreasing ? ", decreasing" : ", not monotone") << (sustained ? "" : ", decrements saturate");
    }
    res.reason = why.str();
    return res;
}

// ---------------------------------------------------------------- growth tests

double lambda_threshold(int d, double q)
{
    return (d - 1) * (1.0 - q) / q;
}

std::string to_string(GrowthClass g)
{
    switch (g) {
    case GrowthClass::vanishing:
        return "vanishing";
    case GrowthClass::bounded_away_from_zero:
        return "bounded_away_from_zero";
    case GrowthClass::inconclusive:
        return "inconclusive";
    }
    return "?";
}

namespace {

void check_mode(const GrowthMode& mode)
{
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            check_q(m.q);
            if (m.d < 2) throw ParameterError("growth check: dimension must be at least 2");
            if constexpr (std::is_same_v<T, NonexistConst>) {
                if (!(m.c_M > 0.0)) throw ParameterError("growth check: c_M must be positive");
            } else if constexpr (std::is_same_v<T, ExistConst>) {
                if (!(m.c_m > 0.0)) throw ParameterError("growth check: c_m must be positive");
                const double thr = lambda_threshold(m.d, m.q);
                if (!(m.lambda > thr)) {
                    std::ostringstream msg;
                    msg << "growth check: lambda = " << m.lambda << " must exceed (d-1)(1-q)/q = " << thr;
                    throw ParameterError(msg.str());
                }
            } else if constexpr (std::is_same_v<T, NonexistVar>) {
                if (!(m.eps > 0.0 && m.eps < 1.0)) throw ParameterError("growth check: eps must lie in (0, 1)");
                if (!(m.delta > 0.0)) throw ParameterError("growth check: delta must be positive");
            } else {
                const double thr = lambda_threshold(m.d, m.q);
                if (!(m.lambda_tilde > thr)) {
                    std::ostringstream msg;
                    msg << "growth check: lambda = " << m.lambda_tilde << " must exceed (d-1)(1-q)/q = " << thr;
                    throw ParameterError(msg.str());
                }
            }
        },
        mode);
}

std::string describe_mode(const GrowthMode& mode)
{
    std::ostringstream s;
    std::visit(
        [&s](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NonexistConst>)
                s << "exp(sqrt(c_M)(d-1)(1-q) theta/2), c_M=" << m.c_M;
            else if constexpr (std::is_same_v<T, ExistConst>)
                s << "exp(sqrt(c_m) lambda theta), c_m=" << m.c_m << ", lambda=" << m.lambda;
            else if constexpr (std::is_same_v<T, NonexistVar>)
                s << "exp((1-eps)(d-1)(1-q) int_0^{theta/2-delta} sqrt(c_M)), c_M=" << m.c_M.describe()
                  << ", eps=" << m.eps << ", delta=" << m.delta;
            else
                s << "exp(lambda int_0^theta sqrt(c_m)), c_m=" << m.c_m.describe() << ", lambda=" << m.lambda_tilde;
        },
        mode);
    return s.str();
}

} // namespace

double log_comparator(const GrowthMode& mode, double theta)
{
    return std::visit(
        [theta](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NonexistConst>)
                return std::sqrt(m.c_M) * (m.d - 1) * (1.0 - m.q) * theta / 2.0;
            else if constexpr (std::is_same_v<T, ExistConst>)
                return std::sqrt(m.c_m) * m.lambda * theta;
            else if constexpr (std::is_same_v<T, NonexistVar>) {
                const double upper = theta / 2.0 - m.delta;
                if (upper <= 0.0) return 0.0;
                return (1.0 - m.eps) * (m.d - 1) * (1.0 - m.q) * m.c_M.sqrt_integral(0.0, upper);
            } else
                return m.lambda_tilde * m.c_m.sqrt_integral(0.0, theta);
        },
        mode);
}

GrowthReport growth_condition_check(const Potential& h, const GrowthMode& mode, const GrowthOptions& opts)
{
    check_mode(mode);
    if (!(opts.theta_max > opts.theta_min && opts.theta_min > 0.0) || opts.samples < 8)
        throw ParameterError("growth check: need 0 < theta_min < theta_max and at least 8 samples");
    GrowthReport rep;
    rep.comparator = describe_mode(mode);
    const double theta_max = std::min(opts.theta_max, h.domain_end());
    rep.theta = log_spaced(opts.theta_min, theta_max, opts.samples);
    rep.log_ratio.resize(rep.theta.size());
    for (std::size_t i = 0; i < rep.theta.size(); ++i)
        rep.log_ratio[i] = h.log_eval(rep.theta[i]) - log_comparator(mode, rep.theta[i]);

    const std::size_t n = rep.theta.size();
    const std::size_t k0 = n / 2;
    const double level = std::log(opts.vanish_level);
    double lo = kInf, hi = -kInf;
    bool nonincreasing = true;
    for (std::size_t k = k0; k < n; ++k) {
        const double L = rep.log_ratio[k];
        lo = std::min(lo, L);
        hi = std::max(hi, L);
        if (k > k0 && L > rep.log_ratio[k - 1] + 1e-12 * std::abs(rep.log_ratio[k - 1])) nonincreasing = false;
    }
    const double last = rep.log_ratio.back();
    rep.liminf_estimate = std::exp(lo);
    if (nonincreasing && last < level)
        rep.classification = GrowthClass::vanishing;
    else if (lo > level && hi - last < 1.0)
        rep.classification = GrowthClass::bounded_away_from_zero;
    else
        rep.classification = GrowthClass::inconclusive;
    return rep;
}

RatioLimit ratio_limit_2lambda(double lambda, double c_m, double theta)
{
    if (!(lambda > 0.0) || !(c_m > 0.0)) throw ParameterError("ratio_limit_2lambda: need lambda > 0 and c_m > 0");
    if (!(theta > 0.0)) throw PreconditionError("ratio_limit_2lambda: theta must be positive");
    const double k = std::sqrt(c_m);
    // (2 sqrt(c) / (1 - e^{-2 sqrt(c) theta}))^lambda, free of overflow
    const double value = std::exp(lambda * (std::log(2.0 * k) - std::log1p(-std::exp(-2.0 * k * theta))));
    const double limit = std::pow(2.0, lambda) * std::pow(c_m, lambda / 2.0);
    return {value, limit, std::abs(value - limit)};
}

} // namespace chfe
