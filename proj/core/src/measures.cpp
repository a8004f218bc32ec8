#include "chfe/measures.hpp"

#include "chfe/errors.hpp"
#include "chfe/quadrature.hpp"
#include "chfe/random.hpp"
#include "pchip_compat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace chfe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const quad::Rule& cell_rule(int order)
{
    static const quad::Rule r8 = quad::gauss_legendre(8);
    if (order == 8) return r8;
    static thread_local quad::Rule other;
    other = quad::gauss_legendre(order);
    return other;
}

void check_grid(const std::vector<double>& r)
{
    if (r.size() < 2) throw PreconditionError("radial grid needs at least two nodes");
    if (r.front() != 0.0) throw PreconditionError("radial grid must start at r = 0");
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i] > r[i - 1])) throw PreconditionError("radial grid must be strictly increasing");
}

double log_volume_density(const ModelManifold& m, double x)
{
    return (m.dim() - 1) * m.log_warp(x) + std::log(m.dim() * unit_ball_volume(m.dim()));
}

} // namespace

std::vector<double> radial_grid(double r_max, std::size_t n, double split)
{
    if (!(r_max > 0.0)) throw PreconditionError("radial_grid: r_max must be positive");
    if (n < 3) throw PreconditionError("radial_grid: need at least 3 nodes");
    if (!(split > 0.0 && split < 1.0)) throw PreconditionError("radial_grid: split must lie in (0, 1)");
    const std::size_t n_geo = std::max<std::size_t>(1, (n - 1) / 4);
    const std::size_t n_uni = n - 1 - n_geo;
    const double r_split = split * r_max;
    const double r_min = 1e-6 * r_max;
    std::vector<double> r;
    r.reserve(n);
    r.push_back(0.0);
    for (std::size_t i = 0; i < n_geo; ++i) {
        const double t = n_geo == 1 ? 0.0 : static_cast<double>(i) / (n_geo - 1);
        r.push_back(r_min * std::pow(r_split / r_min, t));
    }
    for (std::size_t i = 1; i <= n_uni; ++i) r.push_back(r_split + (r_max - r_split) * static_cast<double>(i) / n_uni);
    r.back() = r_max;
    return r;
}

std::vector<double> uniform_grid(double r_max, std::size_t n)
{
    if (!(r_max > 0.0)) throw PreconditionError("uniform_grid: r_max must be positive");
    if (n < 2) throw PreconditionError("uniform_grid: need at least 2 nodes");
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = r_max * static_cast<double>(i) / (n - 1);
    r.back() = r_max;
    return r;
}

// ---------------------------------------------------------------- RadialDensity

RadialDensity::RadialDensity(ModelManifold m, std::vector<double> r_, std::vector<double> rho_, bool compact)
    : manifold(std::move(m)), r(std::move(r_)), rho(std::move(rho_)), compact_support(compact)
{
    check_grid(r);
    if (r.size() != rho.size()) throw PreconditionError("RadialDensity: grid and values differ in length");
    for (double v : rho)
        if (!(v >= 0.0) || !std::isfinite(v)) throw PreconditionError("RadialDensity: values must be finite and >= 0");
    if (r.back() > manifold.radius_limit())
        throw PreconditionError("RadialDensity: grid extends beyond the manifold's solved radius");
}

double RadialDensity::operator()(double radius) const
{
    if (radius < 0.0) throw PreconditionError("RadialDensity: negative radius");
    if (radius > r.back()) return 0.0;
    auto it = std::upper_bound(r.begin(), r.end(), radius);
    if (it == r.end()) return rho.back();
    const std::size_t i = static_cast<std::size_t>(it - r.begin()) - 1;
    const double t = (radius - r[i]) / (r[i + 1] - r[i]);
    return (1.0 - t) * rho[i] + t * rho[i + 1];
}

RadialDensity RadialDensity::scaled(double t) const
{
    if (!(t >= 0.0)) throw PreconditionError("RadialDensity::scaled: factor must be >= 0");
    RadialDensity out = *this;
    for (double& v : out.rho) v *= t;
    return out;
}

RadialQuadrature RadialQuadrature::build(const ModelManifold& manifold, const std::vector<double>& r, int order)
{
    check_grid(r);
    if (!manifold.is_exact())
        throw UnsupportedManifold("radial quadrature needs exact volumes (constant curvature or a model manifold)");
    const quad::Rule& rule = cell_rule(order);
    RadialQuadrature q;
    const std::size_t m = (r.size() - 1) * rule.nodes.size();
    q.x.reserve(m);
    q.w.reserve(m);
    q.cell.reserve(m);
    q.t.reserve(m);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        const double half = 0.5 * (r[i + 1] - r[i]);
        const double mid = 0.5 * (r[i + 1] + r[i]);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double x = mid + half * rule.nodes[k];
            q.x.push_back(x);
            q.w.push_back(half * rule.weights[k] * std::exp(log_volume_density(manifold, x)));
            q.cell.push_back(i);
            q.t.push_back(0.5 * (1.0 + rule.nodes[k]));
        }
    }
    return q;
}

std::vector<double> RadialQuadrature::interpolate(const std::vector<double>& values) const
{
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const std::size_t i = cell[k];
        out[k] = (1.0 - t[k]) * values[i] + t[k] * values[i + 1];
    }
    return out;
}

std::vector<double> node_weights(const ModelManifold& manifold, const std::vector<double>& r)
{
    const RadialQuadrature q = RadialQuadrature::build(manifold, r);
    std::vector<double> W(r.size(), 0.0);
    for (std::size_t k = 0; k < q.x.size(); ++k) {
        W[q.cell[k]] += (1.0 - q.t[k]) * q.w[k];
        W[q.cell[k] + 1] += q.t[k] * q.w[k];
    }
    return W;
}

RadialDensity uniform_ball(const ModelManifold& manifold, double R, std::size_t grid_size)
{
    if (!(R > 0.0)) throw PreconditionError("uniform_ball: R must be positive");
    if (!manifold.is_exact())
        throw UnsupportedManifold("uniform_ball: the ball volume is only bounded on a bound-only manifold");
    std::vector<double> r = uniform_grid(R, std::max<std::size_t>(grid_size, 2));
    RadialDensity ones(manifold, r, std::vector<double>(r.size(), 1.0), true);
    const double vol = mass(ones);
    return ones.scaled(1.0 / vol);
}

RadialDensity density_from_function(const ModelManifold& manifold, const std::vector<double>& r,
                                    const std::function<double(double)>& f, bool compact_support)
{
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) v[i] = f(r[i]);
    return normalize(RadialDensity(manifold, r, std::move(v), compact_support));
}

namespace {

// sum over Gauss points of w * rho * exp(log_weight), with per-point contributions kept for the tail test
double weighted_integral(const RadialDensity& rho, const std::function<double(double)>* log_weight,
                         bool tail_test)
{
    const RadialQuadrature q = RadialQuadrature::build(rho.manifold, rho.r);
    const std::vector<double> vals = q.interpolate(rho.rho);
    double total = 0.0;
    double tail = 0.0;
    const double tail_start = 0.9 * rho.r.back();
    for (std::size_t k = 0; k < q.x.size(); ++k) {
        if (vals[k] == 0.0) continue;
        double g = vals[k] * q.w[k];
        if (log_weight) g *= std::exp((*log_weight)(q.x[k]));
        total += g;
        if (q.x[k] >= tail_start) tail += g;
    }
    if (tail_test && !rho.compact_support && total > 0.0 && tail > 1e-6 * total) return kInf;
    return total;
}

} // namespace

double mass(const RadialDensity& rho)
{
    return weighted_integral(rho, nullptr, false);
}

RadialDensity normalize(const RadialDensity& rho)
{
    const double m = mass(rho);
    if (!(m > 0.0) || !std::isfinite(m)) throw PreconditionError("normalize: density has zero or infinite mass");
    return rho.scaled(1.0 / m);
}

double radial_moment(const RadialDensity& rho, const std::function<double(double)>& log_weight)
{
    return weighted_integral(rho, &log_weight, true);
}

double sinh_moment(const RadialDensity& rho, double lambda)
{
    return sinh_moment(rho, lambda, rho.manifold.curvature());
}

double sinh_moment(const RadialDensity& rho, double lambda, double c_sinh)
{
    if (lambda < 0.0) throw PreconditionError("sinh_moment: lambda must be >= 0");
    if (lambda == 0.0) return mass(rho);
    std::function<double(double)> lw = [lambda, c_sinh](double x) { return lambda * log_psi_closed_form(c_sinh, x); };
    return radial_moment(rho, lw);
}

double psi_moment(const RadialDensity& rho, double lambda, const PsiSolution& psi)
{
    if (lambda < 0.0) throw PreconditionError("psi_moment: lambda must be >= 0");
    if (lambda == 0.0) return mass(rho);
    if (rho.r.back() > psi.theta_max())
        throw PreconditionError("psi_moment: density grid extends beyond the psi solution");
    std::function<double(double)> lw = [lambda, &psi](double x) { return lambda * psi.log_value(x); };
    return radial_moment(rho, lw);
}

double power_integral(const RadialDensity& rho, double q)
{
    const RadialQuadrature quadr = RadialQuadrature::build(rho.manifold, rho.r);
    const std::vector<double> vals = quadr.interpolate(rho.rho);
    double total = 0.0;
    for (std::size_t k = 0; k < quadr.x.size(); ++k)
        if (vals[k] > 0.0) total += quadr.w[k] * std::pow(vals[k], q);
    return total;
}

double tail_mass(const RadialDensity& rho, double R)
{
    if (R <= 0.0) return mass(rho);
    if (R >= rho.r.back()) return 0.0;
    const ModelManifold& m = rho.manifold;
    if (!m.is_exact()) throw UnsupportedManifold("tail_mass needs exact volumes");
    const quad::Rule& rule = cell_rule(8);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < rho.r.size(); ++i) {
        const double a = std::max(R, rho.r[i]);
        const double b = rho.r[i + 1];
        if (!(b > a)) continue;
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double x = mid + half * rule.nodes[k];
            total += half * rule.weights[k] * rho(x) * std::exp(log_volume_density(m, x));
        }
    }
    return total;
}

// ---------------------------------------------------------------- DiscreteMeasure

double DiscreteMeasure::distance(std::size_t i, std::size_t j) const
{
    const auto vi = log_points.row(static_cast<Eigen::Index>(i));
    const auto vj = log_points.row(static_cast<Eigen::Index>(j));
    const double r = vi.norm();
    const double s = vj.norm();
    if (r == 0.0 || s == 0.0) return space_form_distance(c, r, s, 0.0);
    // sin^2(phi/2) = |u_i - u_j|^2 / 4 for unit directions u
    const double S = (vi / r - vj / s).squaredNorm() / 4.0;
    return space_form_distance(c, r, s, std::min(S, 1.0));
}

Eigen::VectorXd DiscreteMeasure::tangent_mean() const
{
    return log_points.transpose() * weights;
}

DiscreteMeasure DiscreteMeasure::scaled(double t) const
{
    if (!(t > 0.0)) throw PreconditionError("DiscreteMeasure::scaled: factor must be positive");
    DiscreteMeasure out = *this;
    out.weights *= t;
    return out;
}

DiscreteMeasure DiscreteMeasure::shifted(const Eigen::VectorXd& offset) const
{
    if (offset.size() != dim) throw PreconditionError("DiscreteMeasure::shifted: offset has wrong dimension");
    DiscreteMeasure out = *this;
    out.log_points.rowwise() += offset.transpose();
    out.centred = false;
    return out;
}

DiscreteMeasure make_centred_cloud(int dim, double c, std::size_t n, std::uint64_t seed, bool equal_weights,
                                   double scale)
{
    if (dim < 2) throw ParameterError("make_centred_cloud: dimension must be at least 2");
    if (n < 1) throw PreconditionError("make_centred_cloud: need at least one point");
    if (!(c >= 0.0)) throw ParameterError("make_centred_cloud: curvature magnitude must be >= 0");
    CounterRng rng(seed, 0);
    DiscreteMeasure mu;
    mu.dim = dim;
    mu.c = c;
    const auto N = static_cast<Eigen::Index>(n);
    mu.log_points.resize(N, dim);
    mu.weights.resize(N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (int k = 0; k < dim; ++k) mu.log_points(i, k) = scale * rng.normal();
    for (Eigen::Index i = 0; i < N; ++i) mu.weights(i) = equal_weights ? 1.0 : rng.uniform(0.5, 1.5);
    mu.weights /= mu.weights.sum();
    const Eigen::VectorXd mean = mu.tangent_mean();
    mu.log_points.rowwise() -= mean.transpose();
    mu.centred = true;
    return mu;
}

// ---------------------------------------------------------------- Potential

Potential Potential::power(double beta)
{
    if (!std::isfinite(beta)) throw ParameterError("Potential::power: exponent must be finite");
    Potential p;
    p.kind_ = PotentialKind::power;
    p.params_ = {beta};
    p.zero_at_origin_ = beta > 0.0;
    return p;
}

Potential Potential::log1p()
{
    Potential p;
    p.kind_ = PotentialKind::log1p;
    return p;
}

Potential Potential::exp_rate(double lambda, double c)
{
    if (!(lambda > 0.0) || !(c > 0.0)) throw ParameterError("Potential::exp_rate: need lambda > 0 and c > 0");
    Potential p;
    p.kind_ = PotentialKind::exp_rate;
    p.params_ = {lambda, c};
    return p;
}

Potential Potential::sinh_power(double lambda, double c)
{
    if (!(lambda > 0.0) || !(c >= 0.0)) throw ParameterError("Potential::sinh_power: need lambda > 0 and c >= 0");
    Potential p;
    p.kind_ = PotentialKind::sinh_power;
    p.params_ = {lambda, c};
    return p;
}

Potential Potential::double_exp(double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("Potential::double_exp: need a > 0 and b > 0");
    Potential p;
    p.kind_ = PotentialKind::double_exp;
    p.params_ = {a, b};
    return p;
}

Potential Potential::tabulated(std::vector<double> theta, std::vector<double> h, bool nondecreasing)
{
    if (theta.size() != h.size() || theta.size() < 4)
        throw ParameterError("Potential::tabulated: need at least 4 matching (theta, h) samples");
    if (theta.front() != 0.0) throw ParameterError("Potential::tabulated: table must start at theta = 0");
    for (std::size_t i = 1; i < theta.size(); ++i) {
        if (!(theta[i] > theta[i - 1])) throw ParameterError("Potential::tabulated: theta must be strictly increasing");
        if (nondecreasing && h[i] < h[i - 1])
            throw ParameterError("Potential::tabulated: flagged non-decreasing but samples decrease");
    }
    for (double v : h)
        if (!std::isfinite(v)) throw ParameterError("Potential::tabulated: samples must be finite");
    Potential p;
    p.kind_ = PotentialKind::tabulated;
    p.table_theta_ = theta;
    p.table_h_ = h;
    p.nondecreasing_ = nondecreasing;
    p.zero_at_origin_ = h.front() == 0.0;
    auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(theta),
                                                                                            std::move(h));
    p.interp_ = std::make_shared<const std::function<double(double)>>([spline](double x) { return (*spline)(x); });
    return p;
}

double Potential::operator()(double theta) const
{
    if (theta < 0.0 || std::isnan(theta)) throw PreconditionError("Potential: distance must be >= 0");
    switch (kind_) {
    case PotentialKind::power: {
        const double beta = params_[0];
        if (theta == 0.0) return beta > 0.0 ? 0.0 : -kInf;
        if (beta == 0.0) return std::log(theta);
        return std::pow(theta, beta) / beta;
    }
    case PotentialKind::log1p:
        return std::log1p(theta);
    case PotentialKind::exp_rate:
        return std::expm1(params_[0] * std::sqrt(params_[1]) * theta);
    case PotentialKind::sinh_power:
        if (theta == 0.0) return 0.0;
        return std::exp(params_[0] * log_psi_closed_form(params_[1], theta));
    case PotentialKind::double_exp: {
        const double a = params_[0];
        const double y = a * std::expm1(params_[1] * theta);
        return std::exp(a) * std::expm1(y);
    }
    case PotentialKind::tabulated:
        if (theta > table_theta_.back()) {
            std::ostringstream msg;
            msg << "tabulated potential evaluated at theta = " << theta << " beyond its table end "
                << table_theta_.back();
            throw PreconditionError(msg.str());
        }
        return (*interp_)(theta);
    }
    return 0.0;
}

double Potential::log_eval(double theta) const
{
    if (theta < 0.0 || std::isnan(theta)) throw PreconditionError("Potential: distance must be >= 0");
    auto log_expm1 = [](double y) { return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y)); };
    switch (kind_) {
    case PotentialKind::power: {
        const double beta = params_[0];
        if (beta > 0.0) return theta == 0.0 ? -kInf : beta * std::log(theta) - std::log(beta);
        break;
    }
    case PotentialKind::log1p:
        return theta == 0.0 ? -kInf : std::log(std::log1p(theta));
    case PotentialKind::exp_rate:
        return theta == 0.0 ? -kInf : log_expm1(params_[0] * std::sqrt(params_[1]) * theta);
    case PotentialKind::sinh_power:
        return theta == 0.0 ? -kInf : params_[0] * log_psi_closed_form(params_[1], theta);
    case PotentialKind::double_exp: {
        if (theta == 0.0) return -kInf;
        const double a = params_[0];
        const double b = params_[1];
        // log(a (e^{b theta} - 1)) stays finite when the inner exponential overflows
        const double log_y = std::log(a) + log_expm1(b * theta);
        const double y = std::exp(log_y);
        return a + (std::isfinite(y) ? log_expm1(y) : y);
    }
    case PotentialKind::tabulated:
        break;
    }
    const double v = (*this)(theta);
    return v > 0.0 ? std::log(v) : -kInf;
}

bool Potential::singular_at_origin() const
{
    return kind_ == PotentialKind::power && params_[0] <= 0.0;
}

double Potential::domain_end() const
{
    return kind_ == PotentialKind::tabulated ? table_theta_.back() : kInf;
}

void Potential::validate(double theta_max) const
{
    const double end = std::min(theta_max, domain_end());
    const int n = 2000;
    double prev = -kInf;
    for (int i = singular_at_origin() ? 1 : 0; i <= n; ++i) {
        const double t = end * i / n;
        const double v = (*this)(t);
        if (std::isnan(v)) throw ParameterError("potential " + describe() + " is NaN on the sampled range");
        if (nondecreasing_ && v < prev - 1e-12 * std::abs(prev)) {
            std::ostringstream msg;
            msg << "potential " << describe() << " is flagged non-decreasing but drops near theta = " << t;
            throw ParameterError(msg.str());
        }
        prev = v;
    }
    if (zero_at_origin_ && (*this)(0.0) != 0.0)
        throw ParameterError("potential " + describe() + " is flagged with h(0) = 0 but h(0) != 0");
}

bool Potential::sampled_convex(double theta_max, std::size_t samples) const
{
    if (singular_at_origin()) return false;
    const double end = std::min(theta_max, domain_end());
    std::vector<double> v(samples);
    for (std::size_t i = 0; i < samples; ++i) v[i] = (*this)(end * static_cast<double>(i) / (samples - 1));
    for (std::size_t i = 1; i + 1 < samples; ++i) {
        const double d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
        const double scale = std::max({std::abs(v[i + 1]), std::abs(v[i]), std::abs(v[i - 1]), 1e-300});
        if (d2 < -1e-10 * scale) return false;
    }
    return true;
}

std::string Potential::describe() const
{
    std::ostringstream s;
    switch (kind_) {
    case PotentialKind::power:
        s << "power(beta=" << params_[0] << ")";
        break;
    case PotentialKind::log1p:
        s << "log1p";
        break;
    case PotentialKind::exp_rate:
        s << "exp_rate(lambda=" << params_[0] << ", c=" << params_[1] << ")";
        break;
    case PotentialKind::sinh_power:
        s << "sinh_power(lambda=" << params_[0] << ", c=" << params_[1] << ")";
        break;
    case PotentialKind::double_exp:
        s << "double_exp(a=" << params_[0] << ", b=" << params_[1] << ")";
        break;
    case PotentialKind::tabulated:
        s << "tabulated(" << table_theta_.size() << " samples)";
        break;
    }
    return s.str();
}

} // namespace chfe
