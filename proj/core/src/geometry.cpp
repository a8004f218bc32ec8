#include "chfe/geometry.hpp"

#include "chfe/errors.hpp"
#include "chfe/quadrature.hpp"

#include "pchip_compat.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace chfe {

namespace detail {
struct TableInterp {
    boost::math::interpolators::pchip<std::vector<double>> spline;
    double lo;
    double hi;
};
} // namespace detail

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double value, const char* what)
{
    if (!(value > 0.0) || !std::isfinite(value))
        throw InvalidProfile(std::string(what) + " must be finite and positive");
}

} // namespace

// ---------------------------------------------------------------- profiles

CurvatureProfile CurvatureProfile::constant(double c)
{
    require_positive(c, "constant curvature");
    CurvatureProfile p;
    p.kind_ = ProfileKind::constant;
    p.params_ = {c};
    p.monotone_ = true;
    p.c32_ = true;
    return p;
}

CurvatureProfile CurvatureProfile::power(double k, double floor)
{
    require_positive(k, "power exponent");
    if (!(floor >= 0.0) || !std::isfinite(floor)) throw InvalidProfile("power floor must be finite and >= 0");
    CurvatureProfile p;
    p.kind_ = ProfileKind::power;
    p.params_ = {k, floor};
    p.monotone_ = true;
    p.c32_ = true; // Dc / c^{3/2} ~ k theta^{-1-k/2}
    return p;
}

CurvatureProfile CurvatureProfile::exponential(double beta, double amplitude)
{
    require_positive(beta, "exponential rate");
    require_positive(amplitude, "exponential amplitude");
    CurvatureProfile p;
    p.kind_ = ProfileKind::exponential;
    p.params_ = {beta, amplitude};
    p.monotone_ = true;
    p.c32_ = true; // beta / sqrt(a e^{beta theta}) -> 0
    return p;
}

CurvatureProfile CurvatureProfile::tabulated(std::vector<double> theta, std::vector<double> c,
                                             bool monotone_nondecreasing, bool satisfies_c32)
{
    if (theta.size() != c.size()) throw InvalidProfile("tabulated profile: theta and c differ in length");
    if (theta.size() < 4) throw InvalidProfile("tabulated profile: need at least 4 samples");
    if (theta.front() != 0.0) throw InvalidProfile("tabulated profile: table must start at theta = 0");
    for (std::size_t i = 1; i < theta.size(); ++i)
        if (!(theta[i] > theta[i - 1])) throw InvalidProfile("tabulated profile: theta must be strictly increasing");
    for (std::size_t i = 0; i < c.size(); ++i) {
        require_positive(c[i], "tabulated curvature");
        if (monotone_nondecreasing && i > 0 && c[i] < c[i - 1])
            throw InvalidProfile("tabulated profile: flagged non-decreasing but samples decrease");
    }
    CurvatureProfile p;
    p.kind_ = ProfileKind::tabulated;
    p.table_theta_ = theta;
    p.table_c_ = c;
    p.monotone_ = monotone_nondecreasing;
    p.c32_ = satisfies_c32;
    const double lo = theta.front();
    const double hi = theta.back();
    p.interp_ = std::make_shared<const detail::TableInterp>(
        detail::TableInterp{boost::math::interpolators::pchip<std::vector<double>>(std::move(theta), std::move(c)),
                            lo, hi});
    return p;
}

double CurvatureProfile::operator()(double theta) const
{
    double v = 0.0;
    switch (kind_) {
    case ProfileKind::constant:
        v = params_[0];
        break;
    case ProfileKind::power:
        v = params_[1] + std::pow(std::max(theta, 0.0), params_[0]);
        break;
    case ProfileKind::exponential:
        v = params_[1] * std::exp(params_[0] * theta);
        break;
    case ProfileKind::tabulated:
        if (theta < interp_->lo || theta > interp_->hi) {
            std::ostringstream msg;
            msg << "tabulated profile evaluated at theta = " << theta << " outside [" << interp_->lo << ", "
                << interp_->hi << "]";
            throw InvalidProfile(msg.str());
        }
        v = interp_->spline(theta);
        break;
    }
    // a pure power law vanishes at the pole only
    const bool pole_zero = kind_ == ProfileKind::power && theta == 0.0 && v == 0.0;
    if (!(v > 0.0 || pole_zero) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "curvature profile " << describe() << " is not positive and finite at theta = " << theta;
        throw InvalidProfile(msg.str());
    }
    return v;
}

double CurvatureProfile::sqrt_integral(double a, double b) const
{
    if (b < a) return -sqrt_integral(b, a);
    if (b == a) return 0.0;
    if (kind_ == ProfileKind::constant) return std::sqrt(params_[0]) * (b - a);
    auto f = [this](double t) { return std::sqrt((*this)(t)); };
    return quad::integrate(f, a, b, 1e-12, 18).value;
}

CurvatureProfile CurvatureProfile::with_flags(bool monotone_nondecreasing, bool satisfies_c32) const
{
    CurvatureProfile p = *this;
    p.monotone_ = monotone_nondecreasing;
    p.c32_ = satisfies_c32;
    return p;
}

double CurvatureProfile::domain_end() const
{
    return kind_ == ProfileKind::tabulated ? interp_->hi : kInf;
}

void CurvatureProfile::validate(double theta_max) const
{
    const double end = std::min(theta_max, domain_end());
    const int n = 2048;
    double prev = (*this)(0.0);
    for (int i = 1; i <= n; ++i) {
        const double t = end * i / n;
        const double v = (*this)(t);
        if (monotone_ && v < prev * (1.0 - 1e-12)) {
            std::ostringstream msg;
            msg << "curvature profile " << describe() << " is flagged non-decreasing but drops near theta = " << t;
            throw InvalidProfile(msg.str());
        }
        prev = v;
    }
}

std::optional<std::string> CurvatureProfile::c32_warning(double theta_max) const
{
    if (!c32_) return std::nullopt;
    const double end = std::min(theta_max, domain_end());
    if (!(end > 1.0)) return std::nullopt;
    const int n = 64;
    std::vector<double> ratio;
    ratio.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double t = std::exp(std::log(end) * i / (n - 1));
        const double h = 1e-6 * std::max(1.0, t);
        const double lo = std::max(0.0, t - h);
        const double hi = std::min(end, t + h);
        const double cl = (*this)(lo);
        const double ch = (*this)(hi);
        const double d = std::abs(ch - cl) / (hi - lo);
        const double cm = (*this)(t);
        ratio.push_back(d / (cm * std::sqrt(cm)));
    }
    const double early = *std::max_element(ratio.begin(), ratio.begin() + n / 2);
    const double last = ratio.back();
    if (last > 1e-8 && last >= early) {
        std::ostringstream msg;
        msg << "profile " << describe() << " is flagged as satisfying Dc/c^{3/2} -> 0, but the ratio is "
            << last << " at theta = " << end;
        return msg.str();
    }
    return std::nullopt;
}

std::string CurvatureProfile::describe() const
{
    std::ostringstream s;
    switch (kind_) {
    case ProfileKind::constant:
        s << "constant(c=" << params_[0] << ")";
        break;
    case ProfileKind::power:
        s << "power(k=" << params_[0] << ", floor=" << params_[1] << ")";
        break;
    case ProfileKind::exponential:
        s << "exponential(beta=" << params_[0] << ", amplitude=" << params_[1] << ")";
        break;
    case ProfileKind::tabulated:
        s << "tabulated(" << table_theta_.size() << " samples on [0, " << table_theta_.back() << "])";
        break;
    }
    return s.str();
}

// ---------------------------------------------------------------- ODE

namespace {

using Vec2 = std::array<double, 2>;

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
                 E6 = 22.0 / 525, E7 = -1.0 / 40;
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;

// linear: y = (psi, psi'); log: y = (log psi, psi'/psi)
Vec2 rhs(const CurvatureProfile& c, bool log_mode, double t, const Vec2& y)
{
    if (log_mode) return {y[1], c(t) - y[1] * y[1]};
    return {y[1], c(t) * y[0]};
}

struct StepResult {
    Vec2 y;
    Vec2 err;
};

StepResult dp5_step(const CurvatureProfile& c, bool log_mode, double t, const Vec2& y, double h)
{
    auto add = [](const Vec2& base, double hh, std::initializer_list<std::pair<double, const Vec2*>> terms) {
        Vec2 out = base;
        for (const auto& [coef, k] : terms) {
            out[0] += hh * coef * (*k)[0];
            out[1] += hh * coef * (*k)[1];
        }
        return out;
    };
    const Vec2 k1 = rhs(c, log_mode, t, y);
    const Vec2 k2 = rhs(c, log_mode, t + C2 * h, add(y, h, {{A21, &k1}}));
    const Vec2 k3 = rhs(c, log_mode, t + C3 * h, add(y, h, {{A31, &k1}, {A32, &k2}}));
    const Vec2 k4 = rhs(c, log_mode, t + C4 * h, add(y, h, {{A41, &k1}, {A42, &k2}, {A43, &k3}}));
    const Vec2 k5 = rhs(c, log_mode, t + C5 * h, add(y, h, {{A51, &k1}, {A52, &k2}, {A53, &k3}, {A54, &k4}}));
    const Vec2 k6 =
        rhs(c, log_mode, t + h, add(y, h, {{A61, &k1}, {A62, &k2}, {A63, &k3}, {A64, &k4}, {A65, &k5}}));
    const Vec2 ynew = add(y, h, {{B1, &k1}, {B3, &k3}, {B4, &k4}, {B5, &k5}, {B6, &k6}});
    const Vec2 k7 = rhs(c, log_mode, t + h, ynew);
    Vec2 err{};
    for (int i = 0; i < 2; ++i)
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    return {ynew, err};
}

constexpr double kLogSwitch = 1e100;

} // namespace

PsiSolution solve_psi(const CurvatureProfile& profile, double theta_max, double tol)
{
    if (!(theta_max > 0.0) || !std::isfinite(theta_max)) throw PreconditionError("solve_psi: theta_max must be positive");
    if (!(tol > 0.0)) throw PreconditionError("solve_psi: tol must be positive");
    if (theta_max > profile.domain_end()) {
        std::ostringstream msg;
        msg << "solve_psi: theta_max = " << theta_max << " exceeds the profile table end " << profile.domain_end();
        throw InvalidProfile(msg.str());
    }
    profile.validate(theta_max);

    PsiSolution sol;
    sol.profile = std::make_shared<const CurvatureProfile>(profile);
    sol.tolerance = tol;
    sol.theta.push_back(0.0);
    sol.psi.push_back(0.0);
    sol.dpsi.push_back(1.0);
    sol.log_psi.push_back(-kInf);
    sol.log_derivative.push_back(kInf);

    const double c0 = profile(0.0);
    double h = std::min({theta_max, 0.1, 0.1 / std::sqrt(c0)});
    double t = 0.0;
    Vec2 y{0.0, 1.0};
    bool log_mode = false;
    const double h_min = 1e-14 * std::max(1.0, theta_max);
    // local target a decade below tol so the accumulated global error stays under it
    const double local_tol = 0.1 * tol;
    std::size_t steps = 0;

    while (t < theta_max) {
        if (++steps > 20'000'000) throw IntegratorFailure("solve_psi: step budget exhausted");
        if (t + h > theta_max) h = theta_max - t;
        const StepResult s = dp5_step(profile, log_mode, t, y, h);
        double err_norm = 0.0;
        for (int i = 0; i < 2; ++i) {
            double scale;
            if (log_mode)
                scale = local_tol * (i == 0 ? 1.0 : std::max({std::abs(y[1]), std::abs(s.y[1]), 1e-12}));
            else
                scale = local_tol * std::max({std::abs(y[i]), std::abs(s.y[i]), 1e-12});
            err_norm = std::max(err_norm, std::abs(s.err[i]) / scale);
        }
        if (!std::isfinite(err_norm)) err_norm = 1e10;
        if (err_norm <= 1.0) {
            t = (theta_max - (t + h) < 1e-15 * theta_max) ? theta_max : t + h;
            y = s.y;
            sol.theta.push_back(t);
            if (log_mode) {
                sol.log_psi.push_back(y[0]);
                sol.log_derivative.push_back(y[1]);
                sol.psi.push_back(std::exp(y[0]));
                sol.dpsi.push_back(std::exp(y[0]) * y[1]);
            } else {
                sol.psi.push_back(y[0]);
                sol.dpsi.push_back(y[1]);
                sol.log_psi.push_back(std::log(y[0]));
                sol.log_derivative.push_back(y[1] / y[0]);
                if (y[0] > kLogSwitch) {
                    log_mode = true;
                    y = {std::log(y[0]), y[1] / y[0]};
                    sol.log_start = sol.theta.size() - 1;
                }
            }
        }
        const double factor = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (h < h_min && t < theta_max) {
            std::ostringstream msg;
            msg << "solve_psi: step size underflow at theta = " << t << " for " << profile.describe();
            throw IntegratorFailure(msg.str());
        }
    }
    if (!log_mode) sol.log_start = sol.theta.size();
    return sol;
}

PsiSolution::State PsiSolution::at(double th) const
{
    if (!(th >= 0.0)) throw PreconditionError("PsiSolution::at: theta must be non-negative");
    if (th > theta.back() * (1.0 + 1e-14)) {
        std::ostringstream msg;
        msg << "PsiSolution::at: theta = " << th << " beyond the solved range " << theta.back();
        throw PreconditionError(msg.str());
    }
    th = std::min(th, theta.back());
    auto it = std::upper_bound(theta.begin(), theta.end(), th);
    const std::size_t i = static_cast<std::size_t>(std::distance(theta.begin(), it)) - 1;
    if (theta[i] == th) return {psi[i], dpsi[i], log_psi[i], log_derivative[i]};
    const double h = th - theta[i];
    if (i >= log_start) {
        const StepResult s = dp5_step(*profile, true, theta[i], {log_psi[i], log_derivative[i]}, h);
        return {std::exp(s.y[0]), std::exp(s.y[0]) * s.y[1], s.y[0], s.y[1]};
    }
    const StepResult s = dp5_step(*profile, false, theta[i], {psi[i], dpsi[i]}, h);
    return {s.y[0], s.y[1], std::log(s.y[0]), s.y[1] / s.y[0]};
}

// ---------------------------------------------------------------- closed forms and bounds

double psi_closed_form(double c, double theta)
{
    if (c < 0.0 || theta < 0.0) throw PreconditionError("psi_closed_form: need c >= 0 and theta >= 0");
    if (c == 0.0) return theta;
    const double k = std::sqrt(c);
    const double x = k * theta;
    if (x < 1e-4) return theta * (1.0 + x * x / 6.0 + x * x * x * x / 120.0);
    return std::sinh(x) / k;
}

double log_psi_closed_form(double c, double theta)
{
    if (c < 0.0 || theta < 0.0) throw PreconditionError("log_psi_closed_form: need c >= 0 and theta >= 0");
    if (theta == 0.0) return -kInf;
    if (c == 0.0) return std::log(theta);
    const double k = std::sqrt(c);
    const double x = k * theta;
    if (x > 20.0) return x - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * x)) - std::log(k);
    return std::log(psi_closed_form(c, theta));
}

double log_psi_upper_bound(const CurvatureProfile& profile, double theta)
{
    if (!profile.monotone_nondecreasing())
        throw PreconditionError("psi_upper_bound: profile is not flagged non-decreasing");
    if (theta < 0.0) throw PreconditionError("psi_upper_bound: theta must be non-negative");
    if (theta == 0.0) return -kInf;
    return std::log(theta) + profile.sqrt_integral(0.0, theta);
}

double psi_upper_bound(const CurvatureProfile& profile, double theta)
{
    const double l = log_psi_upper_bound(profile, theta);
    return theta == 0.0 ? 0.0 : std::exp(l);
}

PsiLowerBound psi_lower_bound(const CurvatureProfile& profile, double eps, double theta0, double theta,
                              const PsiSolution& psi)
{
    if (!profile.satisfies_c32()) throw PreconditionError("psi_lower_bound: profile is not flagged as satisfying Dc/c^{3/2} -> 0");
    if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("psi_lower_bound: eps must lie in (0, 1)");
    if (!(theta0 > 0.0)) throw PreconditionError("psi_lower_bound: theta0 must be positive");
    if (theta < theta0) throw PreconditionError("psi_lower_bound: theta must be at least theta0");
    const double l0 = psi.log_value(theta0);
    const double lb = l0 + (1.0 - eps) * profile.sqrt_integral(theta0, theta);
    const double actual = psi.log_value(theta);
    const bool holds = actual >= lb - 10.0 * psi.tolerance;
    return {std::exp(lb), lb, holds};
}

std::optional<double> find_theta0(const CurvatureProfile& profile, double eps, const PsiSolution& psi,
                                  double theta_min)
{
    if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("find_theta0: eps must lie in (0, 1)");
    const std::size_t n = psi.theta.size();
    // g(theta) = log psi(theta) - (1 - eps) int_0^theta sqrt(c); the bound anchored at
    // theta0 holds at theta iff g(theta) >= g(theta0).
    std::vector<double> g(n, kInf);
    double acc = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        acc += profile.sqrt_integral(psi.theta[j - 1], psi.theta[j]);
        g[j] = psi.log_psi[j] - (1.0 - eps) * acc;
    }
    std::vector<double> suffix_min(n + 1, kInf);
    for (std::size_t j = n; j-- > 0;) suffix_min[j] = std::min(suffix_min[j + 1], g[j]);
    const double slack = 10.0 * psi.tolerance;
    for (std::size_t j = 1; j < n; ++j) {
        if (psi.theta[j] < theta_min) continue;
        if (g[j] <= suffix_min[j + 1] + slack) return psi.theta[j];
    }
    return std::nullopt;
}

PsiSandwich psi_sandwich(const CurvatureProfile& profile, double R, const PsiSolution& psi, double theta)
{
    if (!(R > 0.0)) throw PreconditionError("psi_sandwich: R must be positive");
    if (!(theta > 0.0)) throw PreconditionError("psi_sandwich: theta must be positive");
    const PsiSolution::State at_R = psi.at(R);
    const double sc = std::sqrt(profile(R));
    const double lb = at_R.log_psi + sc * (theta - R);
    const bool slope_ok = at_R.log_derivative >= sc * (1.0 - 10.0 * psi.tolerance);
    return {std::exp(lb), lb, theta >= R ? BoundSide::below : BoundSide::above, slope_ok};
}

// ---------------------------------------------------------------- manifolds

ModelManifold ModelManifold::constant(int dim, double c)
{
    if (dim < 2) throw ParameterError("ModelManifold: dimension must be at least 2");
    if (!(c >= 0.0) || !std::isfinite(c)) throw ParameterError("ModelManifold: curvature magnitude must be >= 0");
    ModelManifold m;
    m.dim_ = dim;
    m.constant_ = true;
    m.c_ = c;
    return m;
}

ModelManifold ModelManifold::bounds(int dim, const CurvatureProfile& c_m, const CurvatureProfile& c_M,
                                    double theta_max, double tol)
{
    if (dim < 2) throw ParameterError("ModelManifold: dimension must be at least 2");
    const int n = 2048;
    for (int i = 0; i <= n; ++i) {
        const double t = theta_max * i / n;
        if (c_M(t) > c_m(t) * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "ModelManifold: need c_M <= c_m, violated at theta = " << t;
            throw ParameterError(msg.str());
        }
    }
    ModelManifold m;
    m.dim_ = dim;
    m.constant_ = false;
    m.same_profile_ = false;
    m.psi_m_ = std::make_shared<const PsiSolution>(solve_psi(c_m, theta_max, tol));
    m.psi_M_ = std::make_shared<const PsiSolution>(solve_psi(c_M, theta_max, tol));
    return m;
}

ModelManifold ModelManifold::model(int dim, const CurvatureProfile& c, double theta_max, double tol)
{
    if (dim < 2) throw ParameterError("ModelManifold: dimension must be at least 2");
    ModelManifold m;
    m.dim_ = dim;
    m.constant_ = false;
    m.same_profile_ = true;
    m.psi_m_ = std::make_shared<const PsiSolution>(solve_psi(c, theta_max, tol));
    m.psi_M_ = m.psi_m_;
    return m;
}

double ModelManifold::curvature() const
{
    if (!constant_) throw UnsupportedManifold("ModelManifold: curvature is not constant");
    return c_;
}

double ModelManifold::radius_limit() const
{
    return constant_ ? kInf : std::min(psi_m_->theta_max(), psi_M_->theta_max());
}

double ModelManifold::log_warp_upper(double r) const
{
    return constant_ ? log_psi_closed_form(c_, r) : psi_m_->log_value(r);
}

double ModelManifold::log_warp_lower(double r) const
{
    return constant_ ? log_psi_closed_form(c_, r) : psi_M_->log_value(r);
}

double ModelManifold::warp_upper(double r) const
{
    return constant_ ? psi_closed_form(c_, r) : psi_m_->value(r);
}

double ModelManifold::warp_lower(double r) const
{
    return constant_ ? psi_closed_form(c_, r) : psi_M_->value(r);
}

double ModelManifold::warp(double r) const
{
    if (!is_exact()) throw UnsupportedManifold("ModelManifold: exact warp needs a constant-curvature or model manifold");
    return warp_upper(r);
}

double ModelManifold::log_warp(double r) const
{
    if (!is_exact()) throw UnsupportedManifold("ModelManifold: exact warp needs a constant-curvature or model manifold");
    return log_warp_upper(r);
}

const PsiSolution& ModelManifold::psi_m() const
{
    if (!psi_m_) throw UnsupportedManifold("ModelManifold: constant-curvature manifolds have no stored psi solution");
    return *psi_m_;
}

const PsiSolution& ModelManifold::psi_M() const
{
    if (!psi_M_) throw UnsupportedManifold("ModelManifold: constant-curvature manifolds have no stored psi solution");
    return *psi_M_;
}

const CurvatureProfile& ModelManifold::profile_m() const
{
    return *psi_m().profile;
}

const CurvatureProfile& ModelManifold::profile_M() const
{
    return *psi_M().profile;
}

// ---------------------------------------------------------------- volumes and distances

double unit_ball_volume(int d)
{
    if (d < 1) throw ParameterError("unit_ball_volume: dimension must be positive");
    return std::exp(0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d + 1.0));
}

Interval log_ball_volume(const ModelManifold& manifold, double R)
{
    if (R < 0.0) throw PreconditionError("ball_volume: R must be non-negative");
    if (R == 0.0) return {-kInf, -kInf};
    const int d = manifold.dim();
    const double log_pref = std::log(d * unit_ball_volume(d));
    if (manifold.is_constant() && manifold.curvature() == 0.0) {
        const double v = std::log(unit_ball_volume(d)) + d * std::log(R);
        return {v, v};
    }
    auto lower = [&](double t) { return (d - 1) * manifold.log_warp_lower(t); };
    auto upper = [&](double t) { return (d - 1) * manifold.log_warp_upper(t); };
    const double lo = log_pref + quad::integrate_log(lower, 0.0, R, 1e-12).value;
    if (manifold.is_exact()) return {lo, lo};
    const double hi = log_pref + quad::integrate_log(upper, 0.0, R, 1e-12).value;
    return {lo, hi};
}

Interval ball_volume(const ModelManifold& manifold, double R)
{
    if (R == 0.0) return {0.0, 0.0};
    const Interval l = log_ball_volume(manifold, R);
    return {std::exp(l.lower), std::exp(l.upper)};
}

Interval jacobian_bounds(const ModelManifold& manifold, double r)
{
    if (r < 0.0) throw PreconditionError("jacobian_bounds: r must be non-negative");
    if (r == 0.0) return {1.0, 1.0};
    const int d = manifold.dim();
    const double lr = std::log(r);
    return {std::exp((d - 1) * (manifold.log_warp_lower(r) - lr)),
            std::exp((d - 1) * (manifold.log_warp_upper(r) - lr))};
}

double space_form_distance(double c, double r, double s, double sin2_half_angle)
{
    if (r < 0.0 || s < 0.0) throw PreconditionError("space_form_distance: radii must be non-negative");
    const double S = std::clamp(sin2_half_angle, 0.0, 1.0);
    if (c == 0.0) return std::sqrt(std::max(0.0, (r - s) * (r - s) + 4.0 * r * s * S));
    if (c < 0.0) throw PreconditionError("space_form_distance: curvature magnitude must be >= 0");
    const double k = std::sqrt(c);
    const double a = k * r;
    const double b = k * s;
    if (a + b > 600.0) {
        // log(2 cosh d) = log(2 cosh(a - b) + 4 sinh a sinh b S)
        const double diff = std::abs(a - b);
        const double t1 = diff + std::log1p(std::exp(-2.0 * diff));
        double L = t1;
        if (S > 0.0 && a > 0.0 && b > 0.0) {
            const double t2 = a + b + std::log1p(-std::exp(-2.0 * a)) + std::log1p(-std::exp(-2.0 * b)) + std::log(S);
            const double m = std::max(t1, t2);
            L = m + std::log(std::exp(t1 - m) + std::exp(t2 - m));
        }
        // d = acosh(e^L / 2)
        return (L - std::numbers::ln2 + std::log1p(std::sqrt(std::max(0.0, 1.0 - 4.0 * std::exp(-2.0 * L))))) / k;
    }
    // cosh d - 1 = 2 sinh^2((a - b)/2) + 2 sinh a sinh b sin^2(phi/2), free of cancellation
    const double sh = std::sinh(0.5 * (a - b));
    const double X = std::max(0.0, 2.0 * sh * sh + 2.0 * std::sinh(a) * std::sinh(b) * S);
    return std::log1p(X + std::sqrt(X * (X + 2.0))) / k;
}

double hyperbolic_distance(double c, double r, double s, double phi)
{
    if (phi < 0.0 || phi > std::numbers::pi * (1.0 + 1e-15))
        throw PreconditionError("hyperbolic_distance: angle must lie in [0, pi]");
    const double sh = std::sin(0.5 * phi);
    return space_form_distance(c, r, s, sh * sh);
}

double chordal_lower_bound(double r, double s, double phi)
{
    if (r < 0.0 || s < 0.0) throw PreconditionError("chordal_lower_bound: radii must be non-negative");
    const double sh = std::sin(0.5 * phi);
    return std::sqrt(std::max(0.0, (r - s) * (r - s) + 4.0 * r * s * sh * sh));
}

} // namespace chfe
