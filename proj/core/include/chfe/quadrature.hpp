#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace chfe::quad {

/// A quadrature rule on [-1, 1].
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, nodes by Newton iteration on P_n.
Rule gauss_legendre(int n);

/// The 32-point Gauss-Legendre rule used for composite panels (built once).
const Rule& gauss_legendre_32();

/// n-point Gauss rule for the weight (1-u^2)^a on [-1, 1], a > -1, via Golub-Welsch.
/// Weights are normalized to sum to one, so the rule computes weighted averages.
Rule gauss_gegenbauer(int n, double a);

struct Result {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
    bool converged = false;
};

/// Composite rule with a fixed number of equal panels.
template <class F>
double composite(F&& f, double a, double b, int panels, const Rule& rule)
{
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            s += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
        sum += 0.5 * h * s;
    }
    return sum;
}

/// Composite 32-point Gauss-Legendre; the panel count doubles until two
/// successive estimates agree to rel_tol.
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol = 1e-10, int max_doublings = 16)
{
    Result out;
    if (!(b > a)) {
        out.converged = true;
        return out;
    }
    const Rule& rule = gauss_legendre_32();
    int panels = 1;
    double prev = composite(f, a, b, panels, rule);
    for (int k = 0; k < max_doublings; ++k) {
        panels *= 2;
        const double cur = composite(f, a, b, panels, rule);
        const double diff = std::abs(cur - prev);
        out.value = cur;
        out.error = diff;
        out.panels = panels;
        if (!std::isfinite(cur)) return out;
        if (diff <= rel_tol * std::abs(cur) || diff <= std::numeric_limits<double>::min()) {
            out.converged = true;
            return out;
        }
        prev = cur;
    }
    return out;
}

/// Log of the integral of exp(log_f) over [a, b], for integrands that overflow.
/// Same doubling rule as integrate(); log_f may return -inf where f vanishes.
template <class LogF>
Result integrate_log(LogF&& log_f, double a, double b, double rel_tol = 1e-10, int max_doublings = 16)
{
    Result out;
    out.value = -std::numeric_limits<double>::infinity();
    if (!(b > a)) {
        out.converged = true;
        return out;
    }
    const Rule& rule = gauss_legendre_32();
    auto level = [&](int panels) {
        const double h = (b - a) / panels;
        std::vector<double> terms;
        terms.reserve(static_cast<std::size_t>(panels) * rule.nodes.size());
        double peak = -std::numeric_limits<double>::infinity();
        for (int p = 0; p < panels; ++p) {
            const double mid = a + (p + 0.5) * h;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double t = std::log(0.5 * h * rule.weights[i]) + log_f(mid + 0.5 * h * rule.nodes[i]);
                terms.push_back(t);
                peak = std::max(peak, t);
            }
        }
        if (!std::isfinite(peak)) return peak;
        double s = 0.0;
        for (double t : terms) s += std::exp(t - peak);
        return peak + std::log(s);
    };
    int panels = 1;
    double prev = level(panels);
    for (int k = 0; k < max_doublings; ++k) {
        panels *= 2;
        const double cur = level(panels);
        out.value = cur;
        out.panels = panels;
        if (std::isinf(cur) && cur < 0 && std::isinf(prev)) {
            out.converged = true;
            return out;
        }
        const double rel = std::abs(std::expm1(prev - cur));
        out.error = rel;
        if (rel <= rel_tol) {
            out.converged = true;
            return out;
        }
        prev = cur;
    }
    return out;
}

} // namespace chfe::quad
