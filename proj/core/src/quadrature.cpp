#include "chfe/quadrature.hpp"

#include "chfe/errors.hpp"

#include <Eigen/Eigenvalues>

#include <numbers>

namespace chfe::quad {

Rule gauss_legendre(int n)
{
    if (n < 1) throw ParameterError("gauss_legendre: n must be positive");
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = (n == 1) ? x : p1;
            const double pnm1 = (n == 1) ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double pn = (n == 1) ? x : p1;
        const double pnm1 = (n == 1) ? 1.0 : p0;
        dp = n * (x * pn - pnm1) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

const Rule& gauss_legendre_32()
{
    static const Rule rule = gauss_legendre(32);
    return rule;
}

Rule gauss_gegenbauer(int n, double a)
{
    if (n < 1) throw ParameterError("gauss_gegenbauer: n must be positive");
    if (!(a > -1.0)) throw ParameterError("gauss_gegenbauer: exponent must exceed -1");
    // Jacobi matrix of the monic orthogonal polynomials for (1-u^2)^a: zero diagonal,
    // off-diagonal b_k = sqrt(k (k + 2a) / ((2k + 2a + 1)(2k + 2a - 1))).
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) {
        double b2;
        if (k == 1)
            b2 = 1.0 / (2.0 * a + 3.0);
        else
            b2 = k * (k + 2.0 * a) / ((2.0 * k + 2.0 * a + 1.0) * (2.0 * k + 2.0 * a - 1.0));
        off(k - 1) = std::sqrt(b2);
    }
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 1.0;
        return rule;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw Error("gauss_gegenbauer: eigen-decomposition failed");
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;
        total += rule.weights[i];
    }
    for (double& w : rule.weights) w /= total;
    // symmetrize to remove eigen-solver noise
    for (int i = 0; i < n / 2; ++i) {
        const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

} // namespace chfe::quad
