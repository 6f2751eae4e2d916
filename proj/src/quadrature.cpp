#include "imbed/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace imbed {

QuadratureGrid::QuadratureGrid(Rule rule, double a, double b, std::vector<double> nodes,
                               std::vector<double> weights)
    : rule_(rule), a_(a), b_(b), nodes_(std::move(nodes)), weights_(std::move(weights)) {
    double total = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!(weights_[i] > 0.0)) {
            throw std::invalid_argument("QuadratureGrid: weights must be positive");
        }
        if (i > 0 && !(nodes_[i] > nodes_[i - 1])) {
            throw std::invalid_argument("QuadratureGrid: nodes must be strictly increasing");
        }
        total += weights_[i];
    }
    if (std::abs(total - (b_ - a_)) > 1e-12 * std::max(1.0, b_ - a_)) {
        throw std::invalid_argument("QuadratureGrid: weights do not sum to b - a");
    }
}

namespace {

void check_interval(int n, int min_n, double a, double b) {
    if (n < min_n) {
        throw std::invalid_argument("QuadratureGrid: need at least " + std::to_string(min_n) + " nodes");
    }
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw std::invalid_argument("QuadratureGrid: need finite a < b");
    }
}

} // namespace

QuadratureGrid QuadratureGrid::gauss_legendre(int n, double a, double b) {
    check_interval(n, 1, a, b);
    std::vector<double> nodes(n), weights(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    // Roots of P_n by Newton's method; symmetric pairs share one solve.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = weights[n - 1 - i] = half * w;
    }
    if (n % 2 == 1) {
        nodes[n / 2] = mid;
    }
    // Remove the summation drift so the weights add to b - a.
    double total = 0.0;
    for (double w : weights) {
        total += w;
    }
    for (double& w : weights) {
        w *= (b - a) / total;
    }
    return QuadratureGrid(Rule::GaussLegendre, a, b, std::move(nodes), std::move(weights));
}

QuadratureGrid QuadratureGrid::trapezoid(int n, double a, double b) {
    check_interval(n, 2, a, b);
    const double h = (b - a) / (n - 1);
    std::vector<double> nodes(n), weights(n, h);
    for (int i = 0; i < n; ++i) {
        nodes[i] = (i + 1 == n) ? b : a + i * h;
    }
    weights.front() = weights.back() = 0.5 * h;
    return QuadratureGrid(Rule::Trapezoid, a, b, std::move(nodes), std::move(weights));
}

} // namespace imbed
