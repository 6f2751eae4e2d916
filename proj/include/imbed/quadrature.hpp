#pragma once

#include <vector>

namespace imbed {

/// Nodes and positive weights on [a, b] for Nyström discretization.
class QuadratureGrid {
public:
    enum class Rule { GaussLegendre, Trapezoid };

    /// n-point Gauss–Legendre rule; exact for polynomials of degree 2n−1.
    static QuadratureGrid gauss_legendre(int n, double a = 0.0, double b = 1.0);
    /// Composite trapezoid rule on n equally spaced nodes (n ≥ 2).
    static QuadratureGrid trapezoid(int n, double a = 0.0, double b = 1.0);

    Rule rule() const noexcept { return rule_; }
    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    int size() const noexcept { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    QuadratureGrid(Rule rule, double a, double b, std::vector<double> nodes, std::vector<double> weights);

    Rule rule_;
    double a_;
    double b_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

} // namespace imbed
