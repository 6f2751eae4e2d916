#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace imbed {

/// One factor u(x) of a separable kernel term, drawn from a small builtin set.
struct ScalarFunction {
    enum class Kind {
        Constant, // param
        Power,    // x^param
        SinPi,    // sin(param·π·x)
        CosPi,    // cos(param·π·x)
        Exp,      // exp(param·x)
    };
    Kind kind = Kind::Constant;
    double param = 1.0;

    double operator()(double x) const;

    static ScalarFunction constant(double c) { return {Kind::Constant, c}; }
    static ScalarFunction power(double p) { return {Kind::Power, p}; }
    static ScalarFunction sin_pi(double n) { return {Kind::SinPi, n}; }
    static ScalarFunction cos_pi(double n) { return {Kind::CosPi, n}; }
    static ScalarFunction exp(double c) { return {Kind::Exp, c}; }
};

/// A continuous kernel K(x, y) on [a, b] × [a, b].
class KernelSpec {
public:
    struct ProductXY {};
    struct SineProduct {
        int n = 1;
    };
    struct ExponentialAbsDiff {
        double c = 1.0;
    };
    /// K(x, y) = Σ u_i(x)·v_i(y); an empty list is the zero kernel.
    struct Separable {
        std::vector<std::pair<ScalarFunction, ScalarFunction>> terms;
    };
    /// Bilinear interpolation of values(i, j) = K(x_i, y_j).
    struct Tabulated {
        std::vector<double> x;
        std::vector<double> y;
        Eigen::MatrixXd values;
    };
    using Kind = std::variant<ProductXY, SineProduct, ExponentialAbsDiff, Separable, Tabulated>;

    /// K = x·y.
    static KernelSpec product_xy(double a = 0.0, double b = 1.0);
    /// K = sin(nπx)·sin(nπy).
    static KernelSpec sine_product(int n, double a = 0.0, double b = 1.0);
    /// K = exp(−c·|x − y|).
    static KernelSpec exponential_absdiff(double c, double a = 0.0, double b = 1.0);
    static KernelSpec separable(std::vector<std::pair<ScalarFunction, ScalarFunction>> terms,
                                double a = 0.0, double b = 1.0);
    static KernelSpec zero(double a = 0.0, double b = 1.0);
    /// Domain defaults to the table's range when a ≥ b is passed.
    static KernelSpec tabulated(std::vector<double> x, std::vector<double> y, Eigen::MatrixXd values,
                                double a = 0.0, double b = 0.0);
    /// CSV: header row of y-nodes (first cell ignored), then one row per
    /// x-node: the node followed by its K values.
    static KernelSpec tabulated_from_csv(const std::string& path, double a = 0.0, double b = 0.0);

    double operator()(double x, double y) const;

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    const Kind& kind() const noexcept { return kind_; }
    std::string name() const;
    /// True when K(x, y) = K(y, x) by construction.
    bool symmetric() const;

private:
    KernelSpec(Kind kind, double a, double b);

    Kind kind_;
    double a_;
    double b_;
};

} // namespace imbed
