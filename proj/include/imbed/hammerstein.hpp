#pragma once

#include <functional>
#include <vector>

#include "imbed/fredholm_frontend.hpp"

namespace imbed {

/// ψ(x) = λ∫K(x, y)·F(y, ψ(y))dy on a quadrature grid.
class NonlinearProblem {
public:
    using Nonlinearity = std::function<Complex(double, Complex)>;

    /// Checks F and dF for finiteness and dF against central differences of F
    /// (1e-5 relative) on probe points; throws std::invalid_argument otherwise.
    NonlinearProblem(KernelSpec kernel, QuadratureGrid grid, Nonlinearity F, Nonlinearity dF);

    const KernelSpec& kernel() const noexcept { return kernel_; }
    const QuadratureGrid& grid() const noexcept { return grid_; }
    Index dim() const noexcept { return kw_.rows(); }
    /// K(x_i, x_j)·w_j.
    const Matrix& kw() const noexcept { return kw_; }

    Vector F(const Vector& psi) const;
    Vector dF(const Vector& psi) const;
    /// ψ − λ·KW·F(ψ).
    Vector residual(double lambda, const Vector& psi) const;
    /// −λ·KW·diag(dF(ψ)); the linearized operator is I plus this.
    Matrix linearization(double lambda, const Vector& psi) const;

private:
    KernelSpec kernel_;
    QuadratureGrid grid_;
    Nonlinearity F_;
    Nonlinearity dF_;
    Matrix kw_;
};

struct ContinuationState {
    double lambda = 0.0;
    Vector psi;
    /// det(I − λKW·diag(dF(ψ))) at the converged ψ.
    Complex d_lin;
    int branch_id = 0;
    int newton_iters = 0;
    /// ‖ψ − λKW·F(ψ)‖∞.
    double residual = 0.0;
};

struct ContinuationConfig {
    double newton_tol = 1e-10;
    int max_iters = 25;
    /// |d_lin| below this flags a bifurcation candidate.
    double bifurcation_tol = 1e-3;
    /// Width to which bisection shrinks a bifurcation bracket.
    double locate_tol = 1e-9;
    IntegratorConfig integrator;
};

/// (d, D̂) of I + A obtained by imbedding in ξ along [0, 1], going around a
/// zero of det(I + ξA) on either side when the straight path meets one.
ImbeddingState linear_bootstrap(const Matrix& a, const IntegratorConfig& cfg);

/// Newton's method with the corrections δ = D̂·r/d from linear_bootstrap of
/// the current linearization. Throws NonConvergenceError after max_iters and
/// SingularityError when the linearized determinant vanishes.
ContinuationState newton_solve(const NonlinearProblem& problem, double lambda, const Vector& psi0,
                               double newton_tol, int max_iters, const IntegratorConfig& cfg = {});

struct BifurcationPoint {
    double lambda = 0.0;
    /// Interval that was bisected; lo == hi when only |d_lin| was small.
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    /// Solution at λ*. When the linearization is numerically singular there,
    /// d_lin is the value reported by the engine.
    ContinuationState state;
};

struct BranchResult {
    std::vector<ContinuationState> states;
    std::vector<BifurcationPoint> bifurcations;
};

/// Natural-parameter continuation from lambda_start to lambda_end (inclusive)
/// with the previous ψ as predictor; `step` must point from start to end.
BranchResult continue_branch(const NonlinearProblem& problem, double lambda_start, double lambda_end,
                             double step, const Vector& psi0, const ContinuationConfig& cfg,
                             int branch_id = 0);

/// Null vector of the linearized operator at `state`: the eigenvector of the
/// zero of det(I + μA) nearest μ = 1.
Vector null_direction(const NonlinearProblem& problem, const ContinuationState& state,
                      const IntegratorConfig& cfg);

/// Perturbs ψ by amplitude·direction·v (v the unit null direction) and runs
/// Newton at λ + lambda_offset. If that lands back on the original branch,
/// the amplitude is doubled up to four times and then the opposite offset is
/// tried. The result carries branch_id + 1, or the original branch_id when
/// every attempt fell back (as for a linear F).
ContinuationState branch_switch(const NonlinearProblem& problem, const ContinuationState& state, int direction,
                                double amplitude, double lambda_offset, const ContinuationConfig& cfg);

} // namespace imbed
