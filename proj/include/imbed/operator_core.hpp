#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "imbed/errors.hpp"

namespace imbed {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// A trace-class operator represented in a finite basis: a dense, square,
/// finite complex matrix of dimension at least one.
class DiscreteOperator {
public:
    /// Throws std::invalid_argument if `entries` is empty, not square, or
    /// holds a NaN/Inf.
    explicit DiscreteOperator(Matrix entries);

    static DiscreteOperator identity(Index dim);
    static DiscreteOperator zero(Index dim);

    Index dim() const noexcept { return entries_.rows(); }
    const Matrix& matrix() const noexcept { return entries_; }
    Complex operator()(Index row, Index col) const { return entries_(row, col); }

private:
    Matrix entries_;
};

/// Result of summing the determinant series.
struct ScalarSeriesReport {
    Complex value;
    /// Number of terms summed, counting the k = 0 term.
    int terms_used = 0;
    /// Σ_{j>k} ‖A‖₁ʲ/j! at the cutoff k. Informational: in finite dimension
    /// the series is exact once k reaches dim.
    double truncation_bound = 0.0;
};

Complex trace(const DiscreteOperator& a);

/// Sum of singular values.
double trace_norm(const DiscreteOperator& a);

/// Tr(Aᵐ) for m = 0..max_power (entry 0 is dim).
std::vector<Complex> power_traces(const DiscreteOperator& a, int max_power);

/// Tr[Λᵏ(A)] for k = 0..max_order, via the Newton recursion
///   Tr[Λᵏ] = (1/k) Σ_{m=1}^{k} (−1)^{m+1} Tr(Aᵐ) Tr[Λ^{k−m}],
/// with Tr[Λ⁰] = 1 and every order above dim set to exactly zero.
std::vector<Complex> exterior_power_traces(const DiscreteOperator& a, int max_order);

Complex exterior_power_trace(const DiscreteOperator& a, int k);

/// Contraction of Λᵏ(A) onto the base space:
///   Tr_{k−1}[Λᵏ(A)] = (1/k) Σ_{m=1}^{k} (−1)^{m+1} A^{m−1} Tr[Λ^{k−m}(A)].
/// For k = 1 this is the identity. Requires k ≥ 1.
DiscreteOperator partial_trace(const DiscreteOperator& a, int k);

/// d = Σ_k Tr[Λᵏ(A)] = det(I + A). Stops once the trace-norm tail bound
/// drops below `tol`, and always at k = dim. Requires tol > 0.
ScalarSeriesReport fredholm_det_series(const DiscreteOperator& a, double tol);

/// D̂ = Σ_{k=1}^{dim+1} k·Tr_{k−1}[Λᵏ(A)], which satisfies D̂(I + A) = det(I + A)·I.
DiscreteOperator d_operator_series(const DiscreteOperator& a);

/// β_k(A): the Plemelj–Smithies determinant whose first column holds
/// A, A², …, Aᵏ and whose remaining columns are the scalar power-trace
/// Toeplitz block of Tr[Λᵏ]·k!. Evaluated by cofactor expansion along the
/// first column, with the scalar cofactors taken from LU determinants of the
/// minors. Requires k ≥ 1.
DiscreteOperator plemelj_smithies_beta(const DiscreteOperator& a, int k);

/// The k×k scalar matrix whose determinant is k!·Tr[Λᵏ(A)]: first column
/// Tr(A), …, Tr(Aᵏ); superdiagonal k−1, …, 1; lower Toeplitz power traces.
Matrix power_trace_matrix(const std::vector<Complex>& power_traces, int k);

/// Largest entry modulus.
double max_abs(const Matrix& m);

} // namespace imbed
