#pragma once

#include <functional>
#include <vector>

#include "imbed/imbedding_engine.hpp"
#include "imbed/kernel.hpp"
#include "imbed/quadrature.hpp"

namespace imbed {

/// How quadrature weights enter the Nyström matrix.
enum class Weighting {
    /// f[i][j] = −λ·K(x_i, x_j)·w_j.
    OneSided,
    /// f[i][j] = −λ·√w_i·K(x_i, x_j)·√w_j; similar to OneSided, symmetric for
    /// symmetric kernels.
    Symmetrized,
};

/// K(x_i, x_j) on the grid nodes.
Matrix kernel_matrix(const KernelSpec& kernel, const QuadratureGrid& grid);

/// Linear family f̂(λ) = −λ·(Nyström matrix of K). Throws DomainMismatchError
/// when the grid and kernel intervals differ.
OperatorFamily discretize(const KernelSpec& kernel, const QuadratureGrid& grid,
                          Weighting weighting = Weighting::OneSided);

/// d(λ) and samples D(x_i, y_j, λ) of the classical imbedding pair.
struct ClassicalState {
    Complex lambda;
    Complex d;
    Matrix D;
    double step_size = 0.0;
};

/// Classical march from λ = 0 (d = 1, D = K) along `path`:
///   d′ = −Σ_i D(x_i, x_i)·w_i,
///   D′ = D·d′/d + (1/d)·Σ_z D(x, z)·D(z, y)·w_z.
/// Returns the initial state followed by every accepted step.
std::vector<ClassicalState> classical_imbedding_march(const KernelSpec& kernel, const QuadratureGrid& grid,
                                                      const LambdaPath& path, const IntegratorConfig& cfg);

/// The same march along the real segment [0, lambda_end].
std::vector<ClassicalState> classical_imbedding_march(const KernelSpec& kernel, const QuadratureGrid& grid,
                                                      double lambda_end, const IntegratorConfig& cfg);

struct CorrespondenceReport {
    Complex lambda;
    /// max |D_classical − (K·W·D̂·W⁻¹)|: the quadrature form of D = ∫K D̂.
    double kernel_residual = 0.0;
    /// |d_classical − d_general|.
    double determinant_residual = 0.0;
    /// max |R_op − (−(1/λ) f̂ R̂)| with R_op = (D_classical/d)·W the operator
    /// of the classical resolvent kernel.
    double resolvent_residual = 0.0;
    Complex d_classical;
    Complex d_general;
};

/// Runs both marches from λ = 0 through the waypoints of `path` and compares
/// them at every waypoint after the first.
std::vector<CorrespondenceReport> correspondence_check(const KernelSpec& kernel, const QuadratureGrid& grid,
                                                       const LambdaPath& path, const IntegratorConfig& cfg);

/// Comparison at a single λ reached along the straight segment from 0.
CorrespondenceReport correspondence_check(const KernelSpec& kernel, const QuadratureGrid& grid, Complex lambda,
                                          const IntegratorConfig& cfg);

/// ψ(x_i) solving ψ = λ∫Kψ + φ on the grid, through the generalized engine
/// (ψ = D̂φ/d). The march runs along the real segment from 0 and falls back to
/// a semicircle in the upper half-plane when a zero of d lies on the way.
Vector solve_fredholm(const KernelSpec& kernel, const QuadratureGrid& grid, Complex lambda, const Vector& phi,
                      const IntegratorConfig& cfg);
Vector solve_fredholm(const KernelSpec& kernel, const QuadratureGrid& grid, Complex lambda,
                      const std::function<Complex(double)>& phi, const IntegratorConfig& cfg);

} // namespace imbed
