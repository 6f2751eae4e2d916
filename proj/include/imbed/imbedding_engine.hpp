#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "imbed/operator_core.hpp"

namespace imbed {

/// Analytic operator-valued map λ ↦ f̂(λ) together with its λ-derivative.
class OperatorFamily {
public:
    using Map = std::function<Matrix(Complex)>;

    struct Analytic {};
    /// df(λ) = [f(λ+h) − f(λ−h)]/(2h). A non-positive h selects the default
    /// h = 1e-6·(1 + |λ|).
    struct CentralDifference {
        double h = 0.0;
    };
    using DerivativeMode = std::variant<Analytic, CentralDifference>;

    static OperatorFamily analytic(Index dim, Map f, Map df);
    static OperatorFamily central_difference(Index dim, Map f, double h = 0.0);
    /// f(λ) = λ·slope.
    static OperatorFamily linear(const DiscreteOperator& slope);
    /// f(λ) = offset + λ·slope.
    static OperatorFamily affine(const DiscreteOperator& offset, const DiscreteOperator& slope);

    Index dim() const noexcept { return dim_; }
    const DerivativeMode& derivative_mode() const noexcept { return mode_; }

    /// Both throw std::invalid_argument when the map returns the wrong shape
    /// or non-finite entries.
    DiscreteOperator f(Complex lambda) const;
    DiscreteOperator df(Complex lambda) const;

private:
    OperatorFamily(Index dim, Map f, Map df, DerivativeMode mode);

    Index dim_;
    Map f_;
    Map df_;
    DerivativeMode mode_;
};

/// (λ, d(λ), D̂(λ)) plus the bookkeeping recorded when the state was sampled.
struct ImbeddingState {
    Complex lambda;
    Complex d;
    DiscreteOperator D;
    /// ‖D̂ + f̂(λ)D̂ − d·I‖_max / max(1, |d|).
    double residual = 0.0;
    /// |Δλ| of the step that produced this sample (0 for an initial state).
    double step_size = 0.0;
};

/// Piecewise-linear path through the complex λ-plane.
class LambdaPath {
public:
    enum class Side { Left, Right };

    /// At least two waypoints, consecutive ones distinct.
    explicit LambdaPath(std::vector<Complex> waypoints);

    static LambdaPath segment(Complex from, Complex to);
    /// Semicircle with diameter [from, to], bulging to `side` of the direction
    /// of travel (Left is the upper half-plane for a left-to-right real path),
    /// approximated by `pieces` chords.
    static LambdaPath arc(Complex from, Complex to, Side side = Side::Left, int pieces = 48);
    /// Straight from `from` to `to`, except for a semicircular detour of
    /// `radius` around `center`, which must lie on the segment.
    static LambdaPath detour(Complex from, Complex to, Complex center, double radius,
                             Side side = Side::Left, int pieces = 48);
    /// Closed circle, starting and ending at center + radius·e^{i·start_angle}.
    static LambdaPath circle(Complex center, double radius, double start_angle = 0.0,
                             int pieces = 64);

    const std::vector<Complex>& waypoints() const noexcept { return waypoints_; }
    Complex front() const { return waypoints_.front(); }
    Complex back() const { return waypoints_.back(); }
    double length() const;
    /// True when every waypoint lies exactly on the real axis.
    bool is_real() const;

private:
    std::vector<Complex> waypoints_;
};

struct Rk4Fixed {
    int steps_per_segment = 200;
};

struct Rk45Adaptive {
    double rtol = 1e-8;
    double atol = 1e-10;
    /// Smallest admissible |Δλ| before StepSizeError.
    double min_step = 1e-12;
};

struct IntegratorConfig {
    std::variant<Rk45Adaptive, Rk4Fixed> method = Rk45Adaptive{};
    /// Abort when |d| falls to this value or below.
    double singularity_threshold = 1e-12;
    double consistency_tol = 1e-6;
    /// Replace the state by the exact (det, D̂ series) pair every N accepted
    /// steps; 0 disables.
    int renormalize_every = 0;

    /// Throws std::invalid_argument on a non-positive tolerance or step count.
    void validate() const;
};

/// Consistency residual ‖D + f·D − d·I‖_max / max(1, |d|).
double consistency_residual(const Matrix& f, Complex d, const Matrix& D);

/// Right-hand side of the imbedding pair
///   d′ = Tr[f̂′ D̂],   D̂′ = (D̂/d)[d′·I − f̂′ D̂].
/// Throws SingularityError when |d| ≤ singularity_threshold.
std::pair<Complex, Matrix> imbedding_rhs(const ImbeddingState& state, const OperatorFamily& family,
                                         double singularity_threshold = 1e-12);

/// Integrates the imbedding pair along `path`, starting from `init` (whose λ
/// must equal path.front()). Returns `init` followed by every accepted step;
/// the final sample sits on path.back().
std::vector<ImbeddingState> integrate_path(const OperatorFamily& family, const LambdaPath& path,
                                           const ImbeddingState& init, const IntegratorConfig& cfg);

/// As integrate_path, keeping only the final state.
ImbeddingState propagate(const OperatorFamily& family, const LambdaPath& path,
                         const ImbeddingState& init, const IntegratorConfig& cfg);

/// Initial values at λ₀ by imbedding in ξ: integrates g(ξ) = ξ·f̂(λ₀) from
/// (d, D̂) = (1, I) at ξ = 0 to ξ = 1. `xi_path` may route ξ through the
/// complex plane around zeros of det(I + ξ f̂(λ₀)); it must run from 0 to 1.
ImbeddingState initialize_at(const OperatorFamily& family, Complex lambda0,
                             const IntegratorConfig& cfg,
                             const std::optional<LambdaPath>& xi_path = std::nullopt);

/// ψ = D̂φ/d. Throws SingularityError when |d| ≤ singularity_threshold and
/// std::invalid_argument on a length mismatch.
Vector solve(const ImbeddingState& state, const Vector& phi, double singularity_threshold = 1e-12);

struct Eigenpair {
    Complex lambda;
    /// Column of D̂(λ) with the largest norm, unit length, phase fixed so its
    /// largest-modulus component is real and positive.
    Vector eigenvector;
    /// Determinant at the reported λ.
    Complex d;
};

struct ScanOptions {
    /// Number of chunks the scan path is cut into.
    int samples = 200;
    /// Radius of the semicircle used to step around a predicted zero; 0 means
    /// 10× the last adaptive step, capped at half a chunk.
    double detour_radius = 0.0;
    int max_refine_iterations = 80;
};

/// Zeros of d(λ) met along `scan`, refined until |d| < refine_tol (or until
/// the imbedding march itself reports |d| ≤ singularity_threshold).
/// Throws NoBracketError when the scan shows no zero.
std::vector<Eigenpair> find_eigenvalues(const OperatorFamily& family, const LambdaPath& scan,
                                        const IntegratorConfig& cfg, double refine_tol,
                                        const ScanOptions& options = {});

/// Winding number of d(λ) around `circle`, accumulated from the sampled phase
/// of the integrated determinant. `start` must lie on circle.front().
int winding_number(const OperatorFamily& family, const LambdaPath& circle,
                   const ImbeddingState& start, const IntegratorConfig& cfg);

/// Unit-norm, phase-fixed column of largest norm (ties: lowest index).
Vector dominant_column(const Matrix& D);

} // namespace imbed
