#include "imbed/fredholm_frontend.hpp"

#include <cmath>
#include <sstream>

#include "ode_stepper.hpp"

namespace imbed {

namespace {

Eigen::VectorXd weight_vector(const QuadratureGrid& grid) {
    return Eigen::Map<const Eigen::VectorXd>(grid.weights().data(), grid.size());
}

void check_domain(const KernelSpec& kernel, const QuadratureGrid& grid) {
    const double scale = 1e-12 * (1.0 + std::abs(kernel.a()) + std::abs(kernel.b()));
    if (std::abs(kernel.a() - grid.a()) > scale || std::abs(kernel.b() - grid.b()) > scale) {
        std::ostringstream msg;
        msg << "kernel domain [" << kernel.a() << ", " << kernel.b() << "] does not match grid ["
            << grid.a() << ", " << grid.b() << "]";
        throw DomainMismatchError(msg.str());
    }
}

// Classical pair on the sampled D(x_i, y_j); state = [d, vec(D)].
class ClassicalMarch {
public:
    ClassicalMarch(const KernelSpec& kernel, const QuadratureGrid& grid, const IntegratorConfig& cfg)
        : cfg_(cfg), n_(grid.size()), w_(weight_vector(grid).cast<Complex>()) {
        check_domain(kernel, grid);
        cfg_.validate();
        y_.resize(1 + n_ * n_);
        y_(0) = 1.0;
        Eigen::Map<Matrix>(y_.data() + 1, n_, n_) = kernel_matrix(kernel, grid);
    }

    ClassicalState current(Complex lambda, double step) const {
        return ClassicalState{lambda, y_(0), Eigen::Map<const Matrix>(y_.data() + 1, n_, n_), step};
    }

    void advance(Complex from, Complex to, std::vector<ClassicalState>* out) {
        const double threshold = cfg_.singularity_threshold;
        detail::Rhs rhs = [&](Complex lambda, const detail::StateVector& y) {
            const Complex d = y(0);
            if (!(std::abs(d) > threshold)) {
                std::ostringstream msg;
                msg << "classical march: |d| = " << std::abs(d) << " at lambda = " << lambda;
                throw SingularityError(lambda, d, msg.str());
            }
            Eigen::Map<const Matrix> D(y.data() + 1, n_, n_);
            detail::StateVector out_vec(y.size());
            const Complex d_dot = -(D.diagonal().cwiseProduct(w_)).sum();
            out_vec(0) = d_dot;
            Eigen::Map<Matrix> D_dot(out_vec.data() + 1, n_, n_);
            D_dot.noalias() = D * w_.asDiagonal() * D;
            D_dot = (D_dot + d_dot * D) / d;
            return out_vec;
        };
        detail::StepObserver observer = [&](Complex lambda, detail::StateVector& y, double step) {
            if (!y.allFinite()) {
                throw StepSizeError(lambda, step, "classical march became non-finite");
            }
            if (out) {
                out->push_back(ClassicalState{lambda, y(0), Eigen::Map<const Matrix>(y.data() + 1, n_, n_), step});
            }
            return false;
        };
        detail::march_segment(rhs, y_, from, to, cfg_, observer, step_hint_);
    }

private:
    IntegratorConfig cfg_;
    Index n_;
    Vector w_;
    detail::StateVector y_;
    double step_hint_ = 0.0;
};

LambdaPath from_origin(const LambdaPath& path) {
    if (path.front() != Complex{0.0, 0.0}) {
        throw std::invalid_argument("path must start at lambda = 0");
    }
    return path;
}

} // namespace

Matrix kernel_matrix(const KernelSpec& kernel, const QuadratureGrid& grid) {
    const int n = grid.size();
    Matrix k(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            k(i, j) = kernel(grid.nodes()[i], grid.nodes()[j]);
        }
    }
    return k;
}

OperatorFamily discretize(const KernelSpec& kernel, const QuadratureGrid& grid, Weighting weighting) {
    check_domain(kernel, grid);
    const Eigen::VectorXd w = weight_vector(grid);
    Matrix slope;
    if (weighting == Weighting::OneSided) {
        slope = -(kernel_matrix(kernel, grid) * w.cast<Complex>().asDiagonal());
    } else {
        const Vector root = w.cwiseSqrt().cast<Complex>();
        slope = -(root.asDiagonal() * kernel_matrix(kernel, grid) * root.asDiagonal());
    }
    return OperatorFamily::linear(DiscreteOperator(slope));
}

std::vector<ClassicalState> classical_imbedding_march(const KernelSpec& kernel, const QuadratureGrid& grid,
                                                      const LambdaPath& path, const IntegratorConfig& cfg) {
    from_origin(path);
    ClassicalMarch march(kernel, grid, cfg);
    std::vector<ClassicalState> states{march.current(0.0, 0.0)};
    const auto& w = path.waypoints();
    for (std::size_t i = 1; i < w.size(); ++i) {
        march.advance(w[i - 1], w[i], &states);
    }
    return states;
}

std::vector<ClassicalState> classical_imbedding_march(const KernelSpec& kernel, const QuadratureGrid& grid,
                                                      double lambda_end, const IntegratorConfig& cfg) {
    if (!std::isfinite(lambda_end)) {
        throw std::invalid_argument("classical_imbedding_march: lambda_end must be finite");
    }
    if (lambda_end == 0.0) {
        ClassicalMarch march(kernel, grid, cfg);
        return {march.current(0.0, 0.0)};
    }
    return classical_imbedding_march(kernel, grid, LambdaPath::segment(0.0, lambda_end), cfg);
}

std::vector<CorrespondenceReport> correspondence_check(const KernelSpec& kernel, const QuadratureGrid& grid,
                                                       const LambdaPath& path, const IntegratorConfig& cfg) {
    from_origin(path);
    const OperatorFamily family = discretize(kernel, grid, Weighting::OneSided);
    const Index n = grid.size();
    const Eigen::VectorXd w = weight_vector(grid);
    const Vector wc = w.cast<Complex>();
    const Vector w_inv = w.cwiseInverse().cast<Complex>();
    const Matrix kw = kernel_matrix(kernel, grid) * wc.asDiagonal();

    ClassicalMarch classical(kernel, grid, cfg);
    ImbeddingState general{0.0, 1.0, DiscreteOperator::identity(n), 0.0, 0.0};

    std::vector<CorrespondenceReport> reports;
    const auto& waypoints = path.waypoints();
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        classical.advance(waypoints[i - 1], waypoints[i], nullptr);
        general = propagate(family, LambdaPath::segment(waypoints[i - 1], waypoints[i]), general, cfg);
        const ClassicalState c = classical.current(waypoints[i], 0.0);
        const Matrix& D_hat = general.D.matrix();

        CorrespondenceReport r;
        r.lambda = waypoints[i];
        r.d_classical = c.d;
        r.d_general = general.d;
        r.determinant_residual = std::abs(c.d - general.d);
        r.kernel_residual = max_abs(c.D - kw * D_hat * w_inv.asDiagonal());
        // −(1/λ)f̂ = K·W for the linear family, so no division by λ is needed.
        const Matrix r_op = (c.D * wc.asDiagonal()) / c.d;
        r.resolvent_residual = max_abs(r_op - kw * D_hat / general.d);
        reports.push_back(r);
    }
    return reports;
}

CorrespondenceReport correspondence_check(const KernelSpec& kernel, const QuadratureGrid& grid, Complex lambda,
                                          const IntegratorConfig& cfg) {
    if (lambda == Complex{0.0, 0.0}) {
        check_domain(kernel, grid);
        const Index n = grid.size();
        const Vector wc = weight_vector(grid).cast<Complex>();
        const Matrix kw = kernel_matrix(kernel, grid) * wc.asDiagonal();
        CorrespondenceReport r;
        r.d_classical = r.d_general = 1.0;
        // At λ = 0: D = K, D̂ = I, so K·W·I·W⁻¹ − K vanishes identically.
        r.kernel_residual = max_abs(kernel_matrix(kernel, grid) - kw * Matrix::Identity(n, n) *
                                                                   wc.cwiseInverse().asDiagonal());
        r.resolvent_residual = 0.0;
        return r;
    }
    return correspondence_check(kernel, grid, LambdaPath::segment(0.0, lambda), cfg).back();
}

Vector solve_fredholm(const KernelSpec& kernel, const QuadratureGrid& grid, Complex lambda, const Vector& phi,
                      const IntegratorConfig& cfg) {
    if (phi.size() != grid.size()) {
        throw std::invalid_argument("solve_fredholm: phi must have one sample per node");
    }
    const OperatorFamily family = discretize(kernel, grid, Weighting::OneSided);
    if (lambda == Complex{0.0, 0.0}) {
        return phi;
    }
    const ImbeddingState origin{0.0, 1.0, DiscreteOperator::identity(grid.size()), 0.0, 0.0};
    ImbeddingState state = origin;
    try {
        state = propagate(family, LambdaPath::segment(0.0, lambda), origin, cfg);
    } catch (const SingularityError&) {
        state = propagate(family, LambdaPath::arc(0.0, lambda), origin, cfg);
    } catch (const StepSizeError&) {
        state = propagate(family, LambdaPath::arc(0.0, lambda), origin, cfg);
    } catch (const ConsistencyError&) {
        state = propagate(family, LambdaPath::arc(0.0, lambda), origin, cfg);
    }
    Vector psi = solve(state, phi, cfg.singularity_threshold);

    const Matrix lhs = Matrix::Identity(grid.size(), grid.size()) + family.f(lambda).matrix();
    const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
    const double residual = (lhs * psi - phi).cwiseAbs().maxCoeff();
    if (!(residual < cfg.consistency_tol * scale)) {
        std::ostringstream msg;
        msg << "solve_fredholm: discrete residual " << residual << " exceeds tolerance";
        throw ConsistencyError(lambda, residual, msg.str());
    }
    return psi;
}

Vector solve_fredholm(const KernelSpec& kernel, const QuadratureGrid& grid, Complex lambda,
                      const std::function<Complex(double)>& phi, const IntegratorConfig& cfg) {
    Vector samples(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        samples(i) = phi(grid.nodes()[i]);
    }
    return solve_fredholm(kernel, grid, lambda, samples, cfg);
}

} // namespace imbed
