#include "imbed/hammerstein.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace imbed {

namespace {

double inf_norm(const Vector& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

void check_nonlinearity(const QuadratureGrid& grid, const NonlinearProblem::Nonlinearity& F,
                        const NonlinearProblem::Nonlinearity& dF) {
    if (!F || !dF) {
        throw std::invalid_argument("NonlinearProblem: F and dF must be set");
    }
    const auto& x = grid.nodes();
    const double ys[] = {x.front(), x[x.size() / 2], x.back()};
    const Complex psis[] = {0.0, 0.5, -1.0, 1.5, {0.3, 0.2}};
    for (double y : ys) {
        for (Complex psi : psis) {
            const Complex value = F(y, psi);
            const Complex slope = dF(y, psi);
            if (!std::isfinite(std::abs(value)) || !std::isfinite(std::abs(slope))) {
                throw std::invalid_argument("NonlinearProblem: F or dF is not finite on the probe points");
            }
            const double h = 1e-6 * (1.0 + std::abs(psi));
            const Complex fd = (F(y, psi + h) - F(y, psi - h)) / (2.0 * h);
            if (std::abs(fd - slope) > 1e-5 * std::max(1.0, std::abs(slope))) {
                std::ostringstream msg;
                msg << "NonlinearProblem: dF disagrees with finite differences of F at y = " << y
                    << ", psi = " << psi;
                throw std::invalid_argument(msg.str());
            }
        }
    }
}

} // namespace

NonlinearProblem::NonlinearProblem(KernelSpec kernel, QuadratureGrid grid, Nonlinearity F, Nonlinearity dF)
    : kernel_(std::move(kernel)), grid_(std::move(grid)), F_(std::move(F)), dF_(std::move(dF)) {
    // discretize() carries the domain check; its slope is −KW.
    kw_ = -discretize(kernel_, grid_).f(1.0).matrix();
    check_nonlinearity(grid_, F_, dF_);
}

Vector NonlinearProblem::F(const Vector& psi) const {
    Vector out(psi.size());
    for (Index i = 0; i < psi.size(); ++i) {
        out(i) = F_(grid_.nodes()[i], psi(i));
    }
    return out;
}

Vector NonlinearProblem::dF(const Vector& psi) const {
    Vector out(psi.size());
    for (Index i = 0; i < psi.size(); ++i) {
        out(i) = dF_(grid_.nodes()[i], psi(i));
    }
    return out;
}

Vector NonlinearProblem::residual(double lambda, const Vector& psi) const {
    return psi - lambda * (kw_ * F(psi));
}

Matrix NonlinearProblem::linearization(double lambda, const Vector& psi) const {
    return -lambda * (kw_ * dF(psi).asDiagonal());
}

ImbeddingState linear_bootstrap(const Matrix& a, const IntegratorConfig& cfg) {
    const OperatorFamily family = OperatorFamily::linear(DiscreteOperator(a));
    try {
        return initialize_at(family, 1.0, cfg);
    } catch (const SingularityError&) {
        // A zero of det(I + ξA) inside (0, 1) blocks the real ξ-path; go
        // around it. If d(1) itself vanishes both detours fail as well.
        for (auto side : {LambdaPath::Side::Left, LambdaPath::Side::Right}) {
            try {
                return initialize_at(family, 1.0, cfg, LambdaPath::arc(0.0, 1.0, side));
            } catch (const SingularityError&) {
            }
        }
        throw;
    }
}

ContinuationState newton_solve(const NonlinearProblem& problem, double lambda, const Vector& psi0,
                               double newton_tol, int max_iters, const IntegratorConfig& cfg) {
    if (max_iters < 1) {
        throw std::invalid_argument("newton_solve: max_iters must be at least 1");
    }
    if (psi0.size() != problem.dim()) {
        throw std::invalid_argument("newton_solve: psi0 has the wrong length");
    }
    if (!std::isfinite(lambda)) {
        throw std::invalid_argument("newton_solve: lambda must be finite");
    }
    auto linearized = [&](const Vector& psi) {
        try {
            return linear_bootstrap(problem.linearization(lambda, psi), cfg);
        } catch (const SingularityError& e) {
            std::ostringstream msg;
            msg << "linearized operator is singular at lambda = " << lambda << " (" << e.what() << ")";
            throw SingularityError(lambda, e.d(), msg.str());
        }
    };

    Vector psi = psi0;
    Vector r = problem.residual(lambda, psi);
    double norm = inf_norm(r);
    int iters = 0;
    while (!(norm < newton_tol)) {
        if (iters == max_iters) {
            std::ostringstream msg;
            msg << "Newton did not converge at lambda = " << lambda << " after " << iters
                << " iterations (residual " << norm << ")";
            throw NonConvergenceError(lambda, iters, norm, msg.str());
        }
        const ImbeddingState lin = linearized(psi);
        psi -= solve(lin, r, cfg.singularity_threshold);
        r = problem.residual(lambda, psi);
        norm = inf_norm(r);
        ++iters;
        if (!std::isfinite(norm)) {
            throw NonConvergenceError(lambda, iters, norm, "Newton iterate became non-finite");
        }
    }
    const ImbeddingState lin = linearized(psi);
    return ContinuationState{lambda, psi, lin.d, 0, iters, norm};
}

namespace {

bool flags(const ContinuationState& a, const ContinuationState& b, double tol) {
    const bool crossed = std::signbit(a.d_lin.real()) != std::signbit(b.d_lin.real());
    return crossed || std::abs(b.d_lin) < tol;
}

BifurcationPoint locate(const NonlinearProblem& problem, ContinuationState lo, ContinuationState hi,
                        const ContinuationConfig& cfg) {
    BifurcationPoint point;
    point.bracket_lo = lo.lambda;
    point.bracket_hi = hi.lambda;
    if (std::signbit(lo.d_lin.real()) == std::signbit(hi.d_lin.real())) {
        point.lambda = hi.lambda;
        point.state = hi;
        return point;
    }
    while (std::abs(hi.lambda - lo.lambda) > cfg.locate_tol) {
        const double mid = 0.5 * (lo.lambda + hi.lambda);
        ContinuationState s;
        try {
            s = newton_solve(problem, mid, lo.psi, cfg.newton_tol, cfg.max_iters, cfg.integrator);
        } catch (const SingularityError& e) {
            // The linearization is singular to working precision: this is λ*.
            s = lo;
            s.lambda = mid;
            s.d_lin = e.d();
            s.residual = inf_norm(problem.residual(mid, s.psi));
            point.lambda = mid;
            point.state = s;
            return point;
        }
        s.branch_id = lo.branch_id;
        if (std::signbit(s.d_lin.real()) == std::signbit(lo.d_lin.real())) {
            lo = std::move(s);
        } else {
            hi = std::move(s);
        }
    }
    ContinuationState& nearer = std::abs(lo.d_lin) <= std::abs(hi.d_lin) ? lo : hi;
    point.lambda = nearer.lambda;
    point.state = nearer;
    return point;
}

} // namespace

BranchResult continue_branch(const NonlinearProblem& problem, double lambda_start, double lambda_end,
                             double step, const Vector& psi0, const ContinuationConfig& cfg, int branch_id) {
    if (step == 0.0 || !std::isfinite(step)) {
        throw std::invalid_argument("continue_branch: step must be nonzero and finite");
    }
    if ((lambda_end - lambda_start) * step < 0.0) {
        throw std::invalid_argument("continue_branch: step points away from lambda_end");
    }
    BranchResult result;
    auto solve_at = [&](double lambda, const Vector& guess) {
        ContinuationState s = newton_solve(problem, lambda, guess, cfg.newton_tol, cfg.max_iters, cfg.integrator);
        s.branch_id = branch_id;
        return s;
    };
    result.states.push_back(solve_at(lambda_start, psi0));
    if (std::abs(result.states.back().d_lin) < cfg.bifurcation_tol) {
        const auto& s = result.states.back();
        result.bifurcations.push_back({s.lambda, s.lambda, s.lambda, s});
    }

    const double span = lambda_end - lambda_start;
    const auto steps = static_cast<long>(std::ceil(std::abs(span / step) - 1e-9));
    // λ of a grid point that landed on a singular linearization; the next
    // interval straddles it and must not be bisected again.
    std::optional<double> singular_at;
    for (long k = 1; k <= steps; ++k) {
        const double lambda = k == steps ? lambda_end : lambda_start + static_cast<double>(k) * step;
        const ContinuationState& prev = result.states.back();
        ContinuationState next;
        try {
            next = solve_at(lambda, prev.psi);
        } catch (const SingularityError& e) {
            ContinuationState at = prev;
            at.lambda = lambda;
            at.d_lin = e.d();
            at.residual = inf_norm(problem.residual(lambda, at.psi));
            result.bifurcations.push_back({lambda, prev.lambda, lambda, at});
            singular_at = lambda;
            continue;
        }
        if (singular_at) {
            singular_at.reset();
        } else if (flags(prev, next, cfg.bifurcation_tol)) {
            result.bifurcations.push_back(locate(problem, prev, next, cfg));
        }
        result.states.push_back(std::move(next));
    }
    return result;
}

Vector null_direction(const NonlinearProblem& problem, const ContinuationState& state,
                      const IntegratorConfig& cfg) {
    const OperatorFamily family =
        OperatorFamily::linear(DiscreteOperator(problem.linearization(state.lambda, state.psi)));
    const auto zeros = find_eigenvalues(family, LambdaPath::segment(0.0, 1.25), cfg, 1e-10);
    const auto nearest = std::min_element(zeros.begin(), zeros.end(), [](const Eigenpair& a, const Eigenpair& b) {
        return std::abs(a.lambda - 1.0) < std::abs(b.lambda - 1.0);
    });
    return nearest->eigenvector;
}

ContinuationState branch_switch(const NonlinearProblem& problem, const ContinuationState& state, int direction,
                                double amplitude, double lambda_offset, const ContinuationConfig& cfg) {
    if (direction != 1 && direction != -1) {
        throw std::invalid_argument("branch_switch: direction must be +1 or -1");
    }
    if (!(amplitude > 0.0) || lambda_offset == 0.0) {
        throw std::invalid_argument("branch_switch: need amplitude > 0 and a nonzero lambda offset");
    }
    if (!(std::abs(state.d_lin) < cfg.bifurcation_tol)) {
        throw std::invalid_argument("branch_switch: state is not at a bifurcation (|d_lin| too large)");
    }
    const Vector v = null_direction(problem, state, cfg.integrator);

    ContinuationState fallback;
    bool have_fallback = false;
    for (double offset : {lambda_offset, -lambda_offset}) {
        const double lambda = state.lambda + offset;
        // Where the original branch sits at the new λ.
        const ContinuationState original =
            newton_solve(problem, lambda, state.psi, cfg.newton_tol, cfg.max_iters, cfg.integrator);
        const double same = 1e-6 * std::max(1.0, original.psi.norm());
        double a = amplitude;
        for (int attempt = 0; attempt < 5; ++attempt, a *= 2.0) {
            const Vector guess = state.psi + (a * direction) * v;
            ContinuationState s;
            try {
                s = newton_solve(problem, lambda, guess, cfg.newton_tol, cfg.max_iters, cfg.integrator);
            } catch (const NonConvergenceError&) {
                continue;
            }
            if ((s.psi - original.psi).norm() > same) {
                s.branch_id = state.branch_id + 1;
                return s;
            }
            if (!have_fallback) {
                fallback = s;
                fallback.branch_id = state.branch_id;
                have_fallback = true;
            }
        }
    }
    if (!have_fallback) {
        std::ostringstream msg;
        msg << "branch switch at lambda = " << state.lambda << ": Newton failed for every amplitude";
        throw NonConvergenceError(state.lambda + lambda_offset, cfg.max_iters, 0.0, msg.str());
    }
    return fallback;
}

} // namespace imbed
