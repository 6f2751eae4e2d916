#include "imbed/imbedding_engine.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ode_stepper.hpp"

namespace imbed {

// ---------------------------------------------------------------------------
// OperatorFamily

OperatorFamily::OperatorFamily(Index dim, Map f, Map df, DerivativeMode mode)
    : dim_(dim), f_(std::move(f)), df_(std::move(df)), mode_(mode) {
    if (dim_ < 1) {
        throw std::invalid_argument("OperatorFamily: dim must be at least 1");
    }
    if (!f_) {
        throw std::invalid_argument("OperatorFamily: f is empty");
    }
}

OperatorFamily OperatorFamily::analytic(Index dim, Map f, Map df) {
    if (!df) {
        throw std::invalid_argument("OperatorFamily: analytic mode needs df");
    }
    return OperatorFamily(dim, std::move(f), std::move(df), Analytic{});
}

OperatorFamily OperatorFamily::central_difference(Index dim, Map f, double h) {
    Map df = [f, h](Complex lambda) -> Matrix {
        const double step = h > 0.0 ? h : 1e-6 * (1.0 + std::abs(lambda));
        return (f(lambda + step) - f(lambda - step)) / (2.0 * step);
    };
    return OperatorFamily(dim, std::move(f), std::move(df), CentralDifference{h});
}

OperatorFamily OperatorFamily::linear(const DiscreteOperator& slope) {
    Matrix a = slope.matrix();
    return analytic(
        slope.dim(), [a](Complex lambda) -> Matrix { return lambda * a; },
        [a](Complex) -> Matrix { return a; });
}

OperatorFamily OperatorFamily::affine(const DiscreteOperator& offset, const DiscreteOperator& slope) {
    if (offset.dim() != slope.dim()) {
        throw std::invalid_argument("OperatorFamily::affine: dimension mismatch");
    }
    Matrix b = offset.matrix();
    Matrix a = slope.matrix();
    return analytic(
        slope.dim(), [a, b](Complex lambda) -> Matrix { return b + lambda * a; },
        [a](Complex) -> Matrix { return a; });
}

namespace {

DiscreteOperator checked(Matrix m, Index dim, const char* which) {
    if (m.rows() != dim || m.cols() != dim) {
        std::ostringstream msg;
        msg << "OperatorFamily: " << which << " returned " << m.rows() << "x" << m.cols()
            << ", expected " << dim << "x" << dim;
        throw std::invalid_argument(msg.str());
    }
    return DiscreteOperator(std::move(m));
}

} // namespace

DiscreteOperator OperatorFamily::f(Complex lambda) const {
    return checked(f_(lambda), dim_, "f");
}

DiscreteOperator OperatorFamily::df(Complex lambda) const {
    return checked(df_(lambda), dim_, "df");
}

// ---------------------------------------------------------------------------
// LambdaPath

LambdaPath::LambdaPath(std::vector<Complex> waypoints) : waypoints_(std::move(waypoints)) {
    if (waypoints_.size() < 2) {
        throw std::invalid_argument("LambdaPath: at least two waypoints required");
    }
    for (std::size_t i = 0; i < waypoints_.size(); ++i) {
        if (!std::isfinite(waypoints_[i].real()) || !std::isfinite(waypoints_[i].imag())) {
            throw std::invalid_argument("LambdaPath: waypoints must be finite");
        }
        if (i > 0 && waypoints_[i] == waypoints_[i - 1]) {
            throw std::invalid_argument("LambdaPath: consecutive waypoints must be distinct");
        }
    }
}

LambdaPath LambdaPath::segment(Complex from, Complex to) {
    return LambdaPath({from, to});
}

namespace {

void append_semicircle(std::vector<Complex>& points, Complex center, Complex unit, double radius,
                       LambdaPath::Side side, int pieces) {
    const double sign = side == LambdaPath::Side::Left ? -1.0 : 1.0;
    for (int i = 1; i < pieces; ++i) {
        const double theta = std::numbers::pi * i / pieces;
        points.push_back(center - radius * unit * std::polar(1.0, sign * theta));
    }
    points.push_back(center + radius * unit);
}

} // namespace

LambdaPath LambdaPath::arc(Complex from, Complex to, Side side, int pieces) {
    if (pieces < 2) {
        throw std::invalid_argument("LambdaPath::arc: need at least two pieces");
    }
    if (from == to) {
        throw std::invalid_argument("LambdaPath::arc: endpoints must differ");
    }
    const Complex center = 0.5 * (from + to);
    const double radius = 0.5 * std::abs(to - from);
    const Complex unit = (to - from) / std::abs(to - from);
    std::vector<Complex> points{from};
    append_semicircle(points, center, unit, radius, side, pieces);
    points.back() = to;
    return LambdaPath(std::move(points));
}

LambdaPath LambdaPath::detour(Complex from, Complex to, Complex center, double radius, Side side,
                              int pieces) {
    const double length = std::abs(to - from);
    if (length == 0.0 || !(radius > 0.0)) {
        throw std::invalid_argument("LambdaPath::detour: degenerate segment or radius");
    }
    const Complex unit = (to - from) / length;
    const Complex rel = (center - from) * std::conj(unit);
    if (std::abs(rel.imag()) > 1e-12 * (1.0 + length)) {
        throw std::invalid_argument("LambdaPath::detour: center must lie on the segment");
    }
    const double s = rel.real();
    // Entry and exit points closer than this to `from`/`to` are merged into them.
    const double eps = 1e-12 * (length + std::abs(from));
    if (s - radius < -eps || s + radius > length + eps) {
        throw std::invalid_argument("LambdaPath::detour: semicircle leaves the segment");
    }
    const Complex on_axis = from + s * unit;
    std::vector<Complex> points{from};
    if (s - radius > eps) {
        points.push_back(on_axis - radius * unit);
    }
    append_semicircle(points, on_axis, unit, radius, side, pieces);
    if (length - (s + radius) > eps) {
        points.push_back(to);
    } else {
        points.back() = to;
    }
    return LambdaPath(std::move(points));
}

LambdaPath LambdaPath::circle(Complex center, double radius, double start_angle, int pieces) {
    if (!(radius > 0.0) || pieces < 3) {
        throw std::invalid_argument("LambdaPath::circle: need radius > 0 and at least 3 pieces");
    }
    std::vector<Complex> points;
    points.reserve(static_cast<std::size_t>(pieces) + 1);
    for (int i = 0; i < pieces; ++i) {
        points.push_back(center + std::polar(radius, start_angle + 2.0 * std::numbers::pi * i / pieces));
    }
    points.push_back(points.front());
    return LambdaPath(std::move(points));
}

double LambdaPath::length() const {
    double total = 0.0;
    for (std::size_t i = 1; i < waypoints_.size(); ++i) {
        total += std::abs(waypoints_[i] - waypoints_[i - 1]);
    }
    return total;
}

bool LambdaPath::is_real() const {
    for (const auto& w : waypoints_) {
        if (w.imag() != 0.0) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Integrator configuration

void IntegratorConfig::validate() const {
    if (const auto* a = std::get_if<Rk45Adaptive>(&method)) {
        if (!(a->rtol > 0.0) || !(a->atol > 0.0) || !(a->min_step > 0.0)) {
            throw std::invalid_argument("IntegratorConfig: rk45 tolerances must be positive");
        }
    } else if (std::get<Rk4Fixed>(method).steps_per_segment < 1) {
        throw std::invalid_argument("IntegratorConfig: steps_per_segment must be at least 1");
    }
    if (!(singularity_threshold > 0.0) || !(consistency_tol > 0.0)) {
        throw std::invalid_argument("IntegratorConfig: thresholds must be positive");
    }
    if (renormalize_every < 0) {
        throw std::invalid_argument("IntegratorConfig: renormalize_every must be non-negative");
    }
}

// ---------------------------------------------------------------------------
// Right-hand side

double consistency_residual(const Matrix& f, Complex d, const Matrix& D) {
    Matrix r = D + f * D;
    r.diagonal().array() -= d;
    return max_abs(r) / std::max(1.0, std::abs(d));
}

namespace {

[[noreturn]] void throw_singular(Complex lambda, Complex d) {
    std::ostringstream msg;
    msg << "|d| = " << std::abs(d) << " at or below the singularity threshold at lambda = "
        << lambda;
    throw SingularityError(lambda, d, msg.str());
}

// D̂′ = (D̂/d)(d′·I − f̂′D̂), written as (d′·D̂ − D̂·(f̂′D̂))/d to keep D̂ on the left.
template <class DMat>
Complex rhs_into(const Matrix& df, Complex d, const DMat& D, Eigen::Ref<Matrix> D_dot) {
    const Matrix fpD = df * D;
    const Complex d_dot = fpD.trace();
    D_dot.noalias() = D * fpD;
    D_dot = (d_dot * D - D_dot) / d;
    return d_dot;
}

detail::StateVector pack(Complex d, const Matrix& D) {
    detail::StateVector y(1 + D.size());
    y(0) = d;
    Eigen::Map<Matrix>(y.data() + 1, D.rows(), D.cols()) = D;
    return y;
}

Matrix unpack(const detail::StateVector& y, Index n) {
    return Eigen::Map<const Matrix>(y.data() + 1, n, n);
}

using Sink = std::function<void(ImbeddingState&&)>;

void march(const OperatorFamily& family, const LambdaPath& path, const ImbeddingState& init,
           const IntegratorConfig& cfg, const Sink& sink) {
    cfg.validate();
    const Index n = family.dim();
    if (init.D.dim() != n) {
        throw std::invalid_argument("integrate_path: initial D has the wrong dimension");
    }
    if (std::abs(init.lambda - path.front()) > 1e-12 * (1.0 + std::abs(path.front()))) {
        throw std::invalid_argument("integrate_path: initial lambda must equal the first waypoint");
    }
    const double init_residual =
        consistency_residual(family.f(init.lambda).matrix(), init.d, init.D.matrix());
    if (!(init_residual < cfg.consistency_tol)) {
        std::ostringstream msg;
        msg << "initial state is inconsistent (residual " << init_residual << ")";
        throw ConsistencyError(init.lambda, init_residual, msg.str());
    }

    const double threshold = cfg.singularity_threshold;
    detail::Rhs rhs = [&](Complex lambda, const detail::StateVector& y) {
        const Complex d = y(0);
        if (!(std::abs(d) > threshold)) {
            throw_singular(lambda, d);
        }
        detail::StateVector out(y.size());
        Eigen::Map<const Matrix> D(y.data() + 1, n, n);
        Eigen::Map<Matrix> D_dot(out.data() + 1, n, n);
        out(0) = rhs_into(family.df(lambda).matrix(), d, D, D_dot);
        return out;
    };

    long accepted = 0;
    detail::StepObserver observer = [&](Complex lambda, detail::StateVector& y, double step) {
        ++accepted;
        bool replaced = false;
        const Matrix f = family.f(lambda).matrix();
        if (cfg.renormalize_every > 0 && accepted % cfg.renormalize_every == 0) {
            const DiscreteOperator fo(f);
            y = pack(fredholm_det_series(fo, 1e-300).value, d_operator_series(fo).matrix());
            replaced = true;
        }
        Matrix D = unpack(y, n);
        if (!D.allFinite() || !std::isfinite(std::abs(y(0)))) {
            throw StepSizeError(lambda, step, "imbedding state became non-finite");
        }
        const double residual = consistency_residual(f, y(0), D);
        if (!(residual < cfg.consistency_tol)) {
            std::ostringstream msg;
            msg << "consistency residual " << residual << " exceeds " << cfg.consistency_tol
                << " at lambda = " << lambda;
            throw ConsistencyError(lambda, residual, msg.str());
        }
        sink(ImbeddingState{lambda, y(0), DiscreteOperator(std::move(D)), residual, step});
        return replaced;
    };

    detail::StateVector y = pack(init.d, init.D.matrix());
    double step_hint = 0.0;
    const auto& w = path.waypoints();
    for (std::size_t i = 1; i < w.size(); ++i) {
        detail::march_segment(rhs, y, w[i - 1], w[i], cfg, observer, step_hint);
    }
}

} // namespace

std::pair<Complex, Matrix> imbedding_rhs(const ImbeddingState& state, const OperatorFamily& family,
                                         double singularity_threshold) {
    if (state.D.dim() != family.dim()) {
        throw std::invalid_argument("imbedding_rhs: state and family dimensions differ");
    }
    if (!(std::abs(state.d) > singularity_threshold)) {
        throw_singular(state.lambda, state.d);
    }
    Matrix D_dot(family.dim(), family.dim());
    const Complex d_dot =
        rhs_into(family.df(state.lambda).matrix(), state.d, state.D.matrix(), D_dot);
    return {d_dot, std::move(D_dot)};
}

std::vector<ImbeddingState> integrate_path(const OperatorFamily& family, const LambdaPath& path,
                                           const ImbeddingState& init, const IntegratorConfig& cfg) {
    std::vector<ImbeddingState> states;
    ImbeddingState first = init;
    first.residual = consistency_residual(family.f(first.lambda).matrix(), first.d, first.D.matrix());
    first.step_size = 0.0;
    states.push_back(first);
    march(family, path, first, cfg, [&](ImbeddingState&& s) { states.push_back(std::move(s)); });
    return states;
}

ImbeddingState propagate(const OperatorFamily& family, const LambdaPath& path,
                         const ImbeddingState& init, const IntegratorConfig& cfg) {
    std::optional<ImbeddingState> last;
    march(family, path, init, cfg, [&](ImbeddingState&& s) { last = std::move(s); });
    return std::move(*last);
}

ImbeddingState initialize_at(const OperatorFamily& family, Complex lambda0,
                             const IntegratorConfig& cfg, const std::optional<LambdaPath>& xi_path) {
    const DiscreteOperator target = family.f(lambda0);
    const Index n = family.dim();
    if (target.matrix().isZero(0.0)) {
        return ImbeddingState{lambda0, Complex{1.0, 0.0}, DiscreteOperator::identity(n), 0.0, 0.0};
    }
    const LambdaPath path = xi_path.value_or(LambdaPath::segment(0.0, 1.0));
    if (path.front() != Complex{0.0, 0.0} || path.back() != Complex{1.0, 0.0}) {
        throw std::invalid_argument("initialize_at: xi path must run from 0 to 1");
    }
    const OperatorFamily scaled = OperatorFamily::linear(target);
    const ImbeddingState start{Complex{0.0, 0.0}, Complex{1.0, 0.0}, DiscreteOperator::identity(n),
                               0.0, 0.0};
    ImbeddingState state = propagate(scaled, path, start, cfg);
    state.lambda = lambda0;
    return state;
}

Vector solve(const ImbeddingState& state, const Vector& phi, double singularity_threshold) {
    if (phi.size() != state.D.dim()) {
        throw std::invalid_argument("solve: phi length does not match the operator dimension");
    }
    if (!(std::abs(state.d) > singularity_threshold)) {
        throw_singular(state.lambda, state.d);
    }
    return (state.D.matrix() * phi) / state.d;
}

Vector dominant_column(const Matrix& D) {
    Index best = 0;
    double best_norm = -1.0;
    for (Index j = 0; j < D.cols(); ++j) {
        const double norm = D.col(j).norm();
        if (norm > best_norm) {
            best_norm = norm;
            best = j;
        }
    }
    Vector v = D.col(best);
    if (best_norm == 0.0) {
        return v;
    }
    v /= best_norm;
    Index pivot = 0;
    for (Index i = 1; i < v.size(); ++i) {
        if (std::abs(v(i)) > std::abs(v(pivot))) {
            pivot = i;
        }
    }
    return v * (std::abs(v(pivot)) / v(pivot));
}

} // namespace imbed
