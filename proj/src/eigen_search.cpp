#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "imbed/imbedding_engine.hpp"

namespace imbed {

namespace {

struct Sample {
    ImbeddingState state;
    // Reached from the previous sample by a semicircle around a (predicted) zero.
    bool via_detour = false;
};

Complex d_prime(const OperatorFamily& family, const ImbeddingState& s) {
    return (family.df(s.lambda).matrix() * s.D.matrix()).trace();
}

bool real_valued(const ImbeddingState& s) {
    return s.lambda.imag() == 0.0 && std::abs(s.d.imag()) <= 1e-2 * std::abs(s.d.real());
}

std::vector<Sample> scan_path(const OperatorFamily& family, const LambdaPath& scan,
                              const IntegratorConfig& cfg, const ScanOptions& options) {
    const double chunk = scan.length() / std::max(1, options.samples);
    std::vector<Sample> samples;
    ImbeddingState state = initialize_at(family, scan.front(), cfg);
    samples.push_back({state, false});

    const auto& w = scan.waypoints();
    for (std::size_t i = 1; i < w.size(); ++i) {
        const Complex a = w[i - 1];
        const Complex b = w[i];
        const double length = std::abs(b - a);
        const Complex unit = (b - a) / length;
        auto point = [&](double s) { return s >= length ? b : a + s * unit; };
        double s = 0.0;

        while (length - s > 1e-12 * length) {
            const double local = state.step_size > 0.0 ? state.step_size : chunk;
            const double radius =
                options.detour_radius > 0.0 ? options.detour_radius : std::min(0.5 * chunk, 10.0 * local);

            // Newton's estimate of the nearest zero decides whether the next
            // chunk runs into it.
            bool detoured = false;
            const Complex slope = d_prime(family, state);
            if (slope != Complex{0.0, 0.0}) {
                const Complex zero = state.lambda - state.d / slope;
                const Complex rel = (zero - a) * std::conj(unit);
                const double s_zero = rel.real();
                if (std::abs(rel.imag()) < radius && s_zero > s && s_zero - s <= chunk + radius &&
                    s_zero < length) {
                    const double r = std::min({radius, 0.5 * (s_zero - s), length - s_zero});
                    if (r > 1e-9 * chunk) {
                        const Complex from = point(s);
                        const Complex to = point(s_zero + r);
                        state = propagate(family, LambdaPath::detour(from, to, point(s_zero), r), state, cfg);
                        samples.push_back({state, true});
                        s = s_zero + r;
                        detoured = true;
                    }
                }
            }
            if (detoured) {
                continue;
            }

            double s_next = std::min(s + chunk, length);
            if (length - s_next < 1e-9 * length) {
                s_next = length;
            }
            const Complex from = point(s);
            const Complex to = point(s_next);
            try {
                state = propagate(family, LambdaPath::segment(from, to), state, cfg);
                samples.push_back({state, false});
            } catch (const SingularityError&) {
                state = propagate(family, LambdaPath::arc(from, to), state, cfg);
                samples.push_back({state, true});
            } catch (const StepSizeError&) {
                state = propagate(family, LambdaPath::arc(from, to), state, cfg);
                samples.push_back({state, true});
            } catch (const ConsistencyError&) {
                state = propagate(family, LambdaPath::arc(from, to), state, cfg);
                samples.push_back({state, true});
            }
            s = s_next;
        }
    }
    return samples;
}

struct Root {
    Complex lambda;
    Complex d;
    Matrix D;
    // Set when the march could not reach the root itself; D then belongs to
    // this nearby state.
    std::optional<ImbeddingState> near = std::nullopt;
};

// D̂ stays analytic through a zero of d, so its value there is its mean over a
// circle around the zero. The circle passes through `near`.
Matrix mean_over_circle(const OperatorFamily& family, Complex center, const ImbeddingState& near,
                        const IntegratorConfig& cfg) {
    const Complex offset = near.lambda - center;
    const double rho = std::abs(offset);
    if (rho <= 1e-12 * (1.0 + std::abs(center))) {
        return near.D.matrix();
    }
    constexpr int pieces = 64;
    const LambdaPath loop = LambdaPath::circle(center, rho, std::arg(offset), pieces);
    const auto& w = loop.waypoints();
    ImbeddingState state = near;
    state.lambda = w.front();
    Matrix sum = Matrix::Zero(near.D.dim(), near.D.dim());
    try {
        for (int i = 0; i < pieces; ++i) {
            sum += state.D.matrix();
            state = propagate(family, LambdaPath::segment(w[i], w[i + 1]), state, cfg);
            state.lambda = w[i + 1];
        }
    } catch (const Error&) {
        return near.D.matrix();
    }
    return sum / static_cast<double>(pieces);
}

// Bracketed Newton on the real axis, bisecting whenever Newton leaves the
// bracket. Each new point is reached along a semicircle from the nearer end
// of the bracket so the march never runs along the axis through the zero.
std::optional<Root> refine_real(const OperatorFamily& family, ImbeddingState lo, ImbeddingState hi,
                                const IntegratorConfig& cfg, double refine_tol, int max_iter) {
    ImbeddingState best = std::abs(lo.d) <= std::abs(hi.d) ? lo : hi;
    const double lo_sign = std::copysign(1.0, lo.d.real());
    for (int iter = 0; iter < max_iter; ++iter) {
        if (std::abs(best.d) < refine_tol) {
            return Root{best.lambda, best.d, best.D.matrix()};
        }
        const double left = std::min(lo.lambda.real(), hi.lambda.real());
        const double right = std::max(lo.lambda.real(), hi.lambda.real());
        double x = 0.5 * (left + right);
        const Complex slope = d_prime(family, best);
        if (slope != Complex{0.0, 0.0}) {
            const double newton = best.lambda.real() - (best.d / slope).real();
            if (newton > left && newton < right) {
                x = newton;
            }
        }
        const ImbeddingState& origin =
            std::abs(lo.lambda.real() - x) <= std::abs(hi.lambda.real() - x) ? lo : hi;
        if (x == origin.lambda.real()) {
            return Root{best.lambda, best.d, best.D.matrix()};
        }
        ImbeddingState next = best;
        try {
            const Complex target{x, 0.0};
            const LambdaPath leg = std::abs(target - origin.lambda) < 1e-9 * (1.0 + std::abs(x))
                                       ? LambdaPath::segment(origin.lambda, target)
                                       : LambdaPath::arc(origin.lambda, target);
            next = propagate(family, leg, origin, cfg);
        } catch (const SingularityError& e) {
            return Root{Complex{x, 0.0}, e.d(), best.D.matrix(), best};
        }
        next.lambda = Complex{x, 0.0};
        if (std::copysign(1.0, next.d.real()) == lo_sign) {
            lo = next;
        } else {
            hi = next;
        }
        if (std::abs(next.d) < std::abs(best.d)) {
            best = next;
        }
        if (std::abs(hi.lambda - lo.lambda) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x))) {
            return Root{best.lambda, best.d, best.D.matrix()};
        }
    }
    return std::abs(best.d) < refine_tol ? std::optional<Root>(Root{best.lambda, best.d, best.D.matrix()})
                                         : std::nullopt;
}

// Complex Newton from a sample near a modulus minimum, confirmed afterwards
// by the argument principle on a small circle.
std::optional<Root> refine_complex(const OperatorFamily& family, const ImbeddingState& start,
                                   const IntegratorConfig& cfg, double refine_tol, double reach,
                                   int max_iter) {
    ImbeddingState current = start;
    std::optional<Root> root;
    for (int iter = 0; iter < max_iter && !root; ++iter) {
        if (std::abs(current.d) < refine_tol) {
            root = Root{current.lambda, current.d, current.D.matrix()};
            break;
        }
        const Complex slope = d_prime(family, current);
        if (slope == Complex{0.0, 0.0}) {
            return std::nullopt;
        }
        const Complex next = current.lambda - current.d / slope;
        if (std::abs(next - start.lambda) > reach) {
            return std::nullopt;
        }
        if (next == current.lambda) {
            root = Root{current.lambda, current.d, current.D.matrix()};
            break;
        }
        try {
            current = propagate(family, LambdaPath::segment(current.lambda, next), current, cfg);
        } catch (const SingularityError& e) {
            root = Root{next, e.d(), current.D.matrix(), current};
        }
    }
    if (!root) {
        return std::nullopt;
    }

    const double rho = 0.25 * reach;
    const Complex offset = start.lambda - root->lambda;
    const double angle = std::abs(offset) > 0.0 ? std::arg(offset) : 0.0;
    const LambdaPath loop = LambdaPath::circle(root->lambda, rho, angle);
    try {
        ImbeddingState on_circle = start;
        if (loop.front() != start.lambda) {
            on_circle = propagate(family, LambdaPath::segment(start.lambda, loop.front()), start, cfg);
        }
        if (winding_number(family, loop, on_circle, cfg) < 1) {
            return std::nullopt;
        }
    } catch (const Error&) {
        return std::nullopt;
    }
    return root;
}

} // namespace

int winding_number(const OperatorFamily& family, const LambdaPath& circle, const ImbeddingState& start,
                   const IntegratorConfig& cfg) {
    const auto states = integrate_path(family, circle, start, cfg);
    double total = 0.0;
    for (std::size_t i = 1; i < states.size(); ++i) {
        total += std::arg(states[i].d / states[i - 1].d);
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

std::vector<Eigenpair> find_eigenvalues(const OperatorFamily& family, const LambdaPath& scan,
                                        const IntegratorConfig& cfg, double refine_tol,
                                        const ScanOptions& options) {
    if (!(refine_tol > 0.0)) {
        throw std::invalid_argument("find_eigenvalues: refine_tol must be positive");
    }
    const auto samples = scan_path(family, scan, cfg, options);
    const double chunk = scan.length() / std::max(1, options.samples);
    const bool real_scan = scan.is_real();

    std::vector<Eigenpair> found;
    auto record = [&](const Root& root) {
        for (const auto& e : found) {
            if (std::abs(e.lambda - root.lambda) <= 1e-6 * (1.0 + std::abs(root.lambda))) {
                return;
            }
        }
        const Matrix D = root.near ? mean_over_circle(family, root.lambda, *root.near, cfg) : root.D;
        found.push_back(Eigenpair{root.lambda, dominant_column(D), root.d});
    };

    std::vector<bool> bracketed(samples.size(), false);
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const auto& prev = samples[i - 1].state;
        const auto& cur = samples[i].state;
        const bool sign_change = std::signbit(prev.d.real()) != std::signbit(cur.d.real());
        if (real_scan && sign_change && real_valued(prev) && real_valued(cur)) {
            bracketed[i - 1] = bracketed[i] = true;
            if (auto root = refine_real(family, prev, cur, cfg, refine_tol, options.max_refine_iterations)) {
                record(*root);
            }
            continue;
        }
        if (samples[i].via_detour) {
            const auto& start = std::abs(prev.d) <= std::abs(cur.d) ? prev : cur;
            if (auto root = refine_complex(family, start, cfg, refine_tol, 4.0 * chunk,
                                           options.max_refine_iterations)) {
                record(*root);
            }
        }
    }
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        if (bracketed[i]) {
            continue;
        }
        const double m = std::abs(samples[i].state.d);
        if (m < std::abs(samples[i - 1].state.d) && m < std::abs(samples[i + 1].state.d)) {
            if (auto root = refine_complex(family, samples[i].state, cfg, refine_tol, 4.0 * chunk,
                                           options.max_refine_iterations)) {
                record(*root);
            }
        }
    }
    if (found.empty()) {
        throw NoBracketError("find_eigenvalues: no zero of d(lambda) detected along the scan");
    }
    return found;
}

} // namespace imbed
