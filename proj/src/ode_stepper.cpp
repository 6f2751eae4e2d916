#include "ode_stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace imbed::detail {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// Fifth minus fourth order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// d is linear over a step to first order; if its chord passes (relatively)
// through the origin, the march has stepped across a zero of d.
void check_chord(Complex d0, Complex d1, Complex lambda0, Complex lambda1, double threshold) {
    const Complex chord = d1 - d0;
    const double len2 = std::norm(chord);
    double t = 0.0;
    if (len2 > 0.0) {
        t = std::clamp(-std::real(std::conj(d0) * chord) / len2, 0.0, 1.0);
    }
    const Complex closest = d0 + t * chord;
    const double tolerance =
        std::max(threshold, 1e-7 * std::max(std::abs(d0), std::abs(d1)));
    if (std::abs(closest) <= tolerance) {
        const Complex at = lambda0 + t * (lambda1 - lambda0);
        std::ostringstream msg;
        msg << "determinant crosses zero near lambda = " << at;
        throw SingularityError(at, closest, msg.str());
    }
}

} // namespace

void march_segment(const Rhs& rhs, StateVector& y, Complex from, Complex to,
                   const IntegratorConfig& cfg, const StepObserver& observer, double& step_hint) {
    const Complex span = to - from;
    const double length = std::abs(span);
    if (length == 0.0) {
        return;
    }
    auto at = [&](double t) { return t >= 1.0 ? to : from + t * span; };
    auto slope = [&](double t, const StateVector& state) -> StateVector {
        return span * rhs(at(t), state);
    };

    if (const auto* rk4 = std::get_if<Rk4Fixed>(&cfg.method)) {
        const int n = rk4->steps_per_segment;
        const double dt = 1.0 / n;
        for (int i = 0; i < n; ++i) {
            const double t = i * dt;
            const double t_next = (i + 1 == n) ? 1.0 : (i + 1) * dt;
            const StateVector k1 = slope(t, y);
            const StateVector k2 = slope(t + 0.5 * dt, y + (0.5 * dt) * k1);
            const StateVector k3 = slope(t + 0.5 * dt, y + (0.5 * dt) * k2);
            const StateVector k4 = slope(t_next, y + dt * k3);
            StateVector next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            check_chord(y(0), next(0), at(t), at(t_next), cfg.singularity_threshold);
            y = std::move(next);
            step_hint = dt * length;
            if (observer) {
                observer(at(t_next), y, step_hint);
            }
        }
        return;
    }

    const auto& rk45 = std::get<Rk45Adaptive>(cfg.method);
    const double min_dt = rk45.min_step / length;
    double dt = step_hint > 0.0 ? std::min(1.0, step_hint / length) : 0.02;
    double t = 0.0;
    StateVector k1 = slope(0.0, y);
    StateVector k2, k3, k4, k5, k6, k7, trial;
    const auto n = y.size();

    while (t < 1.0) {
        double h = dt;
        bool last = false;
        if (t + h >= 1.0 - 1e-13) {
            h = 1.0 - t;
            last = true;
        }
        k2 = slope(t + c2 * h, y + h * (a21 * k1));
        k3 = slope(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        k4 = slope(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        k5 = slope(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        k6 = slope(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        trial = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        k7 = slope(last ? 1.0 : t + h, trial);

        const StateVector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double scale =
                rk45.atol + rk45.rtol * std::max(std::abs(y(i)), std::abs(trial(i)));
            const double r = std::abs(err(i)) / scale;
            sum += r * r;
        }
        const double err_norm = std::sqrt(sum / static_cast<double>(n));
        if (!std::isfinite(err_norm)) {
            dt = 0.2 * h;
            if (dt < min_dt) {
                throw StepSizeError(at(t), dt * length, "non-finite error estimate");
            }
            continue;
        }

        if (err_norm <= 1.0) {
            const double t_new = last ? 1.0 : t + h;
            check_chord(y(0), trial(0), at(t), at(t_new), cfg.singularity_threshold);
            t = t_new;
            y.swap(trial);
            k1.swap(k7);
            step_hint = h * length;
            if (observer && observer(at(t), y, h * length) && t < 1.0) {
                k1 = slope(t, y);
            }
            const double factor =
                err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
            // A truncated final step says nothing about the natural step size.
            if (!last || h >= dt) {
                dt = h * factor;
            }
        } else {
            dt = h * std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
            if (dt < min_dt) {
                std::ostringstream msg;
                msg << "adaptive step fell below min_step at lambda = " << at(t);
                throw StepSizeError(at(t), dt * length, msg.str());
            }
        }
    }
}

} // namespace imbed::detail
