#pragma once

// Explicit Runge-Kutta marching of a complex state vector along a straight
// segment of the λ-plane. Component 0 of the state is always the determinant
// d(λ); a chord of d passing within the singularity threshold of the origin
// is reported as a SingularityError.

#include <functional>

#include "imbed/imbedding_engine.hpp"

namespace imbed::detail {

using StateVector = Eigen::VectorXcd;

/// dy/dλ at (λ, y).
using Rhs = std::function<StateVector(Complex, const StateVector&)>;

/// Called after every accepted step with the new λ, the state, and |Δλ|.
/// Returning true means the observer replaced the state in place.
using StepObserver = std::function<bool(Complex, StateVector&, double)>;

/// Marches y from `from` to `to`. `step_hint` carries the last accepted |Δλ|
/// between segments (0 for none) and is updated on return.
void march_segment(const Rhs& rhs, StateVector& y, Complex from, Complex to,
                   const IntegratorConfig& cfg, const StepObserver& observer, double& step_hint);

} // namespace imbed::detail
