#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace imbed {

using Complex = std::complex<double>;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// |d(λ)| fell to or below the singularity threshold: λ is at (or very near)
/// a zero of the determinant and the 1/d factor of the D̂ equation is unusable.
class SingularityError : public Error {
public:
    SingularityError(Complex lambda, Complex d, const std::string& what)
        : Error(what), lambda_(lambda), d_(d) {}

    Complex lambda() const noexcept { return lambda_; }
    Complex d() const noexcept { return d_; }

private:
    Complex lambda_;
    Complex d_;
};

/// Adaptive stepping could not meet its tolerance above the minimum step.
class StepSizeError : public Error {
public:
    StepSizeError(Complex lambda, double step, const std::string& what)
        : Error(what), lambda_(lambda), step_(step) {}

    Complex lambda() const noexcept { return lambda_; }
    double step() const noexcept { return step_; }

private:
    Complex lambda_;
    double step_;
};

/// A sampled state violated D̂ + f̂D̂ = d·I beyond the configured tolerance.
class ConsistencyError : public Error {
public:
    ConsistencyError(Complex lambda, double residual, const std::string& what)
        : Error(what), lambda_(lambda), residual_(residual) {}

    Complex lambda() const noexcept { return lambda_; }
    double residual() const noexcept { return residual_; }

private:
    Complex lambda_;
    double residual_;
};

class NoBracketError : public Error {
public:
    using Error::Error;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(double lambda, int iterations, double residual, const std::string& what)
        : Error(what), lambda_(lambda), iterations_(iterations), residual_(residual) {}

    double lambda() const noexcept { return lambda_; }
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    double lambda_;
    int iterations_;
    double residual_;
};

class DomainMismatchError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace imbed
