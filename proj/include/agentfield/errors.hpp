#pragma once

#include <stdexcept>
#include <string>

namespace agentfield {

// Invalid or out-of-range parameter values (bad usage).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (t <= 0, K <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Mismatched grids or sequence lengths.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A closed form hit a vanishing denominator; the message names the factor.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative solver did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : std::runtime_error(what), residual_(last_residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// The non-trivial phase does not exist for the given parameters.
class InfeasiblePhaseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace agentfield
