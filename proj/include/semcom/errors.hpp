#pragma once

#include <stdexcept>
#include <string>

namespace semcom {

// Thrown when an input violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when a constrained search has no feasible solution. Carries the
// amount by which the cheapest candidate overshoots the constraint.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, double deficit)
        : std::runtime_error(what), deficit_(deficit) {}
    double deficit() const { return deficit_; }

private:
    double deficit_ = 0.0;
};

// Raised when iterative training produces a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when no translation chain connects two representations.
class NoPathError : public std::runtime_error {
public:
    NoPathError(const std::string& from, const std::string& to)
        : std::runtime_error("no translation path from '" + from + "' to '" + to + "'") {}
};

} // namespace semcom
