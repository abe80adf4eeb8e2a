#pragma once

#include <stdexcept>
#include <string>

namespace cvarlab {

/// Model or input file failed validation.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A policy cannot reach a goal with probability 1 from some state.
struct ImproperPolicy : std::runtime_error {
    explicit ImproperPolicy(const std::string& what) : std::runtime_error(what) {}
};

/// No action selection can reach a goal with probability 1 from some state.
struct NoProperPolicy : std::runtime_error {
    explicit NoProperPolicy(const std::string& what) : std::runtime_error(what) {}
};

/// The product-space policy chain has a state that cannot reach a goal.
struct ImproperExtendedPolicy : std::runtime_error {
    explicit ImproperExtendedPolicy(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solver exceeded its iteration budget.
struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

/// Piecewise-linear yCVaR slopes increased; upstream numerical corruption.
struct ConcavityViolation : std::runtime_error {
    explicit ConcavityViolation(const std::string& what) : std::runtime_error(what) {}
};

/// A confidence value of exactly zero reached an operation that needs y > 0.
struct DegenerateAlpha : std::runtime_error {
    explicit DegenerateAlpha(const std::string& what) : std::runtime_error(what) {}
};

/// Domain generator spec is invalid.
struct InvalidSpec : std::runtime_error {
    explicit InvalidSpec(const std::string& what) : std::runtime_error(what) {}
};

/// Monte-Carlo rollouts hit the horizon guard too often.
struct TooManyFailures : std::runtime_error {
    explicit TooManyFailures(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cvarlab
