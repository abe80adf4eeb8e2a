#pragma once

#include <span>
#include <vector>

#include "cvarlab/errors.hpp"

namespace cvarlab {

/// Finite cost distribution: strictly ascending support, positive
/// probabilities summing to 1.
struct DiscreteDistribution {
    std::vector<double> support;
    std::vector<double> probs;

    /// Sorts, merges support values closer than merge_tol, and normalizes.
    static DiscreteDistribution from_weighted(std::vector<std::pair<double, double>> weighted,
                                              double merge_tol = 1e-9);
};

/// Throws ValidationError if the distribution invariants fail.
void validate_distribution(const DiscreteDistribution& dist);

double mean(const DiscreteDistribution& dist);

/// Smallest support value z with F(z) >= 1 - alpha (right-continuous step CDF).
double var(const DiscreteDistribution& dist, double alpha);

/// VaR_alpha + E[(Z - VaR_alpha)^+] / alpha; the plain expectation at alpha = 1.
double cvar(const DiscreteDistribution& dist, double alpha);

/// y -> y*CVaR_y sampled at ascending atoms in (0,1]. Concave, non-decreasing;
/// its slopes are the quantile (VaR) function.
struct PwlYcvar {
    std::vector<double> atoms;
    std::vector<double> yv;
};

PwlYcvar ycvar_from_dist(const DiscreteDistribution& dist, std::span<const double> atoms);

/// How queries and step functions behave below the smallest atom.
///   ExtendSlope  - continue the first explicit segment's slope leftward
///   AnchorOrigin - chord to the origin (the head integrates to yv at the
///                  first atom; equals adding an interpolation atom at y=0)
///   Clamp        - confidence products never leave [atoms[0], 1]
enum class TailRule { ExtendSlope, AnchorOrigin, Clamp };

/// One step of the quantile function: value VaR on the half-open segment
/// (y_lo, y_hi].
struct QuantileStep {
    double y_lo;
    double y_hi;
    double value;
};

/// Segment slopes of the piecewise-linear yCVaR function, covering (0, 1].
/// The first step covers (0, atoms[0]] with a value chosen by the head rule.
/// Throws ConcavityViolation if slopes increase by more than 1e-9.
std::vector<QuantileStep> quantile_steps(const PwlYcvar& f, TailRule head = TailRule::ExtendSlope);

/// Concave piecewise-linear gain u -> g(u) on [u0, u0 + sum(len)], stored as
/// a base value at u0 and segments with non-increasing slopes. u0 is 0 except
/// under Clamp, where the feasible confidence products start at atoms[0].
struct ConcaveGain {
    double u0 = 0.0;
    double base = 0.0;
    std::vector<double> len;
    std::vector<double> slope;

    double value_at(double u) const;
};

ConcaveGain gain_from_ycvar(const PwlYcvar& f, TailRule rule);

struct EnvelopeResult {
    double value;
    std::vector<double> xi;
};

/// Exact maximum of sum_j p_j * g_j(y*xi_j) / y over the CVaR risk envelope
/// xi_j in [0, 1/y], sum_j p_j*xi_j = 1, by greedy marginal-slope allocation
/// over the merged segment list (exact for separable concave objectives with
/// a single budget constraint). Equal slopes are broken toward the lower
/// successor index, so xi is deterministic.
EnvelopeResult maximize_risk_envelope(double y, std::span<const double> probs,
                                      std::span<const ConcaveGain* const> gains);

/// Convenience overload building gains from yCVaR tables with a shared rule.
EnvelopeResult maximize_risk_envelope(double y, std::span<const double> probs,
                                      std::span<const PwlYcvar> fns,
                                      TailRule rule = TailRule::ExtendSlope);

} // namespace cvarlab
