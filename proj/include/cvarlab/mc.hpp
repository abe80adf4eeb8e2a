#pragma once

#include <optional>

#include "cvarlab/augmented_policy.hpp"
#include "cvarlab/risk.hpp"
#include "cvarlab/ssp.hpp"

namespace cvarlab {

struct McConfig {
    long samples = 10'000;
    uint64_t seed = 0;
    long max_steps = 1'000'000; // horizon guard; overruns count as failures
    std::optional<double> time_budget_seconds; // when set, replaces the sample count
    int threads = 0; // 0: hardware concurrency capped by CVARLAB_THREADS
};

struct McRun {
    DiscreteDistribution empirical; // cost distribution of completed rollouts
    long completed = 0;
    long failures = 0;
};

/// Seeded rollouts of a stationary policy; per-rollout substreams make the
/// result independent of the execution order. Throws TooManyFailures when
/// more than 0.1% of rollouts hit the horizon guard.
McRun simulate_policy(const SspMdp& model, const StationaryPolicy& policy, StateId s0,
                      const McConfig& config);

/// Augmented-policy rollouts: the confidence level starts at the atom nearest
/// to alpha and follows y' = y * xi snapped to the log-nearest atom, exactly
/// as in the forward evaluator.
McRun simulate_policy(const SspMdp& model, const AugmentedPolicy& policy, StateId s0, double alpha,
                      const McConfig& config);

/// Empirical (cvar, var): the (1-alpha) sample quantile and the mean of the
/// worst alpha fraction with fractional weight on the boundary sample. Equals
/// the exact risk measures when fed an exact distribution.
std::pair<double, double> mc_cvar_estimate(const DiscreteDistribution& samples, double alpha);

} // namespace cvarlab
