#pragma once

#include <cstdint>
#include <vector>

#include "cvarlab/augmented_policy.hpp"
#include "cvarlab/ssp.hpp"

namespace cvarlab {

/// Product model over states x atoms with the single policy action per
/// augmented state; goals are (goal, atom) pairs. Used for risk-neutral
/// evaluation of augmented policies and heuristic extraction.
struct ExtendedMdp {
    SspMdp mdp;
    int atom_count;

    StateId index(StateId s, int atom) const { return s * atom_count + atom; }
    StateId base_state(StateId x) const { return x / atom_count; }
    int atom(StateId x) const { return x % atom_count; }
};

/// Builds the extended MDP: each (s, atom) takes the policy action; each
/// successor lands on (s', atom') where atom' is the log-nearest atom to
/// y * xi(s, y, s'), with xi = 0 branches snapped to the smallest atom so no
/// probability mass is dropped.
ExtendedMdp create_extended_mdp(const SspMdp& model, const AugmentedPolicy& policy);

struct ExtendedEvaluation {
    ValueFunction mean; // risk-neutral value per extended state
    ValueFunction min;  // best-outcome determinization; admissible heuristic
};

/// Risk-neutral and determinized-minimum evaluation of the unique policy of
/// the extended MDP. Throws ImproperExtendedPolicy when any augmented state
/// cannot reach a goal.
ExtendedEvaluation mdp_policy_evaluation(const SspMdp& model, const AugmentedPolicy& policy,
                                         double epsilon = 1e-12);

enum class HeuristicMode { None, MinCost, Custom };

struct EvalOptions {
    HeuristicMode heuristic = HeuristicMode::MinCost;
    /// Admissible values indexed by state (stationary policies) or by
    /// extended-state index (augmented policies). Used with HeuristicMode::Custom.
    const std::vector<double>* custom_heuristic = nullptr;
    /// Residual for the internal risk-neutral policy evaluation.
    double mean_epsilon = 1e-12;
    /// Frontier nodes merge when they share the policy-augmented state and
    /// the accumulated cost rounded to this resolution.
    double group_cost_resolution = 1e-9;
    /// Pops without a goal pop before the run is declared improper.
    std::uint64_t max_pops_without_goal = 50'000'000;
};

struct TracePoint {
    double cost;  // X, the accumulated cost of this goal pop
    double y;     // 1 - P^{X,pi} after the pop
    double value; // V(s0, y) from the total-probability decomposition
};

struct EvalResult {
    double cvar = 0.0;
    double var = 0.0;
    std::vector<TracePoint> trace;
    double mean = 0.0; // risk-neutral value at the start used in the decomposition
    std::uint64_t popped = 0;
    std::uint64_t expanded = 0;
};

/// Exact CVaR/VaR of a stationary policy at (s0, alpha) by best-first forward
/// trajectory expansion. Nodes group on (state, rounded cost); goal pops
/// accumulate probability until the alpha tail is isolated, then the atom
/// interpolation of the last two trace quantities gives the value.
EvalResult run_forpecvar(const SspMdp& model, const StationaryPolicy& policy, StateId s0, double alpha,
                         const EvalOptions& options = {});

/// Augmented-policy variant: nodes carry the confidence atom, driven by
/// y' = y * xi snapped to the log-nearest atom; grouping adds the atom to the
/// key. alpha is snapped to the grid for the initial augmented state.
EvalResult run_forpecvar(const SspMdp& model, const AugmentedPolicy& policy, StateId s0, double alpha,
                         const EvalOptions& options = {});

} // namespace cvarlab
