#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvarlab/errors.hpp"

namespace cvarlab {

using StateId = int32_t;
using ActionId = int32_t;

struct Transition {
    StateId next;
    double prob;
};

/// Finite stochastic shortest path model: nonnegative costs, absorbing
/// zero-cost goal states, optional discount in (0,1].
///
/// States and actions are dense integer ids; external names live in the
/// JSON model file only. Storage is sparse: per state, a list of defined
/// actions with their cost and successor distribution. Instances are
/// immutable after construction and safe to share across threads.
class SspMdp {
public:
    SspMdp(int num_states, int num_actions, double gamma = 1.0)
        : num_states_(num_states), num_actions_(num_actions), gamma_(gamma),
          rows_(static_cast<size_t>(num_states)), goal_(static_cast<size_t>(num_states), false) {}

    int state_count() const { return num_states_; }
    int action_count() const { return num_actions_; }
    double gamma() const { return gamma_; }

    void set_goal(StateId s) { goal_[static_cast<size_t>(s)] = true; }
    bool is_goal(StateId s) const { return goal_[static_cast<size_t>(s)]; }
    std::vector<StateId> goals() const {
        std::vector<StateId> g;
        for (StateId s = 0; s < num_states_; ++s)
            if (goal_[static_cast<size_t>(s)]) g.push_back(s);
        return g;
    }

    /// Defines (s,a) with its cost and successor distribution. Replaces any
    /// previous definition of the same pair.
    void set_action(StateId s, ActionId a, double cost, std::vector<Transition> next);

    bool has_action(StateId s, ActionId a) const { return entry(s, a) != nullptr; }
    double cost(StateId s, ActionId a) const;
    std::span<const Transition> successors(StateId s, ActionId a) const;

    /// Defined action ids at s, ascending.
    std::vector<ActionId> actions_at(StateId s) const;

    /// Renormalizes successor distributions whose mass is within tol of 1.
    /// Masses beyond tol are left untouched for validate() to report.
    void renormalize(double tol = 1e-9);

    /// Optional display names carried by the model file; ids stay dense ints.
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;

private:
    struct ActionEntry {
        ActionId action;
        double cost;
        std::vector<Transition> next;
    };

    const ActionEntry* entry(StateId s, ActionId a) const;

    int num_states_;
    int num_actions_;
    double gamma_;
    std::vector<std::vector<ActionEntry>> rows_;
    std::vector<bool> goal_;
};

struct StationaryPolicy {
    std::vector<ActionId> action; // indexed by state; value at goals is ignored
};

struct ValueFunction {
    std::vector<double> value; // indexed by state, cost units
};

struct Violation {
    StateId state;
    ActionId action; // -1 when the violation is not tied to an action
    std::string message;
};

/// Checks every model invariant and reports all violations; never throws.
std::vector<Violation> validate_ssp(const SspMdp& model);

/// True iff every state reaches some goal with probability 1 under the
/// policy (backward reachability on the policy chain; a finite chain is
/// absorbed into goals almost surely iff no reachable state is cut off).
bool is_proper(const SspMdp& model, const StationaryPolicy& policy);

/// Fixed-point evaluation of a proper policy to sup-norm residual epsilon.
/// Throws ImproperPolicy if the reachability pre-check fails.
ValueFunction policy_evaluation_neutral(const SspMdp& model, const StationaryPolicy& policy,
                                        double epsilon, long max_iterations = 1'000'000);

/// Value iteration for the risk-neutral optimum; returns the value function
/// and a greedy policy (lowest action id on ties). Throws NoProperPolicy if
/// some state cannot almost-surely reach a goal under any action selection.
std::pair<ValueFunction, StationaryPolicy> value_iteration_neutral(const SspMdp& model, double epsilon,
                                                                   long max_iterations = 1'000'000);

/// Best-outcome determinization of the policy chain: V_min(s) <= cost of
/// every trajectory from s under the policy. Admissible heuristic.
ValueFunction determinized_min_cost(const SspMdp& model, const StationaryPolicy& policy,
                                    double epsilon = 1e-12, long max_iterations = 1'000'000);

/// States that can almost-surely reach a goal under the best action
/// selection (the classic Prob1E set). Used by value_iteration_neutral.
std::vector<bool> almost_sure_goal_states(const SspMdp& model);

} // namespace cvarlab
