#pragma once

#include <span>
#include <vector>

#include "cvarlab/atoms.hpp"
#include "cvarlab/risk.hpp"
#include "cvarlab/ssp.hpp"

namespace cvarlab {

struct SolveOptions {
    double epsilon = 1e-3;
    long max_iterations = 1'000'000;
    /// Sub-alpha0 rule used when backups query confidence products below the
    /// smallest atom. AnchorOrigin reproduces the classic formulation with an
    /// interpolation atom at y = 0 and keeps the two solvers in agreement.
    TailRule tail = TailRule::AnchorOrigin;
    /// Residual/timing lines on stderr at power-of-two iterations.
    bool log_progress = false;
};

/// Converged output of the interpolation solver: CVaR values and greedy
/// actions per (state, atom), plus the envelope maximizer xi of the chosen
/// action, aligned with the successor list of (s, policy[s][k]).
struct AugmentedSolution {
    AtomGrid grid;
    std::vector<std::vector<double>> value;            // [state][atom]
    std::vector<std::vector<ActionId>> policy;         // [state][atom]
    std::vector<std::vector<std::vector<double>>> xi;  // [state][atom][succ position]
    long iterations = 0;
    double residual = 0.0;
};

/// Linear interpolation of y*V(s,y) through the atoms; at an atom this is
/// atom*value, below the first atom the head follows the tail rule.
double interpolate_ycvar(const AtomGrid& grid, std::span<const double> values, double y,
                         TailRule rule = TailRule::ExtendSlope);

/// One application of the interpolated CVaR Bellman operator: per (s, atom),
/// minimize over actions the cost plus the exact risk-envelope maximum of the
/// interpolated successor values. Goal rows stay at zero.
AugmentedSolution vili_backup(const SspMdp& model, const AugmentedSolution& current,
                              TailRule tail = TailRule::AnchorOrigin);

/// Iterates vili_backup from V = 0 until the sup-norm change of V over all
/// (state, atom) pairs is at most epsilon. Throws NonConvergence past the
/// iteration budget.
AugmentedSolution run_vili(const SspMdp& model, const AtomGrid& grid, const SolveOptions& options = {});

} // namespace cvarlab
