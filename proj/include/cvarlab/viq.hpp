#pragma once

#include <span>
#include <vector>

#include "cvarlab/atoms.hpp"
#include "cvarlab/risk.hpp"
#include "cvarlab/ssp.hpp"
#include "cvarlab/vili.hpp" // SolveOptions

namespace cvarlab {

/// Converged output of the quantile-representation solver. var holds the
/// quantile of each state's grid-projected cost distribution at every atom
/// (the slope of the stored yCVaR table over the atom gap ending there), so
/// integrating and differencing the table reproduces it exactly. xi is not
/// stored; it is reconstructed on demand from the var tables.
struct QuantileSolution {
    AtomGrid grid;
    std::vector<std::vector<double>> value;    // [state][atom]
    std::vector<std::vector<ActionId>> policy; // [state][atom]
    std::vector<std::vector<double>> var;      // [state][atom]
    long iterations = 0;
    double residual = 0.0;
};

/// One distributional backup: per (s,a), each successor's quantile step
/// function is read off its yCVaR slopes, the steps are mixed by transition
/// probability, sorted, and re-integrated at every atom; then the action
/// minimum is taken per atom.
QuantileSolution viq_backup(const SspMdp& model, const QuantileSolution& current);

/// Iterates viq_backup from V = 0 to sup-norm residual epsilon on the value
/// table. Options.tail is ignored: the quantile route fixes the sub-alpha0
/// mass by anchoring the integral at the first atom.
QuantileSolution run_viq(const SspMdp& model, const AtomGrid& grid, const SolveOptions& options = {});

/// Risk redistribution factor reconstructed from stored VaR tables:
/// F_{Z(succ)}(VaR_y(Z(s))) / y at atom atom_index, where the quantile of s
/// is read from var_s and the successor's CDF is rebuilt from var_succ with
/// the plateau convention F(v) = total mass of steps with value <= v.
double xi_from_var(const AtomGrid& grid, std::span<const double> var_s,
                   std::span<const double> var_succ, int atom_index);

/// xi for every successor of one augmented state, reconstructed from the VaR
/// tables as the portion of each successor's distribution inside the current
/// tail: the cutoff is the successor mixture's own y-quantile, each successor
/// contributes its mass strictly above the cutoff plus a proportional share
/// of the mass sitting exactly on it, scaled by 1/y. This is the closed form
/// of the risk-envelope maximizer on the grid-projected distributions, so it
/// satisfies the envelope box and budget exactly.
std::vector<double> xi_tail_split(const AtomGrid& grid,
                                  std::span<const std::span<const double>> var_succs,
                                  std::span<const double> probs, int atom_index);

} // namespace cvarlab
