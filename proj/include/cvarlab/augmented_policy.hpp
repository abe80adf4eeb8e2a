#pragma once

#include "cvarlab/atoms.hpp"
#include "cvarlab/ssp.hpp"
#include "cvarlab/vili.hpp"
#include "cvarlab/viq.hpp"

namespace cvarlab {

/// Uniform view of an augmented-state policy: the action at (state, atom)
/// and the risk redistribution factor toward each successor of that action.
/// Both solver outputs adapt to this interface; ForPECVaR, the extended-MDP
/// builder, and the Monte-Carlo simulator consume it.
class AugmentedPolicy {
public:
    virtual ~AugmentedPolicy() = default;
    virtual const AtomGrid& grid() const = 0;
    virtual ActionId action(StateId s, int atom) const = 0;
    /// xi for the successor at position succ_pos (state succ) of the chosen
    /// action's transition list.
    virtual double xi(StateId s, int atom, int succ_pos, StateId succ) const = 0;
};

/// Adapter over an interpolation-solver solution; xi comes straight from the
/// stored envelope maximizer.
class ViliPolicy final : public AugmentedPolicy {
public:
    explicit ViliPolicy(const AugmentedSolution& solution) : sol_(&solution) {}
    ViliPolicy(const SspMdp&, const AugmentedSolution& solution) : sol_(&solution) {}
    const AtomGrid& grid() const override { return sol_->grid; }
    ActionId action(StateId s, int atom) const override {
        return sol_->policy[static_cast<size_t>(s)][static_cast<size_t>(atom)];
    }
    double xi(StateId s, int atom, int succ_pos, StateId) const override {
        const auto& row = sol_->xi[static_cast<size_t>(s)][static_cast<size_t>(atom)];
        return row[static_cast<size_t>(succ_pos)];
    }

private:
    const AugmentedSolution* sol_;
};

/// Adapter over a quantile-solver solution; xi is reconstructed from the VaR
/// tables as each successor's portion of the current tail (mass above the
/// cutoff plus a proportional boundary share). At the atom y = 1 the risk
/// envelope pins xi to 1 for every successor (cap and budget coincide), which
/// keeps the confidence process at 1 and makes the expectation anchor exact.
class ViqPolicy final : public AugmentedPolicy {
public:
    ViqPolicy(const SspMdp& model, const QuantileSolution& solution)
        : model_(&model), sol_(&solution) {}
    const AtomGrid& grid() const override { return sol_->grid; }
    ActionId action(StateId s, int atom) const override {
        return sol_->policy[static_cast<size_t>(s)][static_cast<size_t>(atom)];
    }
    double xi(StateId s, int atom, int succ_pos, StateId) const override {
        if (sol_->grid.atoms[static_cast<size_t>(atom)] == 1.0) return 1.0;
        auto succ = model_->successors(s, action(s, atom));
        std::vector<std::span<const double>> rows;
        std::vector<double> probs;
        rows.reserve(succ.size());
        probs.reserve(succ.size());
        for (const auto& t : succ) {
            rows.emplace_back(sol_->var[static_cast<size_t>(t.next)]);
            probs.push_back(t.prob);
        }
        auto xi_row = xi_tail_split(sol_->grid, rows, probs, atom);
        return xi_row[static_cast<size_t>(succ_pos)];
    }

private:
    const SspMdp* model_;
    const QuantileSolution* sol_;
};

} // namespace cvarlab
