#include "cvarlab/viq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace cvarlab {

namespace {

struct MixturePiece {
    double value;
    double mass;
    uint32_t succ;
    uint32_t step;
};

// Quantile steps of one successor's value row: head (0, a0] at the first
// atom's value (integral anchor), then one slope per atom gap.
void append_steps(const AtomGrid& grid, const std::vector<double>& value_row, double prob,
                  uint32_t succ, std::vector<MixturePiece>& out) {
    const auto& a = grid.atoms;
    const size_t n = a.size();
    out.push_back({value_row[0], prob * a[0], succ, 0});
    for (size_t i = 0; i + 1 < n; ++i) {
        double slope = (a[i + 1] * value_row[i + 1] - a[i] * value_row[i]) / (a[i + 1] - a[i]);
        out.push_back({slope, prob * (a[i + 1] - a[i]), succ, static_cast<uint32_t>(i + 1)});
    }
}

} // namespace

QuantileSolution viq_backup(const SspMdp& model, const QuantileSolution& current) {
    const int n_states = model.state_count();
    const int n_atoms = current.grid.size();
    const double gamma = model.gamma();
    const auto& atoms = current.grid.atoms;

    QuantileSolution next;
    next.grid = current.grid;
    next.value.assign(static_cast<size_t>(n_states), std::vector<double>(static_cast<size_t>(n_atoms), 0.0));
    next.policy.assign(static_cast<size_t>(n_states), std::vector<ActionId>(static_cast<size_t>(n_atoms), -1));
    next.var.assign(static_cast<size_t>(n_states), std::vector<double>(static_cast<size_t>(n_atoms), 0.0));

    std::vector<MixturePiece> pieces;
    std::vector<double> integral(static_cast<size_t>(n_atoms));
    for (StateId s = 0; s < n_states; ++s) {
        if (model.is_goal(s)) continue;
        auto& value_row = next.value[static_cast<size_t>(s)];
        auto& policy_row = next.policy[static_cast<size_t>(s)];
        auto& var_row = next.var[static_cast<size_t>(s)];
        std::fill(value_row.begin(), value_row.end(), std::numeric_limits<double>::infinity());

        for (ActionId a : model.actions_at(s)) {
            pieces.clear();
            for (const auto& t : model.successors(s, a))
                append_steps(current.grid, current.value[static_cast<size_t>(t.next)], t.prob,
                             static_cast<uint32_t>(t.next), pieces);
            std::sort(pieces.begin(), pieces.end(), [](const MixturePiece& x, const MixturePiece& y) {
                if (x.value != y.value) return x.value > y.value;
                if (x.succ != y.succ) return x.succ < y.succ;
                return x.step < y.step;
            });

            // Integral of the mixture quantile from 0 to each atom.
            double cum_mass = 0.0, cum_int = 0.0;
            size_t idx = 0;
            for (int k = 0; k < n_atoms; ++k) {
                const double y = atoms[static_cast<size_t>(k)];
                while (idx < pieces.size() && cum_mass + pieces[idx].mass < y - 1e-12) {
                    cum_mass += pieces[idx].mass;
                    cum_int += pieces[idx].value * pieces[idx].mass;
                    ++idx;
                }
                double v = idx < pieces.size() ? pieces[idx].value : pieces.back().value;
                integral[static_cast<size_t>(k)] = cum_int + v * (y - cum_mass);
            }

            const double c = model.cost(s, a);
            for (int k = 0; k < n_atoms; ++k) {
                double q = c + gamma * integral[static_cast<size_t>(k)] / atoms[static_cast<size_t>(k)];
                if (q < value_row[static_cast<size_t>(k)]) {
                    value_row[static_cast<size_t>(k)] = q;
                    policy_row[static_cast<size_t>(k)] = a;
                }
            }
        }

        // VaR table = quantile of the state's stored yCVaR function: the
        // slope over the atom gap ending at each atom (the per-atom action
        // minimum keeps the table concave, so the slopes are non-increasing)
        var_row[0] = value_row[0];
        for (int k = 1; k < n_atoms; ++k) {
            double y0 = atoms[static_cast<size_t>(k - 1)], y1 = atoms[static_cast<size_t>(k)];
            var_row[static_cast<size_t>(k)] =
                (y1 * value_row[static_cast<size_t>(k)] - y0 * value_row[static_cast<size_t>(k - 1)]) / (y1 - y0);
        }
    }
    return next;
}

QuantileSolution run_viq(const SspMdp& model, const AtomGrid& grid, const SolveOptions& options) {
    QuantileSolution sol;
    sol.grid = grid;
    sol.value.assign(static_cast<size_t>(model.state_count()),
                     std::vector<double>(static_cast<size_t>(grid.size()), 0.0));
    sol.policy.assign(static_cast<size_t>(model.state_count()),
                      std::vector<ActionId>(static_cast<size_t>(grid.size()), -1));
    sol.var.assign(static_cast<size_t>(model.state_count()),
                   std::vector<double>(static_cast<size_t>(grid.size()), 0.0));

    auto t0 = std::chrono::steady_clock::now();
    for (long iter = 1; iter <= options.max_iterations; ++iter) {
        QuantileSolution next = viq_backup(model, sol);
        double residual = 0.0;
        for (StateId s = 0; s < model.state_count(); ++s)
            for (int k = 0; k < grid.size(); ++k)
                residual = std::max(residual, std::fabs(next.value[static_cast<size_t>(s)][static_cast<size_t>(k)] -
                                                        sol.value[static_cast<size_t>(s)][static_cast<size_t>(k)]));
        sol = std::move(next);
        sol.iterations = iter;
        sol.residual = residual;
        bool done = residual <= options.epsilon;
        if (options.log_progress && ((iter & (iter - 1)) == 0 || done))
            std::fprintf(stderr, "viq iter=%ld residual=%.6g elapsed_ms=%.1f\n", iter, residual,
                         std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                             .count());
        if (done) return sol;
    }
    throw NonConvergence("run_viq: residual above epsilon after iteration budget (improper model?)");
}

double xi_from_var(const AtomGrid& grid, std::span<const double> var_s,
                   std::span<const double> var_succ, int atom_index) {
    const auto& a = grid.atoms;
    if (var_s.size() != a.size() || var_succ.size() != a.size())
        throw ValidationError("xi_from_var: var rows must match the grid");
    if (atom_index < 0 || atom_index >= grid.size())
        throw ValidationError("xi_from_var: atom index out of range");

    const double y = a[static_cast<size_t>(atom_index)];
    const double threshold = var_s[static_cast<size_t>(atom_index)];

    // Successor CDF from its VaR steps: step i carries mass (a[i] - a[i-1]).
    double f = 0.0;
    double prev = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (var_succ[i] <= threshold + 1e-12) f += a[i] - prev;
        prev = a[i];
    }
    return f / y;
}

std::vector<double> xi_tail_split(const AtomGrid& grid,
                                  std::span<const std::span<const double>> var_succs,
                                  std::span<const double> probs, int atom_index) {
    const auto& a = grid.atoms;
    if (atom_index < 0 || atom_index >= grid.size())
        throw ValidationError("xi_tail_split: atom index out of range");
    if (var_succs.size() != probs.size() || probs.empty())
        throw ValidationError("xi_tail_split: probs/successors size mismatch");

    const double y = a[static_cast<size_t>(atom_index)];
    const size_t n = probs.size();

    // cutoff = the y-quantile of the successor mixture reconstructed from
    // the VaR step tables
    std::vector<std::pair<double, double>> pieces; // (value, scaled mass)
    pieces.reserve(n * a.size());
    for (size_t j = 0; j < n; ++j) {
        double prev = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            pieces.emplace_back(var_succs[j][i], probs[j] * (a[i] - prev));
            prev = a[i];
        }
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const auto& x, const auto& z) { return x.first > z.first; });
    double cum = 0.0;
    double cutoff = pieces.back().first;
    for (const auto& [value, mass] : pieces) {
        cum += mass;
        if (cum >= y - 1e-12) {
            cutoff = value;
            break;
        }
    }
    const double tol = 1e-9 * std::max(1.0, std::fabs(cutoff));

    std::vector<double> above(n, 0.0), boundary(n, 0.0);
    double total_above = 0.0, total_boundary = 0.0;
    for (size_t j = 0; j < n; ++j) {
        double prev = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            double mass = a[i] - prev;
            double v = var_succs[j][i];
            if (v > cutoff + tol) above[j] += mass;
            else if (v >= cutoff - tol) boundary[j] += mass;
            prev = a[i];
        }
        total_above += probs[j] * above[j];
        total_boundary += probs[j] * boundary[j];
    }

    // boundary mass fills the remaining budget y - total_above
    double share = 0.0;
    if (total_boundary > 1e-15)
        share = std::clamp((y - total_above) / total_boundary, 0.0, 1.0);

    std::vector<double> xi(n);
    for (size_t j = 0; j < n; ++j) xi[j] = (above[j] + share * boundary[j]) / y;
    return xi;
}

} // namespace cvarlab
