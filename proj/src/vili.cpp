#include "cvarlab/vili.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace cvarlab {

double interpolate_ycvar(const AtomGrid& grid, std::span<const double> values, double y, TailRule rule) {
    if (!(y > 0.0 && y <= 1.0)) throw ValidationError("interpolate_ycvar: y must lie in (0,1]");
    const auto& a = grid.atoms;
    const size_t n = a.size();
    if (values.size() != n) throw ValidationError("interpolate_ycvar: values/grid size mismatch");

    PwlYcvar f;
    f.atoms = a;
    f.yv.resize(n);
    for (size_t i = 0; i < n; ++i) f.yv[i] = a[i] * values[i];

    if (y <= a.front()) {
        ConcaveGain g = gain_from_ycvar(f, rule);
        if (rule == TailRule::Clamp) return f.yv.front();
        return g.value_at(y);
    }
    size_t hi = 1;
    while (hi + 1 < n && a[hi] < y) ++hi;
    // y in (a[hi-1], a[hi]]
    double t = (y - a[hi - 1]) / (a[hi] - a[hi - 1]);
    return f.yv[hi - 1] + t * (f.yv[hi] - f.yv[hi - 1]);
}

namespace {

// yCVaR gain profiles for every state from the current value table.
std::vector<ConcaveGain> build_profiles(const AtomGrid& grid,
                                        const std::vector<std::vector<double>>& value, TailRule tail) {
    std::vector<ConcaveGain> out;
    out.reserve(value.size());
    PwlYcvar f;
    f.atoms = grid.atoms;
    f.yv.resize(grid.atoms.size());
    for (const auto& row : value) {
        for (size_t i = 0; i < row.size(); ++i) f.yv[i] = grid.atoms[i] * row[i];
        out.push_back(gain_from_ycvar(f, tail));
    }
    return out;
}

} // namespace

AugmentedSolution vili_backup(const SspMdp& model, const AugmentedSolution& current, TailRule tail) {
    const int n_states = model.state_count();
    const int n_atoms = current.grid.size();
    const double gamma = model.gamma();

    AugmentedSolution next;
    next.grid = current.grid;
    next.value.assign(static_cast<size_t>(n_states), std::vector<double>(static_cast<size_t>(n_atoms), 0.0));
    next.policy.assign(static_cast<size_t>(n_states), std::vector<ActionId>(static_cast<size_t>(n_atoms), -1));
    next.xi.assign(static_cast<size_t>(n_states), std::vector<std::vector<double>>(static_cast<size_t>(n_atoms)));

    auto profiles = build_profiles(current.grid, current.value, tail);

    std::vector<double> probs;
    std::vector<const ConcaveGain*> gains;
    for (StateId s = 0; s < n_states; ++s) {
        if (model.is_goal(s)) continue;
        for (int k = 0; k < n_atoms; ++k) {
            const double y = current.grid.atoms[static_cast<size_t>(k)];
            double best = std::numeric_limits<double>::infinity();
            ActionId best_a = -1;
            std::vector<double> best_xi;
            for (ActionId a : model.actions_at(s)) {
                auto succ = model.successors(s, a);
                probs.clear();
                gains.clear();
                for (const auto& t : succ) {
                    probs.push_back(t.prob);
                    gains.push_back(&profiles[static_cast<size_t>(t.next)]);
                }
                auto env = maximize_risk_envelope(y, probs, std::span<const ConcaveGain* const>(gains.data(), gains.size()));
                double q = model.cost(s, a) + gamma * env.value;
                if (q < best) {
                    best = q;
                    best_a = a;
                    best_xi = std::move(env.xi);
                }
            }
            next.value[static_cast<size_t>(s)][static_cast<size_t>(k)] = best;
            next.policy[static_cast<size_t>(s)][static_cast<size_t>(k)] = best_a;
            next.xi[static_cast<size_t>(s)][static_cast<size_t>(k)] = std::move(best_xi);
        }
    }
    return next;
}

AugmentedSolution run_vili(const SspMdp& model, const AtomGrid& grid, const SolveOptions& options) {
    AugmentedSolution sol;
    sol.grid = grid;
    sol.value.assign(static_cast<size_t>(model.state_count()),
                     std::vector<double>(static_cast<size_t>(grid.size()), 0.0));
    sol.policy.assign(static_cast<size_t>(model.state_count()),
                      std::vector<ActionId>(static_cast<size_t>(grid.size()), -1));
    sol.xi.assign(static_cast<size_t>(model.state_count()),
                  std::vector<std::vector<double>>(static_cast<size_t>(grid.size())));

    auto t0 = std::chrono::steady_clock::now();
    for (long iter = 1; iter <= options.max_iterations; ++iter) {
        AugmentedSolution next = vili_backup(model, sol, options.tail);
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
            std::fprintf(stderr, "vili iter=%ld residual=%.6g elapsed_ms=%.1f\n", iter, residual,
                         std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                             .count());
        if (done) return sol;
    }
    throw NonConvergence("run_vili: residual above epsilon after iteration budget (improper model?)");
}

} // namespace cvarlab
