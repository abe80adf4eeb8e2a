#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>

namespace oracle {

namespace {

struct Frontier {
    StateId state;
    int atom; // -1 in stationary mode
    double cost;
    double prob;
    double gamma_pow;
    int stage;
};

int64_t key_of(double cost) { return static_cast<int64_t>(std::llround(cost * 1e9)); }

DiscreteDistribution enumerate_impl(const SspMdp& model, const StationaryPolicy* stationary,
                                    const AugmentedPolicy* augmented, StateId s0, int start_atom,
                                    double residual) {
    // under discounting the stage is part of a node's identity
    const bool track_stage = model.gamma() < 1.0;
    using Key = std::tuple<StateId, int, int64_t, int>;
    std::map<Key, Frontier> open;
    std::map<int64_t, std::pair<double, double>> absorbed; // cost key -> (cost, mass)

    open.emplace(Key{s0, start_atom, 0, track_stage ? 0 : -1}, Frontier{s0, start_atom, 0.0, 1.0, 1.0, 0});
    double absorbed_mass = 0.0;

    while (absorbed_mass < 1.0 - residual) {
        if (open.empty()) throw ImproperPolicy("oracle: frontier exhausted");
        // lowest accumulated cost first; goals win ties so vanishing-cost
        // cycles cannot starve them
        auto best = open.begin();
        for (auto it = open.begin(); it != open.end(); ++it) {
            if (it->second.cost < best->second.cost ||
                (it->second.cost == best->second.cost && model.is_goal(it->second.state) &&
                 !model.is_goal(best->second.state)))
                best = it;
        }
        Frontier node = best->second;
        open.erase(best);

        if (model.is_goal(node.state)) {
            auto& slot = absorbed[key_of(node.cost)];
            slot.first = node.cost;
            slot.second += node.prob;
            absorbed_mass += node.prob;
            continue;
        }
        ActionId a = augmented ? augmented->action(node.state, node.atom)
                               : stationary->action[static_cast<size_t>(node.state)];
        double new_cost = node.cost + node.gamma_pow * model.cost(node.state, a);
        double new_gamma_pow = node.gamma_pow * model.gamma();
        auto succ = model.successors(node.state, a);
        for (size_t pos = 0; pos < succ.size(); ++pos) {
            if (node.prob * succ[pos].prob < 1e-300) continue; // sub-representable mass
            int atom2 = -1;
            if (augmented) {
                const auto& grid = augmented->grid();
                double y = grid.atoms[static_cast<size_t>(node.atom)];
                double xi = augmented->xi(node.state, node.atom, static_cast<int>(pos), succ[pos].next);
                double an = y * xi;
                atom2 = an > 0.0 ? nearest_atom_log(grid, an) : 0;
            }
            Key key{succ[pos].next, atom2, key_of(new_cost), track_stage ? node.stage + 1 : -1};
            auto it = open.find(key);
            if (it != open.end()) {
                it->second.prob += node.prob * succ[pos].prob;
            } else {
                open.emplace(key, Frontier{succ[pos].next, atom2, new_cost, node.prob * succ[pos].prob,
                                           new_gamma_pow, node.stage + 1});
            }
        }
    }

    std::vector<std::pair<double, double>> weighted;
    weighted.reserve(absorbed.size());
    for (const auto& [k, slot] : absorbed) weighted.emplace_back(slot.first, slot.second);
    return DiscreteDistribution::from_weighted(std::move(weighted));
}

} // namespace

DiscreteDistribution enumerate_cost_distribution(const SspMdp& model, const StationaryPolicy& policy,
                                                 StateId s0, double residual) {
    return enumerate_impl(model, &policy, nullptr, s0, -1, residual);
}

DiscreteDistribution enumerate_cost_distribution(const SspMdp& model, const AugmentedPolicy& policy,
                                                 StateId s0, double alpha, double residual) {
    const auto& grid = policy.grid();
    auto exact = grid.index_of(alpha);
    int atom = exact ? *exact : nearest_atom_log(grid, alpha);
    return enumerate_impl(model, nullptr, &policy, s0, atom, residual);
}

double tail_cvar(const DiscreteDistribution& dist, double alpha) {
    double remaining = alpha;
    double acc = 0.0;
    for (size_t i = dist.support.size(); i-- > 0 && remaining > 1e-15;) {
        double take = std::min(dist.probs[i], remaining);
        acc += take * dist.support[i];
        remaining -= take;
    }
    return acc / alpha;
}

double tail_var(const DiscreteDistribution& dist, double alpha) {
    double above = 1.0;
    for (size_t i = 0; i < dist.support.size(); ++i) {
        above -= dist.probs[i];
        if (above <= alpha + 1e-12) return dist.support[i];
    }
    return dist.support.back();
}

namespace {

// y*V interpolation value at u for one successor, written out directly.
double eval_yv(const PwlYcvar& f, TailRule rule, double u) {
    const auto& a = f.atoms;
    const auto& v = f.yv;
    if (u <= a.front()) {
        if (rule == TailRule::Clamp) return v.front();
        if (rule == TailRule::AnchorOrigin || a.size() == 1) return v.front() * (u / a.front());
        double s1 = (v[1] - v[0]) / (a[1] - a[0]);
        return v.front() - s1 * (a.front() - u);
    }
    for (size_t i = 0; i + 1 < a.size(); ++i) {
        if (u <= a[i + 1] + 1e-15) {
            double t = (u - a[i]) / (a[i + 1] - a[i]);
            return v[i] + t * (v[i + 1] - v[i]);
        }
    }
    return v.back();
}

} // namespace

double envelope_candidate_max(double y, const std::vector<double>& probs,
                              const std::vector<PwlYcvar>& fns, TailRule rule) {
    const size_t n = probs.size();

    std::vector<std::vector<double>> breakpoints(n);
    for (size_t j = 0; j < n; ++j) {
        auto& b = breakpoints[j];
        double floor_j = rule == TailRule::Clamp ? fns[j].atoms.front() : 0.0;
        b.push_back(floor_j);
        for (double atom : fns[j].atoms)
            if (atom > floor_j) b.push_back(atom);
        if (b.back() != 1.0) b.push_back(1.0);
    }

    double best = -std::numeric_limits<double>::infinity();
    std::vector<size_t> pick(n, 0);
    std::vector<double> u(n, 0.0);
    // every choice of (free coordinate, breakpoints for the rest)
    for (size_t free = 0; free < n; ++free) {
        std::fill(pick.begin(), pick.end(), 0);
        while (true) {
            double used = 0.0;
            for (size_t j = 0; j < n; ++j)
                if (j != free) used += probs[j] * breakpoints[j][pick[j]];
            double uf = (y - used) / probs[free];
            double floor_f = rule == TailRule::Clamp ? fns[free].atoms.front() : 0.0;
            if (uf >= floor_f - 1e-12 && uf <= 1.0 + 1e-12) {
                uf = std::clamp(uf, floor_f, 1.0);
                double value = 0.0;
                for (size_t j = 0; j < n; ++j) {
                    u[j] = j == free ? uf : breakpoints[j][pick[j]];
                    value += probs[j] * eval_yv(fns[j], rule, u[j]);
                }
                best = std::max(best, value / y);
            }
            // odometer over the non-free coordinates
            size_t pos = 0;
            while (pos < n) {
                if (pos == free) {
                    ++pos;
                    continue;
                }
                if (++pick[pos] < breakpoints[pos].size()) break;
                pick[pos] = 0;
                ++pos;
            }
            if (pos >= n) break;
        }
    }
    return best;
}

RandomModel random_proper_ssp(uint64_t seed, int max_states, int max_actions) {
    std::mt19937_64 gen(seed);
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(gen() % static_cast<uint64_t>(hi - lo + 1)); };

    const int n = pick(2, max_states);
    const int n_actions = pick(1, max_actions);
    const double costs[4] = {0.5, 1.0, 2.0, 99.0};

    SspMdp model(n, n_actions, 1.0);
    int goal_lo = n - 1;
    if (n >= 4 && pick(0, 1) == 1) goal_lo = n - 2; // occasionally two goals
    for (StateId g = goal_lo; g < n; ++g) model.set_goal(g);

    for (StateId s = 0; s < goal_lo; ++s) {
        for (ActionId a = 0; a < n_actions; ++a) {
            int degree = pick(1, std::min(3, n));
            std::vector<StateId> targets;
            targets.push_back(static_cast<StateId>(pick(s + 1, n - 1))); // keeps every policy proper
            while (static_cast<int>(targets.size()) < degree) {
                StateId t = static_cast<StateId>(pick(0, n - 1));
                if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
            }
            std::vector<double> weights(targets.size());
            double total = 0.0;
            for (auto& w : weights) {
                w = static_cast<double>(pick(1, 9));
                total += w;
            }
            std::vector<Transition> next;
            for (size_t i = 0; i < targets.size(); ++i) next.push_back({targets[i], weights[i] / total});
            model.set_action(s, a, costs[pick(0, 3)], std::move(next));
        }
    }
    for (StateId g = goal_lo; g < n; ++g)
        for (ActionId a = 0; a < n_actions; ++a) model.set_action(g, a, 0.0, {{g, 1.0}});

    StationaryPolicy policy;
    policy.action.resize(static_cast<size_t>(n), 0);
    for (StateId s = 0; s < n; ++s) policy.action[static_cast<size_t>(s)] = pick(0, n_actions - 1);
    return {std::move(model), std::move(policy)};
}

RandomModel random_chain(uint64_t seed, int max_states) {
    std::mt19937_64 gen(seed);
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(gen() % static_cast<uint64_t>(hi - lo + 1)); };

    // Edges are deterministic or fair coin flips, so a proper chain absorbs
    // fast enough for the fixed-step power-iteration oracle to be decisive.
    const int n = pick(2, max_states);
    SspMdp model(n, 1, 1.0);
    model.set_goal(n - 1);
    for (StateId s = 0; s < n - 1; ++s) {
        StateId first = static_cast<StateId>(pick(0, n - 1));
        if (pick(0, 2) == 0) {
            model.set_action(s, 0, 1.0, {{first, 1.0}});
        } else {
            StateId second = first;
            while (second == first) second = static_cast<StateId>(pick(0, n - 1));
            model.set_action(s, 0, 1.0, {{first, 0.5}, {second, 0.5}});
        }
    }
    model.set_action(n - 1, 0, 0.0, {{static_cast<StateId>(n - 1), 1.0}});

    StationaryPolicy policy;
    policy.action.resize(static_cast<size_t>(n), 0);
    return {std::move(model), std::move(policy)};
}

double absorption_probability(const SspMdp& model, const StationaryPolicy& policy, int steps) {
    const int n = model.state_count();
    // mass remaining in transient states after power iteration, worst start
    std::vector<std::vector<double>> dist(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0.0));
    for (int s = 0; s < n; ++s) dist[static_cast<size_t>(s)][static_cast<size_t>(s)] = 1.0;
    for (int step = 0; step < steps; ++step) {
        bool any_mass = false;
        for (int start = 0; start < n; ++start) {
            auto& d = dist[static_cast<size_t>(start)];
            std::vector<double> nd(static_cast<size_t>(n), 0.0);
            for (int s = 0; s < n; ++s) {
                double m = d[static_cast<size_t>(s)];
                if (m == 0.0) continue;
                if (model.is_goal(s)) {
                    nd[static_cast<size_t>(s)] += m;
                    continue;
                }
                for (const auto& t : model.successors(s, policy.action[static_cast<size_t>(s)]))
                    nd[static_cast<size_t>(t.next)] += m * t.prob;
            }
            d = std::move(nd);
            for (int s = 0; s < n; ++s)
                if (!model.is_goal(s) && d[static_cast<size_t>(s)] > 1e-12) any_mass = true;
        }
        if (!any_mass) break;
    }
    double worst = 1.0;
    for (int start = 0; start < n; ++start) {
        double absorbed = 0.0;
        for (int s = 0; s < n; ++s)
            if (model.is_goal(s)) absorbed += dist[static_cast<size_t>(start)][static_cast<size_t>(s)];
        worst = std::min(worst, absorbed);
    }
    return worst;
}

} // namespace oracle
