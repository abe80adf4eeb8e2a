#include "cvarlab/forpecvar.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

namespace cvarlab {

ExtendedMdp create_extended_mdp(const SspMdp& model, const AugmentedPolicy& policy) {
    const auto& grid = policy.grid();
    const int n_atoms = grid.size();
    ExtendedMdp ext{SspMdp(model.state_count() * n_atoms, model.action_count(), model.gamma()), n_atoms};

    for (StateId s = 0; s < model.state_count(); ++s) {
        for (int k = 0; k < n_atoms; ++k) {
            const StateId x = ext.index(s, k);
            if (model.is_goal(s)) {
                ext.mdp.set_goal(x);
                ext.mdp.set_action(x, 0, 0.0, {{x, 1.0}});
                continue;
            }
            const ActionId a = policy.action(s, k);
            if (a < 0 || !model.has_action(s, a))
                throw ValidationError("create_extended_mdp: no policy action at state " + std::to_string(s) +
                                      ", atom " + std::to_string(k));
            const double y = grid.atoms[static_cast<size_t>(k)];
            auto succ = model.successors(s, a);
            std::vector<Transition> next;
            next.reserve(succ.size());
            for (size_t pos = 0; pos < succ.size(); ++pos) {
                double xi = policy.xi(s, k, static_cast<int>(pos), succ[pos].next);
                double alpha_next = y * xi;
                int atom2 = alpha_next > 0.0 ? nearest_atom_log(grid, alpha_next) : 0;
                next.push_back({ext.index(succ[pos].next, atom2), succ[pos].prob});
            }
            ext.mdp.set_action(x, a, model.cost(s, a), std::move(next));
        }
    }
    return ext;
}

ExtendedEvaluation mdp_policy_evaluation(const SspMdp& model, const AugmentedPolicy& policy, double epsilon) {
    ExtendedMdp ext = create_extended_mdp(model, policy);
    StationaryPolicy unique;
    unique.action.resize(static_cast<size_t>(ext.mdp.state_count()), 0);
    for (StateId x = 0; x < ext.mdp.state_count(); ++x)
        unique.action[static_cast<size_t>(x)] = ext.mdp.actions_at(x).front();

    if (!is_proper(ext.mdp, unique))
        throw ImproperExtendedPolicy("mdp_policy_evaluation: some augmented state cannot reach a goal");

    ExtendedEvaluation out;
    out.mean = policy_evaluation_neutral(ext.mdp, unique, epsilon);
    out.min = determinized_min_cost(ext.mdp, unique, epsilon);
    return out;
}

namespace {

struct NodeKey {
    StateId state;
    int32_t atom;
    int64_t cost_key;
    int32_t stage; // -1 unless discounting makes the stage part of the identity
    bool operator==(const NodeKey&) const = default;
};

struct NodeKeyHash {
    size_t operator()(const NodeKey& k) const {
        uint64_t h = 1469598103934665603ull;
        auto mix = [&h](uint64_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        mix(static_cast<uint32_t>(k.state));
        mix(static_cast<uint32_t>(k.atom));
        mix(static_cast<uint64_t>(k.cost_key));
        mix(static_cast<uint32_t>(k.stage));
        return static_cast<size_t>(h);
    }
};

struct Node {
    double cost;
    double prob;
    double gamma_pow; // gamma^stage
    StateId state;
    int32_t atom;
    int32_t stage;
};

struct HeapEntry {
    double priority;
    double cost;
    bool goal;
    StateId state;
    int32_t atom;
    uint64_t seq;
    uint32_t pool;
};

// Min-heap with the (priority, cost, goal-first, state, atom, seq)
// tie-break: deterministic pops, and goal nodes cannot be starved by a
// cycle whose cost increment vanishes (zero-cost loops, or discounted
// increments below the cost resolution).
struct HeapCompare {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.priority != b.priority) return a.priority > b.priority;
        if (a.cost != b.cost) return a.cost > b.cost;
        if (a.goal != b.goal) return b.goal;
        if (a.state != b.state) return a.state > b.state;
        if (a.atom != b.atom) return a.atom > b.atom;
        return a.seq > b.seq;
    }
};

EvalResult forward_evaluate(const SspMdp& model, const StationaryPolicy* stationary,
                            const AugmentedPolicy* augmented, StateId s0, double alpha,
                            const EvalOptions& opt) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ValidationError("run_forpecvar: alpha must lie in (0,1]");
    if (s0 < 0 || s0 >= model.state_count())
        throw ValidationError("run_forpecvar: start state out of range");

    const AtomGrid* grid = augmented ? &augmented->grid() : nullptr;
    int start_atom = -1;
    if (augmented) {
        auto exact = grid->index_of(alpha);
        start_atom = exact ? *exact : nearest_atom_log(*grid, alpha);
    }

    // Risk-neutral value of the policy plus the admissible heuristic.
    std::vector<double> mean_values;
    std::vector<double> min_values;
    if (augmented) {
        ExtendedEvaluation ev = mdp_policy_evaluation(model, *augmented, opt.mean_epsilon);
        mean_values = std::move(ev.mean.value);
        min_values = std::move(ev.min.value);
    } else {
        mean_values = policy_evaluation_neutral(model, *stationary, opt.mean_epsilon).value;
        if (opt.heuristic == HeuristicMode::MinCost)
            min_values = determinized_min_cost(model, *stationary, opt.mean_epsilon).value;
    }
    const std::vector<double>* heur = nullptr;
    if (opt.heuristic == HeuristicMode::MinCost) heur = &min_values;
    else if (opt.heuristic == HeuristicMode::Custom) {
        if (!opt.custom_heuristic) throw ValidationError("run_forpecvar: custom heuristic missing");
        heur = opt.custom_heuristic;
    }

    auto value_index = [&](StateId s, int atom) -> size_t {
        return augmented ? static_cast<size_t>(s) * static_cast<size_t>(grid->size()) + static_cast<size_t>(atom)
                         : static_cast<size_t>(s);
    };
    const double mean_at_start = mean_values[value_index(s0, start_atom)];

    const bool track_stage = model.gamma() < 1.0;
    auto cost_key = [&](double c) { return static_cast<int64_t>(std::llround(c / opt.group_cost_resolution)); };

    std::vector<Node> pool;
    std::vector<uint32_t> free_list;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapCompare> heap;
    std::unordered_map<NodeKey, uint32_t, NodeKeyHash> open;
    uint64_t seq = 0;

    auto push_node = [&](StateId s, int32_t atom, double cost, double prob, int32_t stage, double gamma_pow) {
        // mass below representable resolution cannot move any accumulator;
        // pruning it keeps discounted self-loops from spinning forever once
        // their cost increment underflows
        if (prob < 1e-300) return;
        NodeKey key{s, atom, cost_key(cost), track_stage ? stage : -1};
        if (auto it = open.find(key); it != open.end()) {
            pool[it->second].prob += prob; // group: ordering fields unchanged
            return;
        }
        double h = heur ? (*heur)[value_index(s, atom)] : 0.0;
        double priority = cost + gamma_pow * h;
        uint32_t idx;
        if (!free_list.empty()) {
            idx = free_list.back();
            free_list.pop_back();
            pool[idx] = Node{cost, prob, gamma_pow, s, atom, stage};
        } else {
            idx = static_cast<uint32_t>(pool.size());
            pool.push_back(Node{cost, prob, gamma_pow, s, atom, stage});
        }
        open.emplace(key, idx);
        heap.push(HeapEntry{priority, cost, model.is_goal(s), s, atom, seq++, idx});
    };

    push_node(s0, start_atom, 0.0, 1.0, 0, 1.0);

    EvalResult result;
    result.mean = mean_at_start;

    double P = 0.0;        // probability of reaching a goal paying at most X
    double V_leq = 0.0;    // expected cost of those best cases
    double yX = 1.0;       // 1 - P after the last goal pop
    double VX = 0.0;       // V(s0, yX)
    double X = 0.0;        // accumulated cost of the last goal pop
    bool popped_goal = false;
    uint64_t pops_since_goal = 0;
    const bool alpha_is_one = alpha == 1.0;

    // For alpha = 1 the tail guard is false immediately; the expansion only
    // has to reach the first (minimum-cost) goal pop, which is the VaR.
    while (alpha_is_one ? !popped_goal : (1.0 - P > alpha)) {
        if (heap.empty())
            throw ImproperPolicy("run_forpecvar: frontier exhausted before the alpha tail was isolated");
        HeapEntry top = heap.top();
        heap.pop();
        Node node = pool[top.pool];
        open.erase(NodeKey{node.state, node.atom, cost_key(node.cost), track_stage ? node.stage : -1});
        free_list.push_back(top.pool);
        ++result.popped;

        if (model.is_goal(node.state)) {
            popped_goal = true;
            pops_since_goal = 0;
            const double new_p = P + node.prob;
            V_leq = (V_leq * P + node.cost * node.prob) / new_p;
            P = new_p;
            yX = std::max(1.0 - P, 0.0);
            VX = yX > 1e-15 ? (mean_at_start - V_leq * P) / yX : 0.0;
            if (yX <= 1e-15) yX = 0.0;
            X = node.cost;
            result.trace.push_back(TracePoint{X, yX, VX});
        } else {
            if (++pops_since_goal > opt.max_pops_without_goal)
                throw ImproperPolicy("run_forpecvar: goal probability stalled; node budget exceeded");
            const ActionId a = augmented ? augmented->action(node.state, node.atom)
                                         : stationary->action[static_cast<size_t>(node.state)];
            if (a < 0 || !model.has_action(node.state, a))
                throw ValidationError("run_forpecvar: policy has no action at state " + std::to_string(node.state));
            const double step_cost = model.cost(node.state, a);
            const double new_cost = node.cost + node.gamma_pow * step_cost;
            const double new_gamma_pow = node.gamma_pow * model.gamma();
            auto succ = model.successors(node.state, a);
            for (size_t pos = 0; pos < succ.size(); ++pos) {
                int32_t atom2 = -1;
                if (augmented) {
                    const double y = grid->atoms[static_cast<size_t>(node.atom)];
                    const double xi = augmented->xi(node.state, node.atom, static_cast<int>(pos), succ[pos].next);
                    const double alpha_next = y * xi;
                    atom2 = alpha_next > 0.0 ? nearest_atom_log(*grid, alpha_next) : 0;
                }
                push_node(succ[pos].next, atom2, new_cost, node.prob * succ[pos].prob, node.stage + 1,
                          new_gamma_pow);
            }
            ++result.expanded;
        }
    }

    if (alpha_is_one) {
        result.cvar = mean_at_start;
        result.var = X;
        return result;
    }
    result.cvar = (yX * VX + (alpha - yX) * X) / alpha;
    result.var = X;
    return result;
}

} // namespace

EvalResult run_forpecvar(const SspMdp& model, const StationaryPolicy& policy, StateId s0, double alpha,
                         const EvalOptions& options) {
    return forward_evaluate(model, &policy, nullptr, s0, alpha, options);
}

EvalResult run_forpecvar(const SspMdp& model, const AugmentedPolicy& policy, StateId s0, double alpha,
                         const EvalOptions& options) {
    return forward_evaluate(model, nullptr, &policy, s0, alpha, options);
}

} // namespace cvarlab
