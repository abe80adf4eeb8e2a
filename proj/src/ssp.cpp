#include "cvarlab/ssp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace cvarlab {

void SspMdp::set_action(StateId s, ActionId a, double cost, std::vector<Transition> next) {
    auto& row = rows_[static_cast<size_t>(s)];
    for (auto& e : row) {
        if (e.action == a) {
            e.cost = cost;
            e.next = std::move(next);
            return;
        }
    }
    row.push_back(ActionEntry{a, cost, std::move(next)});
    std::sort(row.begin(), row.end(),
              [](const ActionEntry& x, const ActionEntry& y) { return x.action < y.action; });
}

const SspMdp::ActionEntry* SspMdp::entry(StateId s, ActionId a) const {
    for (const auto& e : rows_[static_cast<size_t>(s)])
        if (e.action == a) return &e;
    return nullptr;
}

double SspMdp::cost(StateId s, ActionId a) const {
    const auto* e = entry(s, a);
    if (!e) throw ValidationError("cost(): undefined action " + std::to_string(a) + " at state " + std::to_string(s));
    return e->cost;
}

std::span<const Transition> SspMdp::successors(StateId s, ActionId a) const {
    const auto* e = entry(s, a);
    if (!e) throw ValidationError("successors(): undefined action " + std::to_string(a) + " at state " + std::to_string(s));
    return {e->next.data(), e->next.size()};
}

std::vector<ActionId> SspMdp::actions_at(StateId s) const {
    std::vector<ActionId> out;
    for (const auto& e : rows_[static_cast<size_t>(s)]) out.push_back(e.action);
    return out;
}

void SspMdp::renormalize(double tol) {
    for (auto& row : rows_) {
        for (auto& e : row) {
            double mass = 0.0;
            for (const auto& t : e.next) mass += t.prob;
            if (mass > 0.0 && std::fabs(mass - 1.0) <= tol && mass != 1.0) {
                for (auto& t : e.next) t.prob /= mass;
            }
        }
    }
}

std::vector<Violation> validate_ssp(const SspMdp& model) {
    std::vector<Violation> out;
    const double tol = 1e-9;

    if (model.goals().empty())
        out.push_back({-1, -1, "model has no goal states"});
    if (!(model.gamma() > 0.0 && model.gamma() <= 1.0))
        out.push_back({-1, -1, "discount must lie in (0,1]"});

    for (StateId s = 0; s < model.state_count(); ++s) {
        for (ActionId a : model.actions_at(s)) {
            auto next = model.successors(s, a);
            double mass = 0.0;
            for (const auto& t : next) {
                mass += t.prob;
                if (t.prob <= 0.0)
                    out.push_back({s, a, "nonpositive successor probability"});
                if (t.next < 0 || t.next >= model.state_count())
                    out.push_back({s, a, "successor id out of range"});
            }
            if (!next.empty() && std::fabs(mass - 1.0) > tol)
                out.push_back({s, a, "probability mass is " + std::to_string(mass) + ", expected 1"});
            if (model.cost(s, a) < 0.0)
                out.push_back({s, a, "negative cost"});
            if (model.is_goal(s)) {
                if (model.cost(s, a) != 0.0)
                    out.push_back({s, a, "goal cost nonzero"});
                bool self_loop = next.size() == 1 && next[0].next == s && std::fabs(next[0].prob - 1.0) <= tol;
                if (!next.empty() && !self_loop)
                    out.push_back({s, a, "goal state is not absorbing"});
            }
        }
    }
    return out;
}

bool is_proper(const SspMdp& model, const StationaryPolicy& policy) {
    const int n = model.state_count();
    if (static_cast<int>(policy.action.size()) < n) return false;

    // reverse adjacency over policy edges
    std::vector<std::vector<StateId>> rev(static_cast<size_t>(n));
    for (StateId s = 0; s < n; ++s) {
        if (model.is_goal(s)) continue;
        ActionId a = policy.action[static_cast<size_t>(s)];
        if (!model.has_action(s, a)) return false;
        for (const auto& t : model.successors(s, a))
            rev[static_cast<size_t>(t.next)].push_back(s);
    }

    std::vector<bool> reaches(static_cast<size_t>(n), false);
    std::deque<StateId> queue;
    for (StateId s = 0; s < n; ++s) {
        if (model.is_goal(s)) {
            reaches[static_cast<size_t>(s)] = true;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop_front();
        for (StateId p : rev[static_cast<size_t>(s)]) {
            if (!reaches[static_cast<size_t>(p)]) {
                reaches[static_cast<size_t>(p)] = true;
                queue.push_back(p);
            }
        }
    }
    return std::all_of(reaches.begin(), reaches.end(), [](bool b) { return b; });
}

ValueFunction policy_evaluation_neutral(const SspMdp& model, const StationaryPolicy& policy,
                                        double epsilon, long max_iterations) {
    if (epsilon <= 0.0) throw ValidationError("policy_evaluation_neutral: epsilon must be > 0");
    if (!is_proper(model, policy))
        throw ImproperPolicy("policy_evaluation_neutral: policy cannot reach a goal from every state");

    const int n = model.state_count();
    const double gamma = model.gamma();
    std::vector<double> v(static_cast<size_t>(n), 0.0), nv(static_cast<size_t>(n), 0.0);

    for (long iter = 0; iter < max_iterations; ++iter) {
        double residual = 0.0;
        for (StateId s = 0; s < n; ++s) {
            if (model.is_goal(s)) {
                nv[static_cast<size_t>(s)] = 0.0;
                continue;
            }
            ActionId a = policy.action[static_cast<size_t>(s)];
            double acc = model.cost(s, a);
            for (const auto& t : model.successors(s, a))
                acc += gamma * t.prob * v[static_cast<size_t>(t.next)];
            nv[static_cast<size_t>(s)] = acc;
            residual = std::max(residual, std::fabs(acc - v[static_cast<size_t>(s)]));
        }
        v.swap(nv);
        if (residual <= epsilon) return ValueFunction{std::move(v)};
    }
    throw NonConvergence("policy_evaluation_neutral: no fixed point within iteration budget");
}

std::vector<bool> almost_sure_goal_states(const SspMdp& model) {
    const int n = model.state_count();
    // de Alfaro-style nested fixpoint: shrink the candidate set X until it
    // equals the set of states with an action that stays inside X and makes
    // progress toward a goal with positive probability.
    std::vector<bool> x(static_cast<size_t>(n), true);
    while (true) {
        std::vector<bool> y(static_cast<size_t>(n), false);
        for (StateId s = 0; s < n; ++s)
            if (model.is_goal(s)) y[static_cast<size_t>(s)] = true;
        bool grew = true;
        while (grew) {
            grew = false;
            for (StateId s = 0; s < n; ++s) {
                if (y[static_cast<size_t>(s)] || !x[static_cast<size_t>(s)]) continue;
                for (ActionId a : model.actions_at(s)) {
                    bool stays = true, progress = false;
                    for (const auto& t : model.successors(s, a)) {
                        if (!x[static_cast<size_t>(t.next)]) stays = false;
                        if (y[static_cast<size_t>(t.next)]) progress = true;
                    }
                    if (stays && progress) {
                        y[static_cast<size_t>(s)] = true;
                        grew = true;
                        break;
                    }
                }
            }
        }
        if (y == x) return x;
        x = std::move(y);
    }
}

std::pair<ValueFunction, StationaryPolicy> value_iteration_neutral(const SspMdp& model, double epsilon,
                                                                   long max_iterations) {
    if (epsilon <= 0.0) throw ValidationError("value_iteration_neutral: epsilon must be > 0");
    auto winning = almost_sure_goal_states(model);
    for (StateId s = 0; s < model.state_count(); ++s)
        if (!winning[static_cast<size_t>(s)])
            throw NoProperPolicy("value_iteration_neutral: state " + std::to_string(s) +
                                 " cannot reach a goal with probability 1");

    const int n = model.state_count();
    const double gamma = model.gamma();
    std::vector<double> v(static_cast<size_t>(n), 0.0), nv(static_cast<size_t>(n), 0.0);
    StationaryPolicy policy;
    policy.action.assign(static_cast<size_t>(n), -1);

    for (long iter = 0; iter < max_iterations; ++iter) {
        double residual = 0.0;
        for (StateId s = 0; s < n; ++s) {
            if (model.is_goal(s)) {
                nv[static_cast<size_t>(s)] = 0.0;
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            ActionId best_a = -1;
            for (ActionId a : model.actions_at(s)) {
                double acc = model.cost(s, a);
                for (const auto& t : model.successors(s, a))
                    acc += gamma * t.prob * v[static_cast<size_t>(t.next)];
                if (acc < best) {
                    best = acc;
                    best_a = a;
                }
            }
            nv[static_cast<size_t>(s)] = best;
            policy.action[static_cast<size_t>(s)] = best_a;
            residual = std::max(residual, std::fabs(best - v[static_cast<size_t>(s)]));
        }
        v.swap(nv);
        if (residual <= epsilon) return {ValueFunction{std::move(v)}, std::move(policy)};
    }
    throw NonConvergence("value_iteration_neutral: no fixed point within iteration budget");
}

ValueFunction determinized_min_cost(const SspMdp& model, const StationaryPolicy& policy,
                                    double epsilon, long max_iterations) {
    if (!is_proper(model, policy))
        throw ImproperPolicy("determinized_min_cost: policy cannot reach a goal from every state");

    const int n = model.state_count();
    const double gamma = model.gamma();
    std::vector<double> v(static_cast<size_t>(n), 0.0), nv(static_cast<size_t>(n), 0.0);

    for (long iter = 0; iter < max_iterations; ++iter) {
        double residual = 0.0;
        for (StateId s = 0; s < n; ++s) {
            if (model.is_goal(s)) {
                nv[static_cast<size_t>(s)] = 0.0;
                continue;
            }
            ActionId a = policy.action[static_cast<size_t>(s)];
            double best = std::numeric_limits<double>::infinity();
            for (const auto& t : model.successors(s, a))
                best = std::min(best, v[static_cast<size_t>(t.next)]);
            double acc = model.cost(s, a) + gamma * best;
            nv[static_cast<size_t>(s)] = acc;
            residual = std::max(residual, std::fabs(acc - v[static_cast<size_t>(s)]));
        }
        v.swap(nv);
        if (residual <= epsilon) return ValueFunction{std::move(v)};
    }
    throw NonConvergence("determinized_min_cost: no fixed point within iteration budget");
}

} // namespace cvarlab
