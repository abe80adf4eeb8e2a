#include "cvarlab/mc.hpp"

#include <chrono>
#include <cmath>
#include <optional>

#include "cvarlab/parallel.hpp"
#include "cvarlab/rng.hpp"

namespace cvarlab {

namespace {

// One rollout; nullopt when the horizon guard trips.
std::optional<double> rollout(const SspMdp& model, const StationaryPolicy* stationary,
                              const AugmentedPolicy* augmented, StateId s0, int start_atom,
                              long max_steps, CounterRng& rng) {
    StateId s = s0;
    int atom = start_atom;
    double cost = 0.0;
    double gamma_pow = 1.0;
    const double gamma = model.gamma();
    for (long step = 0; step < max_steps; ++step) {
        if (model.is_goal(s)) return cost;
        ActionId a = augmented ? augmented->action(s, atom) : stationary->action[static_cast<size_t>(s)];
        cost += gamma_pow * model.cost(s, a);
        gamma_pow *= gamma;

        auto succ = model.successors(s, a);
        double u = rng.next_double();
        size_t pos = succ.size() - 1;
        double cum = 0.0;
        for (size_t i = 0; i < succ.size(); ++i) {
            cum += succ[i].prob;
            if (u < cum) {
                pos = i;
                break;
            }
        }
        StateId next = succ[pos].next;
        if (augmented) {
            const auto& grid = augmented->grid();
            double y = grid.atoms[static_cast<size_t>(atom)];
            double xi = augmented->xi(s, atom, static_cast<int>(pos), next);
            double alpha_next = y * xi;
            atom = alpha_next > 0.0 ? nearest_atom_log(grid, alpha_next) : 0;
        }
        s = next;
    }
    return std::nullopt;
}

McRun run_simulation(const SspMdp& model, const StationaryPolicy* stationary,
                     const AugmentedPolicy* augmented, StateId s0, int start_atom,
                     const McConfig& config) {
    if (config.samples < 1) throw ValidationError("simulate_policy: need at least one sample");
    if (s0 < 0 || s0 >= model.state_count())
        throw ValidationError("simulate_policy: start state out of range");

    std::vector<double> outcomes;
    long failures = 0;

    if (config.time_budget_seconds) {
        const double budget = *config.time_budget_seconds;
        auto t0 = std::chrono::steady_clock::now();
        uint64_t i = 0;
        do {
            CounterRng rng(config.seed, i);
            auto z = rollout(model, stationary, augmented, s0, start_atom, config.max_steps, rng);
            if (z) outcomes.push_back(*z);
            else ++failures;
            ++i;
        } while (std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < budget);
    } else {
        std::vector<std::optional<double>> slots(static_cast<size_t>(config.samples));
        parallel_for(config.samples, config.threads, [&](long i) {
            CounterRng rng(config.seed, static_cast<uint64_t>(i));
            slots[static_cast<size_t>(i)] =
                rollout(model, stationary, augmented, s0, start_atom, config.max_steps, rng);
        });
        outcomes.reserve(static_cast<size_t>(config.samples));
        for (const auto& z : slots) {
            if (z) outcomes.push_back(*z);
            else ++failures;
        }
    }

    const long total = static_cast<long>(outcomes.size()) + failures;
    if (total > 0 && static_cast<double>(failures) / static_cast<double>(total) > 1e-3)
        throw TooManyFailures("simulate_policy: " + std::to_string(failures) + " of " +
                              std::to_string(total) + " rollouts hit the horizon guard");
    if (outcomes.empty()) throw TooManyFailures("simulate_policy: no completed rollouts");

    McRun run;
    run.completed = static_cast<long>(outcomes.size());
    run.failures = failures;
    std::vector<std::pair<double, double>> weighted;
    weighted.reserve(outcomes.size());
    for (double z : outcomes) weighted.emplace_back(z, 1.0);
    run.empirical = DiscreteDistribution::from_weighted(std::move(weighted));
    return run;
}

} // namespace

McRun simulate_policy(const SspMdp& model, const StationaryPolicy& policy, StateId s0,
                      const McConfig& config) {
    return run_simulation(model, &policy, nullptr, s0, -1, config);
}

McRun simulate_policy(const SspMdp& model, const AugmentedPolicy& policy, StateId s0, double alpha,
                      const McConfig& config) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("simulate_policy: alpha must lie in (0,1]");
    const auto& grid = policy.grid();
    auto exact = grid.index_of(alpha);
    int atom = exact ? *exact : nearest_atom_log(grid, alpha);
    return run_simulation(model, nullptr, &policy, s0, atom, config);
}

std::pair<double, double> mc_cvar_estimate(const DiscreteDistribution& samples, double alpha) {
    return {cvar(samples, alpha), var(samples, alpha)};
}

} // namespace cvarlab
