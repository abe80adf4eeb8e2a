#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cvarlab/experiment.hpp"
#include "cvarlab/mc.hpp"

namespace py = pybind11;
using namespace cvarlab;

namespace {

std::vector<std::string> violations_as_strings(const SspMdp& model) {
    std::vector<std::string> out;
    for (const auto& v : validate_ssp(model))
        out.push_back("(s=" + std::to_string(v.state) + ", a=" + std::to_string(v.action) + ") " + v.message);
    return out;
}

EvalResult eval_stationary(const SspMdp& model, const StationaryPolicy& policy, StateId s0, double alpha,
                           bool use_heuristic) {
    EvalOptions opt;
    opt.heuristic = use_heuristic ? HeuristicMode::MinCost : HeuristicMode::None;
    return run_forpecvar(model, policy, s0, alpha, opt);
}

template <typename Solution, typename Adapter>
EvalResult eval_solution(const SspMdp& model, const Solution& solution, StateId s0, double alpha,
                         bool use_heuristic) {
    Adapter policy(model, solution);
    EvalOptions opt;
    opt.heuristic = use_heuristic ? HeuristicMode::MinCost : HeuristicMode::None;
    return run_forpecvar(model, policy, s0, alpha, opt);
}

template <typename Solution, typename Adapter>
std::pair<double, double> mc_solution(const SspMdp& model, const Solution& solution, StateId s0,
                                      double alpha, long samples, uint64_t seed) {
    Adapter policy(model, solution);
    McConfig config;
    config.samples = samples;
    config.seed = seed;
    McRun run = simulate_policy(model, policy, s0, alpha, config);
    return mc_cvar_estimate(run.empirical, alpha);
}

} // namespace

PYBIND11_MODULE(_cvarlab, m) {
    m.doc() = "CVaR-sensitive stochastic shortest paths: solvers, exact forward policy "
              "evaluation, domains, and Monte-Carlo baselines";

    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<ImproperPolicy>(m, "ImproperPolicyError");
    py::register_exception<NoProperPolicy>(m, "NoProperPolicyError");
    py::register_exception<ImproperExtendedPolicy>(m, "ImproperExtendedPolicyError");
    py::register_exception<NonConvergence>(m, "NonConvergenceError");
    py::register_exception<InvalidSpec>(m, "InvalidSpecError");
    py::register_exception<TooManyFailures>(m, "TooManyFailuresError");

    py::class_<SspMdp>(m, "SspMdp")
        .def(py::init<int, int, double>(), py::arg("states"), py::arg("actions"), py::arg("gamma") = 1.0)
        .def("set_goal", &SspMdp::set_goal)
        .def("is_goal", &SspMdp::is_goal)
        .def("set_action",
             [](SspMdp& self, StateId s, ActionId a, double cost,
                const std::vector<std::pair<StateId, double>>& next) {
                 std::vector<Transition> transitions;
                 transitions.reserve(next.size());
                 for (const auto& [sp, p] : next) transitions.push_back({sp, p});
                 self.set_action(s, a, cost, std::move(transitions));
             },
             py::arg("s"), py::arg("a"), py::arg("cost"), py::arg("next"))
        .def("successors",
             [](const SspMdp& self, StateId s, ActionId a) {
                 std::vector<std::pair<StateId, double>> out;
                 for (const auto& t : self.successors(s, a)) out.emplace_back(t.next, t.prob);
                 return out;
             })
        .def("cost", &SspMdp::cost)
        .def("actions_at", &SspMdp::actions_at)
        .def("goals", &SspMdp::goals)
        .def_property_readonly("states", &SspMdp::state_count)
        .def_property_readonly("actions", &SspMdp::action_count)
        .def_property_readonly("gamma", &SspMdp::gamma);

    m.def("validate_ssp", &violations_as_strings, py::arg("model"));

    py::class_<StationaryPolicy>(m, "StationaryPolicy")
        .def(py::init([](std::vector<ActionId> actions) {
                 StationaryPolicy p;
                 p.action = std::move(actions);
                 return p;
             }),
             py::arg("actions"))
        .def_readonly("action", &StationaryPolicy::action);

    m.def("is_proper", &is_proper, py::arg("model"), py::arg("policy"));
    m.def("policy_evaluation_neutral",
          [](const SspMdp& model, const StationaryPolicy& policy, double epsilon) {
              return policy_evaluation_neutral(model, policy, epsilon).value;
          },
          py::arg("model"), py::arg("policy"), py::arg("epsilon") = 1e-9);
    m.def("value_iteration_neutral",
          [](const SspMdp& model, double epsilon) {
              auto [v, pi] = value_iteration_neutral(model, epsilon);
              return std::make_pair(v.value, pi.action);
          },
          py::arg("model"), py::arg("epsilon") = 1e-9);
    m.def("determinized_min_cost",
          [](const SspMdp& model, const StationaryPolicy& policy) {
              return determinized_min_cost(model, policy).value;
          },
          py::arg("model"), py::arg("policy"));

    py::class_<DiscreteDistribution>(m, "DiscreteDistribution")
        .def(py::init([](std::vector<double> support, std::vector<double> probs) {
                 DiscreteDistribution d{std::move(support), std::move(probs)};
                 validate_distribution(d);
                 return d;
             }),
             py::arg("support"), py::arg("probs"))
        .def_readonly("support", &DiscreteDistribution::support)
        .def_readonly("probs", &DiscreteDistribution::probs);

    m.def("var", &var, py::arg("dist"), py::arg("alpha"));
    m.def("cvar", &cvar, py::arg("dist"), py::arg("alpha"));

    py::class_<AtomGrid>(m, "AtomGrid")
        .def_static("log_spaced", &AtomGrid::log_spaced, py::arg("alpha0"), py::arg("n"))
        .def_static("from_atoms", &AtomGrid::from_atoms, py::arg("atoms"))
        .def_readonly("atoms", &AtomGrid::atoms)
        .def_property_readonly("alpha0", &AtomGrid::alpha0)
        .def("is_log_spaced", &AtomGrid::is_log_spaced, py::arg("tol") = 1e-9);

    m.def("nearest_atom_log",
          [](const AtomGrid& grid, double alpha_next) { return nearest_atom_log(grid, alpha_next); },
          py::arg("grid"), py::arg("alpha_next"));

    py::class_<AugmentedSolution>(m, "AugmentedSolution")
        .def_readonly("grid", &AugmentedSolution::grid)
        .def_readonly("value", &AugmentedSolution::value)
        .def_readonly("policy", &AugmentedSolution::policy)
        .def_readonly("xi", &AugmentedSolution::xi)
        .def_readonly("iterations", &AugmentedSolution::iterations)
        .def_readonly("residual", &AugmentedSolution::residual);

    py::class_<QuantileSolution>(m, "QuantileSolution")
        .def_readonly("grid", &QuantileSolution::grid)
        .def_readonly("value", &QuantileSolution::value)
        .def_readonly("policy", &QuantileSolution::policy)
        .def_readonly("var", &QuantileSolution::var)
        .def_readonly("iterations", &QuantileSolution::iterations)
        .def_readonly("residual", &QuantileSolution::residual);

    m.def("run_vili",
          [](const SspMdp& model, const AtomGrid& grid, double epsilon) {
              SolveOptions options;
              options.epsilon = epsilon;
              return run_vili(model, grid, options);
          },
          py::arg("model"), py::arg("grid"), py::arg("epsilon") = 1e-3);
    m.def("run_viq",
          [](const SspMdp& model, const AtomGrid& grid, double epsilon) {
              SolveOptions options;
              options.epsilon = epsilon;
              return run_viq(model, grid, options);
          },
          py::arg("model"), py::arg("grid"), py::arg("epsilon") = 1e-3);

    m.def("interpolate_ycvar",
          [](const AtomGrid& grid, const std::vector<double>& values, double y) {
              return interpolate_ycvar(grid, values, y);
          },
          py::arg("grid"), py::arg("values"), py::arg("y"));

    py::class_<TracePoint>(m, "TracePoint")
        .def_readonly("cost", &TracePoint::cost)
        .def_readonly("y", &TracePoint::y)
        .def_readonly("value", &TracePoint::value);

    py::class_<EvalResult>(m, "EvalResult")
        .def_readonly("cvar", &EvalResult::cvar)
        .def_readonly("var", &EvalResult::var)
        .def_readonly("trace", &EvalResult::trace)
        .def_readonly("mean", &EvalResult::mean)
        .def_readonly("popped", &EvalResult::popped)
        .def_readonly("expanded", &EvalResult::expanded);

    m.def("run_forpecvar", &eval_stationary, py::arg("model"), py::arg("policy"), py::arg("s0"),
          py::arg("alpha"), py::arg("use_heuristic") = true);
    m.def("run_forpecvar_vili", &eval_solution<AugmentedSolution, ViliPolicy>, py::arg("model"),
          py::arg("solution"), py::arg("s0"), py::arg("alpha"), py::arg("use_heuristic") = true);
    m.def("run_forpecvar_viq", &eval_solution<QuantileSolution, ViqPolicy>, py::arg("model"),
          py::arg("solution"), py::arg("s0"), py::arg("alpha"), py::arg("use_heuristic") = true);

    m.def("mc_evaluate_vili", &mc_solution<AugmentedSolution, ViliPolicy>, py::arg("model"),
          py::arg("solution"), py::arg("s0"), py::arg("alpha"), py::arg("samples") = 100000,
          py::arg("seed") = 0);
    m.def("mc_evaluate_viq", &mc_solution<QuantileSolution, ViqPolicy>, py::arg("model"),
          py::arg("solution"), py::arg("s0"), py::arg("alpha"), py::arg("samples") = 100000,
          py::arg("seed") = 0);
    m.def("mc_evaluate",
          [](const SspMdp& model, const StationaryPolicy& policy, StateId s0, double alpha, long samples,
             uint64_t seed) {
              McConfig config;
              config.samples = samples;
              config.seed = seed;
              McRun run = simulate_policy(model, policy, s0, config);
              return mc_cvar_estimate(run.empirical, alpha);
          },
          py::arg("model"), py::arg("policy"), py::arg("s0"), py::arg("alpha"),
          py::arg("samples") = 100000, py::arg("seed") = 0);

    py::class_<GridworldSpec>(m, "GridworldSpec")
        .def(py::init<>())
        .def_readwrite("rows", &GridworldSpec::rows)
        .def_readwrite("cols", &GridworldSpec::cols)
        .def_readwrite("obstacles", &GridworldSpec::obstacles)
        .def_readwrite("success_prob", &GridworldSpec::success_prob)
        .def_readwrite("obstacle_penalty", &GridworldSpec::obstacle_penalty)
        .def_readwrite("step_cost", &GridworldSpec::step_cost)
        .def_readwrite("seed", &GridworldSpec::seed)
        .def_readwrite("obstacle_count", &GridworldSpec::obstacle_count)
        .def_readwrite("gamma", &GridworldSpec::gamma);

    py::class_<RiverSpec>(m, "RiverSpec")
        .def(py::init<>())
        .def_readwrite("rows", &RiverSpec::rows)
        .def_readwrite("cols", &RiverSpec::cols)
        .def_readwrite("move_prob", &RiverSpec::move_prob)
        .def_readwrite("fall_prob", &RiverSpec::fall_prob)
        .def_readwrite("gamma", &RiverSpec::gamma);

    m.def("make_gridworld", &make_gridworld, py::arg("spec"));
    m.def("gridworld_start", &gridworld_start, py::arg("spec"));
    m.def("gridworld_goal", &gridworld_goal, py::arg("spec"));
    m.def("toward_goal_policy", &toward_goal_policy, py::arg("spec"));
    m.def("make_river", &make_river, py::arg("spec"));
    m.def("river_start", &river_start, py::arg("spec"));
    m.def("river_goal", &river_goal, py::arg("spec"));

    m.def("load_model", &load_model_json, py::arg("path"));
    m.def("save_model", &save_model_json, py::arg("model"), py::arg("path"));
    m.def("save_solution_vili",
          [](const AugmentedSolution& s, const std::string& path) { save_solution_json(s, path); });
    m.def("save_solution_viq",
          [](const QuantileSolution& s, const std::string& path) { save_solution_json(s, path); });
}
