#include "cvarlab/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cvarlab {

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return j;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << j.dump(1) << "\n";
}

double number_or_string(const json& v, const std::string& what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            size_t used = 0;
            double d = std::stod(v.get<std::string>(), &used);
            if (used == v.get<std::string>().size()) return d;
        } catch (...) {
        }
    }
    throw ValidationError(what + ": expected a number or decimal string");
}

} // namespace

SspMdp parse_model_json(const std::string& path) {
    json j = read_json_file(path);
    try {
        int states = j.at("states").get<int>();
        int actions = j.at("actions").get<int>();
        double gamma = j.contains("gamma") ? number_or_string(j["gamma"], "gamma") : 1.0;
        SspMdp model(states, actions, gamma);
        for (const auto& g : j.at("goals")) model.set_goal(g.get<StateId>());

        // costs first so transitions can overwrite/merge in either order
        std::vector<std::vector<double>> cost(static_cast<size_t>(states),
                                              std::vector<double>(static_cast<size_t>(actions), 0.0));
        std::vector<std::vector<bool>> has_cost(static_cast<size_t>(states),
                                                std::vector<bool>(static_cast<size_t>(actions), false));
        if (j.contains("costs")) {
            for (const auto& e : j["costs"]) {
                int s = e.at("s").get<int>();
                int a = e.at("a").get<int>();
                cost.at(static_cast<size_t>(s)).at(static_cast<size_t>(a)) = number_or_string(e.at("c"), "cost");
                has_cost.at(static_cast<size_t>(s)).at(static_cast<size_t>(a)) = true;
            }
        }
        for (const auto& e : j.at("transitions")) {
            int s = e.at("s").get<int>();
            int a = e.at("a").get<int>();
            std::vector<Transition> next;
            for (const auto& pair : e.at("next")) {
                StateId sp = pair.at(0).get<StateId>();
                double p = number_or_string(pair.at(1), "probability");
                next.push_back({sp, p});
            }
            double c = 0.0;
            if (s >= 0 && s < states && a >= 0 && a < actions && has_cost[static_cast<size_t>(s)][static_cast<size_t>(a)])
                c = cost[static_cast<size_t>(s)][static_cast<size_t>(a)];
            model.set_action(s, a, c, std::move(next));
        }
        if (j.contains("state_names")) model.state_names = j["state_names"].get<std::vector<std::string>>();
        if (j.contains("action_names")) model.action_names = j["action_names"].get<std::vector<std::string>>();
        return model;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

SspMdp load_model_json(const std::string& path) {
    SspMdp model = parse_model_json(path);
    model.renormalize();
    auto violations = validate_ssp(model);
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << path << ": " << violations.size() << " validation violation(s):";
        for (const auto& v : violations)
            msg << "\n  (s=" << v.state << ", a=" << v.action << ") " << v.message;
        throw ValidationError(msg.str());
    }
    return model;
}

void save_model_json(const SspMdp& model, const std::string& path) {
    json j;
    j["states"] = model.state_count();
    j["actions"] = model.action_count();
    j["gamma"] = model.gamma();
    j["goals"] = model.goals();
    json transitions = json::array();
    json costs = json::array();
    for (StateId s = 0; s < model.state_count(); ++s) {
        for (ActionId a : model.actions_at(s)) {
            json next = json::array();
            for (const auto& t : model.successors(s, a)) next.push_back({t.next, t.prob});
            transitions.push_back({{"s", s}, {"a", a}, {"next", next}});
            costs.push_back({{"s", s}, {"a", a}, {"c", model.cost(s, a)}});
        }
    }
    j["transitions"] = std::move(transitions);
    j["costs"] = std::move(costs);
    if (!model.state_names.empty()) j["state_names"] = model.state_names;
    if (!model.action_names.empty()) j["action_names"] = model.action_names;
    write_json_file(j, path);
}

namespace {

json grid_to_json(const AtomGrid& grid) { return json(grid.atoms); }

AtomGrid grid_from_json(const json& j) {
    std::vector<double> atoms;
    for (const auto& v : j) atoms.push_back(v.get<double>());
    return AtomGrid::from_atoms(std::move(atoms));
}

} // namespace

void save_solution_json(const AugmentedSolution& solution, const std::string& path) {
    json j;
    j["solver"] = "vili";
    j["grid"] = grid_to_json(solution.grid);
    j["value"] = solution.value;
    j["policy"] = solution.policy;
    json xi = json::array();
    for (size_t s = 0; s < solution.xi.size(); ++s)
        for (size_t k = 0; k < solution.xi[s].size(); ++k)
            for (size_t pos = 0; pos < solution.xi[s][k].size(); ++pos)
                xi.push_back({s, k, pos, solution.xi[s][k][pos]});
    j["xi"] = std::move(xi);
    j["iterations"] = solution.iterations;
    j["residual"] = solution.residual;
    write_json_file(j, path);
}

void save_solution_json(const QuantileSolution& solution, const std::string& path) {
    json j;
    j["solver"] = "viq";
    j["grid"] = grid_to_json(solution.grid);
    j["value"] = solution.value;
    j["policy"] = solution.policy;
    j["var"] = solution.var;
    j["iterations"] = solution.iterations;
    j["residual"] = solution.residual;
    write_json_file(j, path);
}

LoadedSolution load_solution_json(const std::string& path) {
    json j = read_json_file(path);
    LoadedSolution out;
    try {
        out.solver = j.at("solver").get<std::string>();
        AtomGrid grid = grid_from_json(j.at("grid"));
        auto value = j.at("value").get<std::vector<std::vector<double>>>();
        auto policy = j.at("policy").get<std::vector<std::vector<ActionId>>>();
        if (out.solver == "vili") {
            AugmentedSolution sol;
            sol.grid = grid;
            sol.value = std::move(value);
            sol.policy = std::move(policy);
            sol.xi.assign(sol.value.size(),
                          std::vector<std::vector<double>>(static_cast<size_t>(grid.size())));
            for (const auto& e : j.at("xi")) {
                size_t s = e.at(0).get<size_t>();
                size_t k = e.at(1).get<size_t>();
                size_t pos = e.at(2).get<size_t>();
                auto& row = sol.xi.at(s).at(k);
                if (row.size() <= pos) row.resize(pos + 1, 0.0);
                row[pos] = e.at(3).get<double>();
            }
            if (j.contains("iterations")) sol.iterations = j["iterations"].get<long>();
            if (j.contains("residual")) sol.residual = j["residual"].get<double>();
            out.vili = std::move(sol);
        } else if (out.solver == "viq") {
            QuantileSolution sol;
            sol.grid = grid;
            sol.value = std::move(value);
            sol.policy = std::move(policy);
            sol.var = j.at("var").get<std::vector<std::vector<double>>>();
            if (j.contains("iterations")) sol.iterations = j["iterations"].get<long>();
            if (j.contains("residual")) sol.residual = j["residual"].get<double>();
            out.viq = std::move(sol);
        } else {
            throw ValidationError(path + ": unknown solver '" + out.solver + "'");
        }
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return out;
}

void save_eval_json(const EvalResult& result, const std::string& path) {
    json j;
    j["cvar"] = result.cvar;
    j["var"] = result.var;
    j["mean"] = result.mean;
    json trace = json::array();
    for (const auto& t : result.trace) trace.push_back({t.cost, t.y, t.value});
    j["trace"] = std::move(trace);
    write_json_file(j, path);
}

DomainSpec load_domain_spec_json(const std::string& path) {
    json j = read_json_file(path);
    try {
        std::string domain = j.at("domain").get<std::string>();
        if (domain == "gridworld") {
            GridworldSpec spec;
            if (j.contains("rows")) spec.rows = j["rows"].get<int>();
            if (j.contains("cols")) spec.cols = j["cols"].get<int>();
            if (j.contains("obstacles"))
                for (const auto& cell : j["obstacles"])
                    spec.obstacles.emplace_back(cell.at(0).get<int>(), cell.at(1).get<int>());
            if (j.contains("successProb")) spec.success_prob = number_or_string(j["successProb"], "successProb");
            if (j.contains("obstaclePenalty"))
                spec.obstacle_penalty = number_or_string(j["obstaclePenalty"], "obstaclePenalty");
            if (j.contains("stepCost")) spec.step_cost = number_or_string(j["stepCost"], "stepCost");
            if (j.contains("seed")) spec.seed = j["seed"].get<uint64_t>();
            if (j.contains("obstacleCount")) spec.obstacle_count = j["obstacleCount"].get<int>();
            if (j.contains("start")) spec.start = {j["start"].at(0).get<int>(), j["start"].at(1).get<int>()};
            if (j.contains("goal")) spec.goal = {j["goal"].at(0).get<int>(), j["goal"].at(1).get<int>()};
            if (j.contains("gamma")) spec.gamma = number_or_string(j["gamma"], "gamma");
            return spec;
        }
        if (domain == "river") {
            RiverSpec spec;
            if (j.contains("rows")) spec.rows = j["rows"].get<int>();
            if (j.contains("cols")) spec.cols = j["cols"].get<int>();
            if (j.contains("moveProb")) spec.move_prob = number_or_string(j["moveProb"], "moveProb");
            if (j.contains("fallProb")) spec.fall_prob = number_or_string(j["fallProb"], "fallProb");
            if (j.contains("costNorth")) spec.cost_north = number_or_string(j["costNorth"], "costNorth");
            if (j.contains("costEastWest"))
                spec.cost_east_west = number_or_string(j["costEastWest"], "costEastWest");
            if (j.contains("costSouth")) spec.cost_south = number_or_string(j["costSouth"], "costSouth");
            if (j.contains("costDeterministic"))
                spec.cost_deterministic = number_or_string(j["costDeterministic"], "costDeterministic");
            if (j.contains("gamma")) spec.gamma = number_or_string(j["gamma"], "gamma");
            return spec;
        }
        throw ValidationError(path + ": unknown domain '" + domain + "'");
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

} // namespace cvarlab
