#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cvarlab/experiment.hpp"
#include "cvarlab/parallel.hpp"

using namespace cvarlab;

namespace {

// Exit codes: 0 ok, 2 validation, 3 convergence, 4 improper policy.
int run_guarded(const std::function<void()>& fn) {
    try {
        fn();
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidSpec& e) {
        std::cerr << "invalid spec: " << e.what() << "\n";
        return 2;
    } catch (const NonConvergence& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 3;
    } catch (const ImproperPolicy& e) {
        std::cerr << "improper policy: " << e.what() << "\n";
        return 4;
    } catch (const NoProperPolicy& e) {
        std::cerr << "no proper policy: " << e.what() << "\n";
        return 4;
    } catch (const ImproperExtendedPolicy& e) {
        std::cerr << "improper extended policy: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

struct CommonModelFlags {
    ModelSource source;
    void attach(CLI::App* app) {
        app->add_option("--model", source.model_path, "JSON model file");
        app->add_option("--spec", source.spec_path, "JSON domain spec file");
        app->add_option("--domain", source.domain, "gridworld or river")
            ->check(CLI::IsMember({"gridworld", "river"}));
        app->add_option("--rows", source.rows, "domain rows");
        app->add_option("--cols", source.cols, "domain cols");
        app->add_option("--seed", source.seed, "seed for generated layouts");
        app->add_option("--obstacles", source.obstacle_count, "gridworld obstacle count");
    }
};

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw ValidationError("cannot write " + path);
    return file;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CVaR-sensitive stochastic shortest path lab: solve with the interpolation or "
                 "quantile value iteration, evaluate policies exactly with the forward expander, "
                 "or approximately with Monte Carlo"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate a domain model and dump it as JSON");
    CommonModelFlags gen_flags;
    gen_flags.attach(gen);
    std::string gen_out;
    gen->add_option("--out", gen_out, "output model path (default stdout)");
    gen->callback([&]() {
        ModelBundle bundle = build_model(gen_flags.source);
        if (gen_out.empty()) gen_out = "model.json";
        save_model_json(bundle.model, gen_out);
        std::cout << "model: " << gen_out << " states=" << bundle.model.state_count()
                  << " start=" << bundle.start << "\n";
    });

    // ---- validate ----
    auto* validate = app.add_subcommand("validate", "validate a model file and report violations");
    std::string validate_model;
    validate->add_option("--model", validate_model, "JSON model file")->required();
    validate->callback([&]() {
        SspMdp model = parse_model_json(validate_model);
        model.renormalize();
        auto violations = validate_ssp(model);
        if (violations.empty()) {
            std::cout << "ok: " << validate_model << "\n";
            return;
        }
        for (const auto& v : violations)
            std::cout << "violation (s=" << v.state << ", a=" << v.action << "): " << v.message << "\n";
        throw ValidationError(std::to_string(violations.size()) + " violation(s) in " + validate_model);
    });

    // ---- solve ----
    auto* solve = app.add_subcommand("solve", "run a CVaR value iteration and write the solution");
    CommonModelFlags solve_flags;
    solve_flags.attach(solve);
    SolveRequest solve_request;
    std::string solve_out = "solution.json";
    solve->add_option("--solver", solve_request.solver, "vili or viq")
        ->check(CLI::IsMember({"vili", "viq"}));
    solve->add_option("--atoms", solve_request.atoms, "number of confidence atoms");
    solve->add_option("--alpha0", solve_request.alpha0, "smallest confidence atom");
    solve->add_option("--epsilon", solve_request.epsilon, "residual stop");
    solve->add_option("--max-iterations", solve_request.max_iterations, "iteration budget");
    solve->add_option("--out", solve_out, "solution output path");
    solve->add_flag("--verbose", solve_request.verbose, "log residual per iteration");
    solve->callback([&]() {
        ModelBundle bundle = build_model(solve_flags.source);
        SolveArtifacts art = solve_model(bundle.model, solve_request);
        if (art.solution.vili) save_solution_json(*art.solution.vili, solve_out);
        else save_solution_json(*art.solution.viq, solve_out);
        std::cout << "solver=" << solve_request.solver << " iterations=" << art.iterations
                  << " solve_ms=" << format_double(art.solve_ms) << " out=" << solve_out << "\n";
    });

    // ---- evaluate ----
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a solved policy at target alphas");
    CommonModelFlags eval_flags;
    eval_flags.attach(evaluate);
    std::string eval_solution;
    EvaluateRequest eval_request;
    std::string eval_out;
    bool eval_timing = false;
    long eval_s0 = -1;
    evaluate->add_option("--solution", eval_solution, "solution file from solve")->required();
    evaluate->add_option("--s0", eval_s0, "initial state (default: domain start)");
    evaluate->add_option("--alpha", eval_request.alphas, "target alphas (repeatable)")->required();
    evaluate->add_option("--evaluator", eval_request.evaluator, "forpecvar or mc")
        ->check(CLI::IsMember({"forpecvar", "mc"}));
    evaluate->add_option("--samples", eval_request.samples, "MC sample count");
    evaluate->add_option("--mc-seed", eval_request.seed, "MC seed");
    evaluate->add_option("--time-budget", eval_request.time_budget_seconds, "MC wall-clock budget (s)");
    evaluate->add_option("--out", eval_out, "CSV output path (default stdout)");
    evaluate->add_option("--eval-json", eval_request.eval_json_path,
                         "also write the exact cvar/var/trace records as JSON");
    evaluate->add_option("--mc-histogram", eval_request.mc_histogram_path,
                         "also write the MC sample histograms as JSON");
    evaluate->add_flag("--timing", eval_timing, "emit solve/eval milliseconds (not byte-stable)");
    evaluate->callback([&]() {
        ModelBundle bundle = build_model(eval_flags.source);
        LoadedSolution solution = load_solution_json(eval_solution);
        eval_request.s0 = eval_s0 >= 0 ? static_cast<StateId>(eval_s0) : bundle.start;
        auto rows = evaluate_solution(bundle.model, solution, eval_request);

        SolveRequest describe;
        describe.solver = solution.solver;
        describe.atoms = solution.grid().size();
        describe.alpha0 = solution.grid().alpha0();
        std::ofstream file;
        std::ostream& out = open_out(eval_out, file);
        CsvContext ctx{bundle.domain_name, bundle.rows, bundle.cols, eval_timing, false};
        write_csv_header(out, ctx);
        for (const auto& row : rows) write_csv_row(out, ctx, describe, eval_request.s0, row, 0.0);
    });

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "solve/evaluate over a grid of (atoms, alpha0)");
    CommonModelFlags sweep_flags;
    sweep_flags.attach(sweep);
    SweepRequest sweep_request;
    std::string sweep_out;
    bool sweep_timing = false;
    long sweep_s0 = -1;
    sweep->add_option("--atoms", sweep_request.atoms_list, "atom counts (repeatable)")->required();
    sweep->add_option("--alpha0", sweep_request.alpha0_list, "alpha0 values (repeatable)")->required();
    sweep->add_option("--solver", sweep_request.solver, "vili or viq")
        ->check(CLI::IsMember({"vili", "viq"}));
    sweep->add_option("--epsilon", sweep_request.epsilon, "residual stop");
    sweep->add_option("--s0", sweep_s0, "initial state (default: domain start)");
    sweep->add_option("--evaluator", sweep_request.evaluator, "forpecvar or mc")
        ->check(CLI::IsMember({"forpecvar", "mc"}));
    sweep->add_option("--samples", sweep_request.samples, "MC sample count");
    sweep->add_option("--mc-seed", sweep_request.seed, "MC seed");
    sweep->add_option("--threads", sweep_request.threads, "worker cap (also CVARLAB_THREADS)");
    sweep->add_option("--out", sweep_out, "CSV output path (default stdout)");
    sweep->add_flag("--timing", sweep_timing, "emit solve/eval milliseconds (not byte-stable)");
    sweep->callback([&]() {
        ModelBundle bundle = build_model(sweep_flags.source);
        sweep_request.s0 = sweep_s0 >= 0 ? static_cast<StateId>(sweep_s0) : bundle.start;
        std::ofstream file;
        std::ostream& out = open_out(sweep_out, file);
        run_sweep(bundle, sweep_request, sweep_timing, out);
    });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (...) {
        return run_guarded([] { throw; });
    }
}
