#include "cvarlab/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "cvarlab/mc.hpp"
#include "cvarlab/parallel.hpp"

namespace cvarlab {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

ModelBundle bundle_from_spec(const DomainSpec& spec) {
    if (const auto* g = std::get_if<GridworldSpec>(&spec)) {
        ModelBundle b{make_gridworld(*g), gridworld_start(*g), "gridworld", g->rows, g->cols};
        return b;
    }
    const auto& r = std::get<RiverSpec>(spec);
    return ModelBundle{make_river(r), river_start(r), "river", r.rows, r.cols};
}

} // namespace

ModelBundle build_model(const ModelSource& source) {
    if (!source.model_path.empty()) {
        ModelBundle b{load_model_json(source.model_path), 0, "model", 0, 0};
        return b;
    }
    if (!source.spec_path.empty()) return bundle_from_spec(load_domain_spec_json(source.spec_path));
    if (source.domain == "gridworld") {
        GridworldSpec spec;
        spec.rows = source.rows;
        spec.cols = source.cols;
        spec.seed = source.seed;
        spec.obstacle_count = source.obstacle_count;
        return bundle_from_spec(spec);
    }
    if (source.domain == "river") {
        RiverSpec spec;
        spec.rows = source.rows;
        spec.cols = source.cols;
        return bundle_from_spec(spec);
    }
    throw ValidationError("no model source: pass a model file, a spec file, or a domain name");
}

SolveArtifacts solve_model(const SspMdp& model, const SolveRequest& request) {
    AtomGrid grid = AtomGrid::log_spaced(request.alpha0, request.atoms);
    SolveOptions options;
    options.epsilon = request.epsilon;
    options.max_iterations = request.max_iterations;
    options.log_progress = request.verbose;

    SolveArtifacts out;
    auto t0 = std::chrono::steady_clock::now();
    if (request.solver == "vili") {
        AugmentedSolution sol = run_vili(model, grid, options);
        out.iterations = sol.iterations;
        out.solution.solver = "vili";
        out.solution.vili = std::move(sol);
    } else if (request.solver == "viq") {
        QuantileSolution sol = run_viq(model, grid, options);
        out.iterations = sol.iterations;
        out.solution.solver = "viq";
        out.solution.viq = std::move(sol);
    } else {
        throw ValidationError("unknown solver '" + request.solver + "' (expected vili or viq)");
    }
    out.solve_ms = ms_since(t0);
    return out;
}

std::vector<EvalRow> evaluate_solution(const SspMdp& model, const LoadedSolution& solution,
                                       const EvaluateRequest& request) {
    const AtomGrid& grid = solution.grid();
    std::vector<EvalRow> rows;
    rows.reserve(request.alphas.size());
    nlohmann::json eval_json = nlohmann::json::array();
    nlohmann::json histograms = nlohmann::json::array();

    for (double alpha : request.alphas) {
        if (alpha < grid.alpha0() - 1e-12)
            throw ValidationError("target alpha below alpha0");
        if (!(alpha <= 1.0)) throw ValidationError("target alpha above 1");

        EvalRow row;
        row.alpha = alpha;
        const auto& value_row = solution.vili ? solution.vili->value[static_cast<size_t>(request.s0)]
                                              : solution.viq->value[static_cast<size_t>(request.s0)];
        row.approx = interpolate_ycvar(grid, value_row, alpha) / alpha;

        auto t0 = std::chrono::steady_clock::now();
        if (request.evaluator == "forpecvar") {
            EvalResult r;
            if (solution.vili) {
                ViliPolicy policy(*solution.vili);
                r = run_forpecvar(model, policy, request.s0, alpha);
            } else {
                ViqPolicy policy(model, *solution.viq);
                r = run_forpecvar(model, policy, request.s0, alpha);
            }
            row.exact_cvar = r.cvar;
            row.exact_var = r.var;
            if (!request.eval_json_path.empty()) {
                nlohmann::json trace = nlohmann::json::array();
                for (const auto& t : r.trace) trace.push_back({t.cost, t.y, t.value});
                eval_json.push_back({{"alpha", alpha},
                                     {"cvar", r.cvar},
                                     {"var", r.var},
                                     {"mean", r.mean},
                                     {"trace", std::move(trace)}});
            }
        } else if (request.evaluator == "mc") {
            McConfig config;
            config.samples = request.samples;
            config.seed = request.seed;
            config.time_budget_seconds = request.time_budget_seconds;
            McRun run;
            if (solution.vili) {
                ViliPolicy policy(*solution.vili);
                run = simulate_policy(model, policy, request.s0, alpha, config);
            } else {
                ViqPolicy policy(model, *solution.viq);
                run = simulate_policy(model, policy, request.s0, alpha, config);
            }
            auto [cv, va] = mc_cvar_estimate(run.empirical, alpha);
            row.exact_cvar = cv;
            row.exact_var = va;
            if (!request.mc_histogram_path.empty())
                histograms.push_back({{"alpha", alpha},
                                      {"support", run.empirical.support},
                                      {"probs", run.empirical.probs},
                                      {"completed", run.completed},
                                      {"failures", run.failures},
                                      {"cvar", cv},
                                      {"var", va}});
        } else {
            throw ValidationError("unknown evaluator '" + request.evaluator + "'");
        }
        row.eval_ms = ms_since(t0);
        rows.push_back(row);
    }

    auto dump = [](const nlohmann::json& j, const std::string& path) {
        std::ofstream out(path);
        if (!out) throw ValidationError("cannot write " + path);
        out << j.dump(1) << "\n";
    };
    if (!request.eval_json_path.empty() && request.evaluator == "forpecvar")
        dump(eval_json.size() == 1 ? eval_json[0] : eval_json, request.eval_json_path);
    if (!request.mc_histogram_path.empty() && request.evaluator == "mc")
        dump(histograms, request.mc_histogram_path);
    return rows;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_csv_header(std::ostream& out, const CsvContext& ctx) {
    out << "domain,m,n,solver,N,alpha0,s0,alpha,approx,exact_cvar,exact_var";
    if (ctx.normalized) out << ",normalized";
    out << ",solve_ms,eval_ms\n";
}

void write_csv_row(std::ostream& out, const CsvContext& ctx, const SolveRequest& solve, StateId s0,
                   const EvalRow& row, double solve_ms) {
    out << ctx.domain << ',' << ctx.rows << ',' << ctx.cols << ',' << solve.solver << ',' << solve.atoms
        << ',' << format_double(solve.alpha0) << ',' << s0 << ',' << format_double(row.alpha) << ','
        << format_double(row.approx) << ',' << format_double(row.exact_cvar) << ','
        << format_double(row.exact_var);
    if (ctx.normalized)
        out << ',' << format_double(row.exact_cvar != 0.0 ? row.approx / row.exact_cvar : 1.0);
    if (ctx.timing)
        out << ',' << format_double(solve_ms) << ',' << format_double(row.eval_ms) << '\n';
    else
        out << ",,\n";
}

void run_sweep(const ModelBundle& bundle, const SweepRequest& request, bool timing, std::ostream& out) {
    struct Combo {
        SolveRequest solve;
        std::vector<EvalRow> rows;
        double solve_ms = 0.0;
        std::string error;
    };
    std::vector<Combo> combos;
    for (double alpha0 : request.alpha0_list) {
        for (int atoms : request.atoms_list) {
            Combo c;
            c.solve = SolveRequest{request.solver, atoms, alpha0, request.epsilon, 1'000'000};
            combos.push_back(std::move(c));
        }
    }

    parallel_for(static_cast<long>(combos.size()), request.threads, [&](long i) {
        Combo& c = combos[static_cast<size_t>(i)];
        try {
            SolveArtifacts art = solve_model(bundle.model, c.solve);
            EvaluateRequest ev;
            ev.s0 = request.s0;
            ev.alphas = art.solution.grid().atoms;
            ev.evaluator = request.evaluator;
            ev.samples = request.samples;
            ev.seed = request.seed;
            c.rows = evaluate_solution(bundle.model, art.solution, ev);
            c.solve_ms = art.solve_ms;
        } catch (const std::exception& e) {
            c.error = e.what(); // partial results still flush below
        }
    });

    CsvContext ctx{bundle.domain_name, bundle.rows, bundle.cols, timing, true};
    write_csv_header(out, ctx);
    for (const auto& c : combos) {
        if (!c.error.empty()) {
            out << "# error N=" << c.solve.atoms << " alpha0=" << format_double(c.solve.alpha0) << ": "
                << c.error << "\n";
            continue;
        }
        for (const auto& row : c.rows) write_csv_row(out, ctx, c.solve, request.s0, row, c.solve_ms);
    }
}

} // namespace cvarlab
