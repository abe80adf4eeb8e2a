#include <doctest.h>

#include <sstream>

#include "cvarlab/experiment.hpp"
#include "models.hpp"

using namespace cvarlab;
using namespace testmodels;

TEST_CASE("evaluate_solution pairs the table read with the exact evaluator") {
    auto two = two_trajectory();
    // solve directly on the custom grid the pinned values use
    SolveOptions options;
    options.epsilon = 1e-10;
    auto grid = AtomGrid::from_atoms({0.1, 0.2, 1.0});
    LoadedSolution solution;
    solution.solver = "viq";
    solution.viq = run_viq(two, grid, options);

    EvaluateRequest ev;
    ev.s0 = 0;
    ev.alphas = {0.2, 1.0};
    auto rows = evaluate_solution(two, solution, ev);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].approx == doctest::Approx(50.5).epsilon(1e-6));
    CHECK(rows[0].exact_cvar == doctest::Approx(50.5).epsilon(1e-9));
    CHECK(rows[0].exact_var == doctest::Approx(1.0));
    CHECK(rows[1].approx == doctest::Approx(10.9).epsilon(1e-6));
    CHECK(rows[1].exact_cvar == doctest::Approx(10.9).epsilon(1e-6));

    EvaluateRequest below;
    below.s0 = 0;
    below.alphas = {0.05}; // under alpha0 = 0.1
    CHECK_THROWS_WITH_AS(evaluate_solution(two, solution, below), "target alpha below alpha0",
                         ValidationError);
}

TEST_CASE("solve_model dispatches on the solver name") {
    auto two = two_trajectory();
    SolveRequest req;
    req.solver = "vili";
    req.atoms = 3;
    req.alpha0 = 0.1;
    req.epsilon = 1e-8;
    auto art = solve_model(two, req);
    REQUIRE(art.solution.vili.has_value());
    CHECK(art.iterations > 0);

    req.solver = "nope";
    CHECK_THROWS_AS(solve_model(two, req), ValidationError);
}

TEST_CASE("build_model falls back through the source kinds") {
    ModelSource source;
    source.domain = "river";
    source.rows = 10;
    source.cols = 3;
    auto bundle = build_model(source);
    CHECK(bundle.model.state_count() == 30);
    CHECK(bundle.domain_name == "river");

    ModelSource empty;
    CHECK_THROWS_AS(build_model(empty), ValidationError);
}

TEST_CASE("csv rows are stable and timing columns stay blank by default") {
    CsvContext ctx{"river", 10, 3, false, false};
    SolveRequest req;
    std::ostringstream out;
    write_csv_header(out, ctx);
    EvalRow row{0.5, 1.25, 1.5, 1.0, 3.25};
    write_csv_row(out, ctx, req, 7, row, 12.5);
    CHECK(out.str() ==
          "domain,m,n,solver,N,alpha0,s0,alpha,approx,exact_cvar,exact_var,solve_ms,eval_ms\n"
          "river,10,3,viq,7,0.1,7,0.5,1.25,1.5,1,,\n");
}
