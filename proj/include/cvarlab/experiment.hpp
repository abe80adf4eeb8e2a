#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cvarlab/io.hpp"

namespace cvarlab {

struct ModelSource {
    std::string model_path; // JSON model file; takes precedence
    std::string spec_path;  // domain spec file
    std::string domain;     // "gridworld" | "river" built from the fields below
    int rows = 5;
    int cols = 5;
    uint64_t seed = 0;
    int obstacle_count = -1;
};

struct ModelBundle {
    SspMdp model;
    StateId start = 0;
    std::string domain_name; // "gridworld" | "river" | "model"
    int rows = 0;
    int cols = 0;
};

ModelBundle build_model(const ModelSource& source);

struct SolveRequest {
    std::string solver = "viq"; // "vili" | "viq"
    int atoms = 7;
    double alpha0 = 0.1;
    double epsilon = 1e-3;
    long max_iterations = 1'000'000;
    bool verbose = false; // per-iteration residual/timing log on stderr
};

struct SolveArtifacts {
    LoadedSolution solution;
    double solve_ms = 0.0;
    long iterations = 0;
};

SolveArtifacts solve_model(const SspMdp& model, const SolveRequest& request);

struct EvaluateRequest {
    StateId s0 = 0;
    std::vector<double> alphas;
    std::string evaluator = "forpecvar"; // "forpecvar" | "mc"
    long samples = 100'000;
    uint64_t seed = 0;
    std::optional<double> time_budget_seconds;
    /// forpecvar: write the EvalResult JSON (cvar/var/trace) per target here.
    std::string eval_json_path;
    /// mc: write the empirical histograms and estimates per target here.
    std::string mc_histogram_path;
};

struct EvalRow {
    double alpha = 0.0;
    double approx = 0.0;
    double exact_cvar = 0.0;
    double exact_var = 0.0;
    double eval_ms = 0.0;
};

/// approx is the solution table interpolated at alpha; exact comes from the
/// forward evaluator (or the MC estimator). Throws ValidationError for
/// targets below alpha0.
std::vector<EvalRow> evaluate_solution(const SspMdp& model, const LoadedSolution& solution,
                                       const EvaluateRequest& request);

/// Shortest decimal round-trip formatting, for byte-stable CSV output.
std::string format_double(double v);

struct CsvContext {
    std::string domain;
    int rows = 0;
    int cols = 0;
    bool timing = false;    // timing columns are blank unless enabled
    bool normalized = false; // sweep adds an approx/exact column
};

void write_csv_header(std::ostream& out, const CsvContext& ctx);
void write_csv_row(std::ostream& out, const CsvContext& ctx, const SolveRequest& solve, StateId s0,
                   const EvalRow& row, double solve_ms);

struct SweepRequest {
    std::vector<int> atoms_list;
    std::vector<double> alpha0_list;
    std::string solver = "viq";
    double epsilon = 1e-3;
    StateId s0 = 0;
    std::string evaluator = "forpecvar";
    long samples = 100'000;
    uint64_t seed = 0;
    int threads = 0;
};

/// Cross product of (alpha0, atoms): solve, evaluate at every atom, one CSV
/// row per atom with the normalized approx/exact column. Combos run on a
/// worker pool; row order is deterministic.
void run_sweep(const ModelBundle& bundle, const SweepRequest& request, bool timing, std::ostream& out);

} // namespace cvarlab
