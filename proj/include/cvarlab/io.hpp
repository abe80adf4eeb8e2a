#pragma once

#include <optional>
#include <string>
#include <variant>

#include "cvarlab/domains.hpp"
#include "cvarlab/forpecvar.hpp"
#include "cvarlab/ssp.hpp"
#include "cvarlab/vili.hpp"
#include "cvarlab/viq.hpp"

namespace cvarlab {

/// Parses the model file without running the validator. Probabilities and
/// costs may be numbers or decimal strings.
SspMdp parse_model_json(const std::string& path);

/// parse + renormalize borderline probability masses + validate; throws
/// ValidationError listing every violation.
SspMdp load_model_json(const std::string& path);

void save_model_json(const SspMdp& model, const std::string& path);

void save_solution_json(const AugmentedSolution& solution, const std::string& path);
void save_solution_json(const QuantileSolution& solution, const std::string& path);

struct LoadedSolution {
    std::string solver; // "vili" | "viq"
    std::optional<AugmentedSolution> vili;
    std::optional<QuantileSolution> viq;

    const AtomGrid& grid() const { return vili ? vili->grid : viq->grid; }
};

LoadedSolution load_solution_json(const std::string& path);

void save_eval_json(const EvalResult& result, const std::string& path);

using DomainSpec = std::variant<GridworldSpec, RiverSpec>;

/// Domain spec file: {"domain": "gridworld"|"river", ...fields...}.
DomainSpec load_domain_spec_json(const std::string& path);

} // namespace cvarlab
