#pragma once

#include <optional>
#include <vector>

#include "cvarlab/errors.hpp"

namespace cvarlab {

/// Confidence-level discretization Y, strictly ascending in (0,1] with the
/// last atom equal to 1. log_spaced() builds the usual grid
/// atoms[k] = alpha0^(1 - k/(N-1)); arbitrary ascending grids are accepted
/// through from_atoms() for tests and custom runs.
struct AtomGrid {
    std::vector<double> atoms;

    static AtomGrid log_spaced(double alpha0, int n);
    static AtomGrid from_atoms(std::vector<double> atoms);

    int size() const { return static_cast<int>(atoms.size()); }
    double alpha0() const { return atoms.front(); }
    bool is_log_spaced(double tol = 1e-9) const;

    /// Index of an atom equal to y within tol, if any.
    std::optional<int> index_of(double y, double tol = 1e-9) const;
};

/// Index of the atom minimizing |log y - log alpha_next|; exact ties go to
/// the smaller atom. Values above 1 snap to the last atom. Throws
/// DegenerateAlpha for alpha_next <= 0 (callers handle xi = 0 branches first).
int nearest_atom_log(const AtomGrid& grid, double alpha_next);

} // namespace cvarlab
