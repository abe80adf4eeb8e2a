#include "cvarlab/atoms.hpp"

#include <cmath>

namespace cvarlab {

AtomGrid AtomGrid::log_spaced(double alpha0, int n) {
    if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw ValidationError("AtomGrid: alpha0 must lie in (0,1)");
    if (n < 2) throw ValidationError("AtomGrid: need at least 2 atoms");
    AtomGrid g;
    g.atoms.resize(static_cast<size_t>(n));
    const double la = std::log(alpha0);
    for (int k = 0; k < n; ++k)
        g.atoms[static_cast<size_t>(k)] = std::exp(la * (1.0 - static_cast<double>(k) / (n - 1)));
    g.atoms.front() = alpha0;
    g.atoms.back() = 1.0;
    return g;
}

AtomGrid AtomGrid::from_atoms(std::vector<double> atoms) {
    if (atoms.size() < 2) throw ValidationError("AtomGrid: need at least 2 atoms");
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (!(atoms[i] > 0.0 && atoms[i] <= 1.0))
            throw ValidationError("AtomGrid: atom outside (0,1]");
        if (i > 0 && atoms[i] <= atoms[i - 1])
            throw ValidationError("AtomGrid: atoms not strictly ascending");
    }
    if (atoms.back() != 1.0) throw ValidationError("AtomGrid: last atom must be 1");
    AtomGrid g;
    g.atoms = std::move(atoms);
    return g;
}

bool AtomGrid::is_log_spaced(double tol) const {
    const int n = size();
    const double la = std::log(atoms.front());
    for (int k = 0; k < n; ++k) {
        double expect = std::exp(la * (1.0 - static_cast<double>(k) / (n - 1)));
        if (std::fabs(atoms[static_cast<size_t>(k)] - expect) > tol * std::max(1.0, expect)) return false;
    }
    return true;
}

std::optional<int> AtomGrid::index_of(double y, double tol) const {
    for (int k = 0; k < size(); ++k)
        if (std::fabs(atoms[static_cast<size_t>(k)] - y) <= tol) return k;
    return std::nullopt;
}

int nearest_atom_log(const AtomGrid& grid, double alpha_next) {
    if (!(alpha_next > 0.0))
        throw DegenerateAlpha("nearest_atom_log: alpha_next must be positive");
    const double target = std::log(alpha_next);
    int best = 0;
    double best_dist = std::fabs(std::log(grid.atoms.front()) - target);
    for (int k = 1; k < grid.size(); ++k) {
        double d = std::fabs(std::log(grid.atoms[static_cast<size_t>(k)]) - target);
        if (d < best_dist) { // strict: ties keep the smaller atom
            best_dist = d;
            best = k;
        }
    }
    return best;
}

} // namespace cvarlab
