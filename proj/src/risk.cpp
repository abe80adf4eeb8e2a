#include "cvarlab/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cvarlab {

namespace {
constexpr double kMassTol = 1e-9;
constexpr double kCdfTol = 1e-12;
} // namespace

DiscreteDistribution DiscreteDistribution::from_weighted(std::vector<std::pair<double, double>> weighted,
                                                         double merge_tol) {
    std::sort(weighted.begin(), weighted.end());
    DiscreteDistribution d;
    double total = 0.0;
    for (const auto& [value, mass] : weighted) {
        if (mass <= 0.0) continue;
        total += mass;
        if (!d.support.empty() && value - d.support.back() <= merge_tol) {
            d.probs.back() += mass;
        } else {
            d.support.push_back(value);
            d.probs.push_back(mass);
        }
    }
    if (total <= 0.0) throw ValidationError("from_weighted: no positive mass");
    for (auto& p : d.probs) p /= total;
    return d;
}

void validate_distribution(const DiscreteDistribution& dist) {
    if (dist.support.empty() || dist.support.size() != dist.probs.size())
        throw ValidationError("distribution: support/probs size mismatch or empty");
    double mass = 0.0;
    for (size_t i = 0; i < dist.support.size(); ++i) {
        if (dist.probs[i] <= 0.0) throw ValidationError("distribution: nonpositive probability");
        if (i > 0 && dist.support[i] <= dist.support[i - 1])
            throw ValidationError("distribution: support not strictly ascending");
        mass += dist.probs[i];
    }
    if (std::fabs(mass - 1.0) > kMassTol)
        throw ValidationError("distribution: probability mass " + std::to_string(mass));
}

double mean(const DiscreteDistribution& dist) {
    double m = 0.0;
    for (size_t i = 0; i < dist.support.size(); ++i) m += dist.support[i] * dist.probs[i];
    return m;
}

double var(const DiscreteDistribution& dist, double alpha) {
    validate_distribution(dist);
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("var: alpha must lie in (0,1]");
    const double target = 1.0 - alpha;
    double cum = 0.0;
    for (size_t i = 0; i < dist.support.size(); ++i) {
        cum += dist.probs[i];
        if (cum >= target - kCdfTol) return dist.support[i];
    }
    return dist.support.back();
}

double cvar(const DiscreteDistribution& dist, double alpha) {
    validate_distribution(dist);
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("cvar: alpha must lie in (0,1]");
    if (alpha == 1.0) return mean(dist);
    const double w = var(dist, alpha);
    double excess = 0.0;
    for (size_t i = 0; i < dist.support.size(); ++i)
        if (dist.support[i] > w) excess += (dist.support[i] - w) * dist.probs[i];
    return w + excess / alpha;
}

PwlYcvar ycvar_from_dist(const DiscreteDistribution& dist, std::span<const double> atoms) {
    PwlYcvar f;
    f.atoms.assign(atoms.begin(), atoms.end());
    f.yv.reserve(atoms.size());
    for (double y : atoms) {
        if (!(y > 0.0 && y <= 1.0)) throw ValidationError("ycvar_from_dist: atom outside (0,1]");
        f.yv.push_back(y * cvar(dist, y));
    }
    return f;
}

namespace {

void check_pwl(const PwlYcvar& f) {
    if (f.atoms.empty() || f.atoms.size() != f.yv.size())
        throw ValidationError("PwlYcvar: atoms/yv size mismatch or empty");
    for (size_t i = 0; i < f.atoms.size(); ++i) {
        if (!(f.atoms[i] > 0.0 && f.atoms[i] <= 1.0))
            throw ValidationError("PwlYcvar: atom outside (0,1]");
        if (i > 0 && f.atoms[i] <= f.atoms[i - 1])
            throw ValidationError("PwlYcvar: atoms not strictly ascending");
    }
}

// Slope of the implicit (0, atoms[0]] head segment.
double head_slope(const PwlYcvar& f, TailRule rule) {
    const double chord = f.yv.front() / f.atoms.front();
    if (f.atoms.size() == 1 || rule == TailRule::AnchorOrigin) return chord;
    return (f.yv[1] - f.yv[0]) / (f.atoms[1] - f.atoms[0]);
}

} // namespace

std::vector<QuantileStep> quantile_steps(const PwlYcvar& f, TailRule head) {
    check_pwl(f);
    if (head == TailRule::Clamp)
        throw ValidationError("quantile_steps: no quantile is defined below the first atom under Clamp");

    std::vector<QuantileStep> steps;
    steps.reserve(f.atoms.size());
    steps.push_back({0.0, f.atoms.front(), head_slope(f, head)});
    for (size_t i = 0; i + 1 < f.atoms.size(); ++i) {
        double s = (f.yv[i + 1] - f.yv[i]) / (f.atoms[i + 1] - f.atoms[i]);
        if (s > steps.back().value + 1e-9)
            throw ConcavityViolation("quantile_steps: slope rises from " +
                                     std::to_string(steps.back().value) + " to " + std::to_string(s));
        steps.push_back({f.atoms[i], f.atoms[i + 1], s});
    }
    return steps;
}

double ConcaveGain::value_at(double u) const {
    double v = base;
    double pos = u0;
    for (size_t i = 0; i < len.size(); ++i) {
        double take = std::min(len[i], std::max(0.0, u - pos));
        v += slope[i] * take;
        pos += len[i];
    }
    return v;
}

ConcaveGain gain_from_ycvar(const PwlYcvar& f, TailRule rule) {
    check_pwl(f);
    ConcaveGain g;
    if (rule == TailRule::Clamp) {
        g.u0 = f.atoms.front();
        g.base = f.yv.front();
    } else {
        double h = head_slope(f, rule);
        g.u0 = 0.0;
        g.base = f.yv.front() - h * f.atoms.front(); // 0 under AnchorOrigin
        g.len.push_back(f.atoms.front());
        g.slope.push_back(h);
    }
    for (size_t i = 0; i + 1 < f.atoms.size(); ++i) {
        g.len.push_back(f.atoms[i + 1] - f.atoms[i]);
        g.slope.push_back((f.yv[i + 1] - f.yv[i]) / (f.atoms[i + 1] - f.atoms[i]));
    }
    return g;
}

EnvelopeResult maximize_risk_envelope(double y, std::span<const double> probs,
                                      std::span<const ConcaveGain* const> gains) {
    if (!(y > 0.0 && y <= 1.0)) throw ValidationError("maximize_risk_envelope: y must lie in (0,1]");
    if (probs.size() != gains.size() || probs.empty())
        throw ValidationError("maximize_risk_envelope: probs/gains size mismatch");

    const size_t n = probs.size();
    // Budget in u-space (u_j = y*xi_j): sum_j p_j*u_j = y, with each u_j
    // forced to at least its gain's u0.
    double budget = y;
    double base_value = 0.0;
    for (size_t j = 0; j < n; ++j) {
        budget -= probs[j] * gains[j]->u0;
        base_value += probs[j] * gains[j]->base;
    }
    if (budget < -1e-12)
        throw ValidationError("maximize_risk_envelope: y below the clamped floor");
    budget = std::max(budget, 0.0);

    struct Seg {
        double slope;
        uint32_t succ;
        uint32_t idx;
        double len;
    };
    std::vector<Seg> segs;
    for (size_t j = 0; j < n; ++j) {
        const auto& g = *gains[j];
        for (size_t k = 0; k < g.len.size(); ++k)
            segs.push_back({g.slope[k], static_cast<uint32_t>(j), static_cast<uint32_t>(k), g.len[k]});
    }
    std::sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) {
        if (a.slope != b.slope) return a.slope > b.slope;
        if (a.succ != b.succ) return a.succ < b.succ;
        return a.idx < b.idx;
    });

    std::vector<double> u(n);
    for (size_t j = 0; j < n; ++j) u[j] = gains[j]->u0;
    double value = base_value;
    double remaining = budget;
    for (const auto& seg : segs) {
        if (remaining <= 0.0) break;
        double p = probs[seg.succ];
        double take = std::min(seg.len, remaining / p);
        u[seg.succ] += take;
        value += p * seg.slope * take;
        remaining -= p * take;
    }

    EnvelopeResult out;
    out.value = value / y;
    out.xi.resize(n);
    for (size_t j = 0; j < n; ++j) out.xi[j] = u[j] / y;
    return out;
}

EnvelopeResult maximize_risk_envelope(double y, std::span<const double> probs,
                                      std::span<const PwlYcvar> fns, TailRule rule) {
    std::vector<ConcaveGain> gains;
    gains.reserve(fns.size());
    for (const auto& f : fns) gains.push_back(gain_from_ycvar(f, rule));
    std::vector<const ConcaveGain*> ptrs;
    ptrs.reserve(gains.size());
    for (const auto& g : gains) ptrs.push_back(&g);
    return maximize_risk_envelope(y, probs, std::span<const ConcaveGain* const>(ptrs.data(), ptrs.size()));
}

} // namespace cvarlab
