#include "semiflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semiflow {

bool decreasing_with_one_blip(const std::vector<double>& errors, double blip) {
    int blips = 0;
    for (std::size_t i = 1; i < errors.size(); ++i) {
        if (errors[i] <= errors[i - 1]) continue;
        if (errors[i] > (1.0 + blip) * errors[i - 1]) return false;
        if (++blips > 1) return false;
    }
    return true;
}

double interior_collar_radius(const Grid& grid, double h_max, double sigma_max) {
    double spacing = 0.0, half = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid.dim(); ++a) {
        spacing = std::max(spacing, grid.spacing(a));
        half = std::min(half, grid.half_width(a));
    }
    return half - 2.0 * spacing - 8.0 * sigma_max * std::sqrt(std::max(0.0, h_max));
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::bounded: return "bounded";
        case Verdict::diverging: return "diverging";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Verdict classify_ratios(const std::vector<double>& ratios, std::vector<double>* growth) {
    std::vector<double> g;
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        const double a = ratios[i - 1], b = ratios[i];
        if (a == 0.0) {
            g.push_back(b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
        } else {
            g.push_back(b / a);
        }
    }
    if (growth) *growth = g;
    if (ratios.size() >= 4) {
        const bool grows = std::all_of(g.end() - 3, g.end(), [](double x) { return x >= 1.2; });
        if (grows) return Verdict::diverging;
    }
    if (ratios.size() >= 3) {
        const auto [lo, hi] = std::minmax_element(ratios.end() - 3, ratios.end());
        if (*hi <= 1.1 * *lo) return Verdict::bounded;
    }
    return Verdict::inconclusive;
}

Verdict joint_verdict(Verdict a, Verdict b) {
    if (a == Verdict::bounded && b == Verdict::bounded) return Verdict::bounded;
    if (a == Verdict::diverging || b == Verdict::diverging) return Verdict::diverging;
    return Verdict::inconclusive;
}

std::uint64_t audit_sample_seed(std::uint64_t seed, std::size_t index) {
    // splitmix64 of (seed, index) so neighbouring seeds give unrelated streams
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (std::uint64_t(index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

GridFunction sample_audit_state(const GridFunction& prototype, double radius,
                                const std::function<double(const GridFunction&, const GridFunction&)>& metric,
                                std::mt19937_64& rng) {
    const Grid& grid = prototype.grid();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GridFunction f = zero_like(prototype);
    for (int c = 0; c < f.codim(); ++c) {
        for (int b = 0; b < 3; ++b) {
            std::array<double, 2> centre{0.0, 0.0};
            for (int a = 0; a < grid.dim(); ++a) centre[a] = grid.half_width(a) * (unit(rng) - 0.5);
            const double width = 0.3 + 1.2 * unit(rng);
            const double amp = 2.0 * unit(rng) - 1.0;
            for (std::size_t node = 0; node < grid.size(); ++node) {
                const auto p = grid.point(node);
                double r2 = 0.0;
                for (int a = 0; a < grid.dim(); ++a) r2 += (p[a] - centre[a]) * (p[a] - centre[a]);
                f.at(node, c) += amp * std::exp(-r2 / (width * width));
            }
        }
    }
    const double u = 1.0 - unit(rng);  // (0, 1]
    const double size = metric(zero_like(f), f);
    if (!(size > 0.0)) return f;
    return (u * radius / size) * f;
}

VectorState sample_audit_state(const VectorState& prototype, double radius,
                               const std::function<double(const VectorState&, const VectorState&)>& metric,
                               std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    VectorState x = zero_like(prototype);
    for (double& v : x.coordinates) v = normal(rng);
    const double u = 1.0 - unit(rng);
    const double size = metric(zero_like(x), x);
    if (!(size > 0.0)) return x;
    return (u * radius / size) * x;
}

double partition_monotonicity_check(const GeneratingFamily<GridFunction>& family, const GridFunction& f, double t,
                                    const std::vector<int>& levels, double radius) {
    if (!family.sup_type) {
        throw std::invalid_argument("family '" + family.name + "' is not a supremum of monotone linear semigroups");
    }
    if (levels.size() < 2) throw std::invalid_argument("monotonicity check needs at least two levels");
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (!(levels[i] > levels[i - 1])) throw std::invalid_argument("monotonicity levels must ascend");
    }
    const Grid& grid = f.grid();
    const double box = std::min(radius, family.trusted_radius);
    double worst = std::numeric_limits<double>::infinity();
    GridFunction prev = apply_partition(family, dyadic_partition(t, levels.front()), f);
    for (std::size_t i = 1; i < levels.size(); ++i) {
        GridFunction next = apply_partition(family, dyadic_partition(t, levels[i]), f);
        for (std::size_t node = 0; node < grid.size(); ++node) {
            if (grid.max_abs_coordinate(node) > box) continue;
            for (int c = 0; c < f.codim(); ++c) worst = std::min(worst, next.at(node, c) - prev.at(node, c));
        }
        prev = std::move(next);
    }
    return worst;
}

}  // namespace semiflow
