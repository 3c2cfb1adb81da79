#include "semiflow/families_nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "semiflow/gauss_hermite.hpp"

namespace semiflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double euclid(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

CostFunction CostFunction::quadratic(double a, int dim) {
    if (!(a > 0.0)) throw std::invalid_argument("quadratic cost needs a > 0");
    CostFunction c;
    c.name = "quadratic_cost";
    c.value = [a](std::span<const double> l) {
        const double r = euclid(l);
        return a * r * r;
    };
    c.anchor.assign(std::size_t(dim), 0.0);
    c.superlinear_radius = [a](double slope) { return std::max(0.0, slope) / a; };
    return c;
}

CostFunction CostFunction::indicator(double lo, double hi, int dim) {
    if (!(lo <= hi)) throw std::invalid_argument("indicator cost needs lo <= hi");
    CostFunction c;
    c.name = "indicator_cost";
    c.value = [lo, hi](std::span<const double> l) {
        for (double x : l) {
            if (x < lo || x > hi) return kInf;
        }
        return 0.0;
    };
    c.anchor.assign(std::size_t(dim), std::clamp(0.0, lo, hi));
    const double reach = std::max(std::abs(lo), std::abs(hi)) * std::sqrt(double(dim));
    c.superlinear_radius = [reach](double) { return reach; };
    return c;
}

LambdaGrid LambdaGrid::uniform(double lo, double hi, double step, int dim) {
    if (!(step > 0.0) || !(lo <= hi)) throw std::invalid_argument("uniform lambda grid needs lo <= hi and step > 0");
    if (dim != 1 && dim != 2) throw std::invalid_argument("lambda grids are 1D or 2D");
    const long k_lo = long(std::ceil(lo / step - 1e-9));
    const long k_hi = long(std::floor(hi / step + 1e-9));
    std::vector<double> axis;
    for (long k = k_lo; k <= k_hi; ++k) axis.push_back(double(k) * step);
    LambdaGrid g;
    for (double x : axis) {
        if (dim == 1) {
            g.points.push_back({x});
        } else {
            for (double y : axis) g.points.push_back({x, y});
        }
    }
    return g;
}

LambdaGrid LambdaGrid::from_values(const std::vector<double>& values) {
    LambdaGrid g;
    for (double v : values) g.points.push_back({v});
    return g;
}

void validate_lambda_grid(const LambdaGrid& grid, const CostFunction& cost) {
    if (grid.points.empty()) throw std::invalid_argument("lambda grid is empty");
    bool has_anchor = false, has_finite = false;
    for (const auto& p : grid.points) {
        if (p.size() != cost.anchor.size()) throw std::invalid_argument("lambda grid point has the wrong dimension");
        double gap = 0.0;
        for (std::size_t a = 0; a < p.size(); ++a) gap = std::max(gap, std::abs(p[a] - cost.anchor[a]));
        has_anchor = has_anchor || gap <= 1e-12;
        has_finite = has_finite || std::isfinite(cost.value(p));
    }
    if (!has_anchor) throw std::invalid_argument("lambda grid must contain the cost anchor");
    if (!has_finite) throw std::invalid_argument("lambda grid has no finite-cost point");
}

double effective_lambda_radius(double lip_c, const CostFunction& cost) {
    if (!(lip_c >= 0.0)) throw std::invalid_argument("Lipschitz constant must be nonnegative");
    const double anchor_norm = euclid(cost.anchor);
    if (lip_c == 0.0) return anchor_norm;
    if (!cost.superlinear_radius) {
        throw std::invalid_argument("cost '" + cost.name + "' has no superlinearity witness; supply an explicit lambda grid");
    }
    // Beyond max(R(2c), |anchor|): L >= 2c|l| >= c(|l| + |anchor|) >= c|l - anchor|.
    const double far = std::max(cost.superlinear_radius(2.0 * lip_c), anchor_norm);
    if (!std::isfinite(far)) {
        throw std::invalid_argument("superlinearity witness of '" + cost.name + "' is not finite; supply an explicit lambda grid");
    }
    const int dim = cost.dim();
    std::vector<std::vector<double>> directions;
    if (dim == 1) {
        directions = {{1.0}, {-1.0}};
    } else {
        for (int k = 0; k < 64; ++k) {
            const double a = 2.0 * std::numbers::pi * k / 64.0;
            directions.push_back({std::cos(a), std::sin(a)});
        }
    }
    auto fails = [&](const std::vector<double>& u, double r) {
        std::vector<double> l(u.size());
        double gap2 = 0.0;
        for (std::size_t a = 0; a < u.size(); ++a) {
            l[a] = r * u[a];
            gap2 += (l[a] - cost.anchor[a]) * (l[a] - cost.anchor[a]);
        }
        return cost.value(l) < lip_c * std::sqrt(gap2) * (1.0 - 1e-13);
    };
    constexpr int probes = 4000;
    double radius = anchor_norm;
    for (const auto& u : directions) {
        int last_fail = -1;
        for (int i = 0; i <= probes; ++i) {
            const double r = anchor_norm + (far - anchor_norm) * i / probes;
            if (fails(u, r)) last_fail = i;
        }
        if (last_fail < 0) continue;
        double lo = anchor_norm + (far - anchor_norm) * last_fail / probes;
        double hi = last_fail == probes ? far : anchor_norm + (far - anchor_norm) * (last_fail + 1) / probes;
        for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            (fails(u, mid) ? lo : hi) = mid;
        }
        radius = std::max(radius, hi);
    }
    return radius;
}

LambdaGrid auto_lambda_grid(double lip_c, const CostFunction& cost, int points_per_axis) {
    if (points_per_axis < 1 || points_per_axis % 2 == 0) {
        throw std::invalid_argument("points per axis must be odd so the anchor is a grid point");
    }
    const double R = effective_lambda_radius(lip_c, cost);
    const double half = R + euclid(cost.anchor);
    LambdaGrid g;
    g.provenance = LambdaGrid::Provenance::derived;
    const int mid = points_per_axis / 2;
    auto coord = [&](int axis, int i) { return cost.anchor[std::size_t(axis)] + (mid == 0 ? 0.0 : half * (i - mid) / mid); };
    if (half == 0.0) {
        g.points.push_back(cost.anchor);
        return g;
    }
    for (int i = 0; i < points_per_axis; ++i) {
        if (cost.dim() == 1) {
            g.points.push_back({coord(0, i)});
        } else {
            for (int j = 0; j < points_per_axis; ++j) g.points.push_back({coord(0, i), coord(1, j)});
        }
    }
    std::erase_if(g.points, [&](const std::vector<double>& p) { return !std::isfinite(cost.value(p)); });
    validate_lambda_grid(g, cost);
    return g;
}

DiscreteConjugate::DiscreteConjugate(const CostFunction& cost, const LambdaGrid& grid) {
    if (grid.points.empty()) throw std::invalid_argument("lambda grid is empty");
    for (const auto& p : grid.points) {
        const double c = cost.value(p);
        if (!std::isfinite(c)) continue;
        points_.push_back(p);
        costs_.push_back(c);
    }
    if (points_.empty()) throw std::invalid_argument("lambda grid has no finite-cost point");
}

double DiscreteConjugate::operator()(std::span<const double> x) const {
    double best = -kInf;
    for (std::size_t k = 0; k < points_.size(); ++k) {
        double dot = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) dot += x[a] * points_[k][a];
        best = std::max(best, dot - costs_[k]);
    }
    return best;
}

DiscreteConjugate legendre_transform(const CostFunction& cost, const LambdaGrid& grid) {
    return DiscreteConjugate(cost, grid);
}

namespace {

void max_into(GridFunction& acc, const GridFunction& candidate) {
    auto a = acc.values();
    auto c = candidate.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::max(a[i], c[i]);
}

HeatDriftParams unit_diffusion(std::span<const double> drift) {
    HeatDriftParams p = HeatDriftParams::standard(int(drift.size()));
    p.drift.assign(drift.begin(), drift.end());
    return p;
}

}  // namespace

GridFunction gexp_step(const GridFunction& f, double t, const LambdaGrid& lambdas, const CostFunction& cost) {
    if (lambdas.points.empty()) throw std::invalid_argument("lambda grid is empty");
    if (t < 0.0) throw std::invalid_argument("step time must be nonnegative");
    if (t == 0.0) return f;
    bool first = true;
    GridFunction out = f;
    for (const auto& lambda : lambdas.points) {
        const double c = cost.value(lambda);
        if (!std::isfinite(c)) continue;
        GridFunction cand = heat_drift_step(f, t, unit_diffusion(lambda));
        const double shift = c * t;
        for (double& v : cand.values()) v -= shift;
        if (first) {
            out = std::move(cand);
            first = false;
        } else {
            max_into(out, cand);
        }
    }
    if (first) throw std::invalid_argument("lambda grid has no finite-cost point");
    return out;
}

GridFunction gexp_generator(const GridFunction& f, const DiscreteConjugate& hamiltonian) {
    const int dim = f.grid().dim();
    GridFunction out = zero_like(f);
    std::vector<GridFunction> grads;
    for (int a = 0; a < dim; ++a) {
        out = out + 0.5 * second_difference(f, a);
        grads.push_back(first_difference(f, a));
    }
    std::vector<double> g(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < f.grid().size(); ++i) {
        for (int a = 0; a < dim; ++a) g[std::size_t(a)] = grads[std::size_t(a)].at(i);
        out.at(i) += hamiltonian(g);
    }
    return out;
}

GeneratingFamily<GridFunction> make_gexp_family(const LambdaGrid& lambdas, const CostFunction& cost) {
    validate_lambda_grid(lambdas, cost);
    auto hamiltonian = std::make_shared<const DiscreteConjugate>(cost, lambdas);
    GeneratingFamily<GridFunction> fam;
    fam.name = "gexp";
    fam.step = [lambdas, cost](double t, const GridFunction& f) { return gexp_step(f, t, lambdas, cost); };
    fam.distance = norm_metric(NormSpec::sup());
    fam.alpha = [](double R, double) { return R; };
    fam.beta = [](double, double) { return 1.0; };
    fam.lip_growth = [](double c, double) { return c; };
    fam.analytic_generator = [hamiltonian](const GridFunction& f) { return gexp_generator(f, *hamiltonian); };
    fam.minus_conjugate = true;
    fam.sup_type = true;
    std::size_t finite = 0;
    bool all_zero = true;
    for (const auto& p : lambdas.points) {
        const double c = cost.value(p);
        if (std::isfinite(c)) {
            ++finite;
            all_zero = all_zero && c == 0.0;
        }
    }
    fam.linear = finite == 1 && all_zero;
    return fam;
}

GridFunction g_expectation_step(const GridFunction& f, double t, const std::vector<HeatDriftParams>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("(sigma, lambda) set is empty");
    if (t < 0.0) throw std::invalid_argument("step time must be nonnegative");
    if (t == 0.0) return f;
    GridFunction out = heat_drift_step(f, t, pairs.front());
    for (std::size_t k = 1; k < pairs.size(); ++k) max_into(out, heat_drift_step(f, t, pairs[k]));
    return out;
}

double g_expectation_omega(const std::vector<HeatDriftParams>& pairs) {
    double s2 = 0.0, l = 0.0;
    for (const auto& p : pairs) {
        s2 = std::max(s2, p.sigma_norm() * p.sigma_norm());
        l = std::max(l, p.drift_norm());
    }
    return std::max(1.0 + s2 + l * l, std::numbers::sqrt2 * l);
}

GeneratingFamily<GridFunction> make_g_expectation_family(const std::vector<HeatDriftParams>& pairs,
                                                         const NormSpec& norm) {
    if (pairs.empty()) throw std::invalid_argument("(sigma, lambda) set is empty");
    GeneratingFamily<GridFunction> fam;
    fam.name = "g_expectation";
    fam.step = [pairs](double t, const GridFunction& f) { return g_expectation_step(f, t, pairs); };
    fam.distance = norm_metric(norm);
    if (norm.kind == NormSpec::Kind::sup) {
        fam.alpha = [](double R, double) { return R; };
        fam.beta = [](double, double) { return 1.0; };
        fam.lip_growth = [](double c, double) { return c; };
    } else {
        if (norm.p != 2.0) throw std::invalid_argument("weighted G-expectation uses the p = 2 weight");
        const double omega = g_expectation_omega(pairs);
        fam.alpha = [omega](double R, double t) { return std::exp(omega * t) * R; };
        fam.beta = [omega](double, double t) { return std::exp(omega * t); };
    }
    fam.analytic_generator = [pairs](const GridFunction& f) {
        GridFunction out = heat_drift_generator(f, pairs.front());
        for (std::size_t k = 1; k < pairs.size(); ++k) max_into(out, heat_drift_generator(f, pairs[k]));
        return out;
    };
    fam.minus_conjugate = true;
    fam.sup_type = true;
    fam.linear = pairs.size() == 1;
    return fam;
}

GridFunction robust_gbm_step(const GridFunction& f, double t, const std::vector<GbmParams>& set) {
    if (set.empty()) throw std::invalid_argument("(mu, sigma) set is empty");
    GridFunction out = gbm_step(f, t, set.front());
    for (std::size_t k = 1; k < set.size(); ++k) max_into(out, gbm_step(f, t, set[k]));
    return out;
}

GeneratingFamily<GridFunction> make_robust_gbm_family(const std::vector<GbmParams>& set, const Grid& grid,
                                                      double horizon) {
    if (set.empty()) throw std::invalid_argument("(mu, sigma) set is empty");
    for (const auto& g : set) {
        if (g.p != set.front().p) throw std::invalid_argument("robust GBM members must share the weight exponent p");
    }
    const double omega = gbm_omega(set);
    const double radius = gbm_trusted_radius(grid, set, horizon);
    const NormSpec norm = NormSpec::weighted(set.front().p);
    std::vector<GeneratingFamily<GridFunction>> members;
    for (const auto& g : set) members.push_back(make_gbm_linear_family(g, grid, horizon));

    GeneratingFamily<GridFunction> fam;
    fam.name = "robust_gbm";
    fam.step = [members](double t, const GridFunction& f) {
        GridFunction out = members.front().step(t, f);
        for (std::size_t k = 1; k < members.size(); ++k) max_into(out, members[k].step(t, f));
        return out;
    };
    fam.distance = norm_metric(norm);
    fam.trusted_distance = norm_metric(norm, radius);
    fam.trusted_radius = radius;
    fam.alpha = [omega](double R, double t) { return std::exp(omega * t) * R; };
    fam.beta = [omega](double, double t) { return std::exp(omega * t); };
    fam.lip_growth = [omega](double c, double t) { return std::exp(omega * t) * c; };
    fam.analytic_generator = [set](const GridFunction& f) {
        GridFunction out = gbm_generator(f, set.front());
        for (std::size_t k = 1; k < set.size(); ++k) max_into(out, gbm_generator(f, set[k]));
        return out;
    };
    fam.minus_conjugate = true;
    fam.sup_type = true;
    fam.linear = set.size() == 1;
    return fam;
}

VectorField VectorField::neg_identity(int dim) {
    VectorField v;
    v.name = "neg_identity";
    v.dim = dim;
    v.eval = [](std::span<const double> y) {
        std::vector<double> out(y.begin(), y.end());
        for (double& c : out) c = -c;
        return out;
    };
    v.growth = 1.0;
    v.lipschitz_profile = [](double) { return 1.0; };
    return v;
}

VectorField VectorField::rotation() {
    VectorField v;
    v.name = "rotation";
    v.dim = 2;
    v.eval = [](std::span<const double> y) { return std::vector<double>{-y[1], y[0]}; };
    v.growth = 1.0;
    v.lipschitz_profile = [](double) { return 1.0; };
    return v;
}

VectorState ode_euler_step(const VectorState& x, double t, const VectorField& field) {
    if (t < 0.0) throw std::invalid_argument("step time must be nonnegative");
    if (int(x.coordinates.size()) != field.dim) throw std::invalid_argument("state dimension does not match the vector field");
    if (t == 0.0) return x;
    const auto fx = field.eval(x.coordinates);
    VectorState out = x;
    for (std::size_t i = 0; i < out.coordinates.size(); ++i) out.coordinates[i] += t * fx[i];
    return out;
}

GeneratingFamily<VectorState> make_ode_family(const VectorField& field) {
    GeneratingFamily<VectorState> fam;
    fam.name = "ode_" + field.name;
    fam.step = [field](double t, const VectorState& x) { return ode_euler_step(x, t, field); };
    fam.distance = [](const VectorState& a, const VectorState& b) { return distance(a, b); };
    const double K = field.growth;
    fam.alpha = [K](double R, double t) { return std::exp(2.0 * K * t) * std::max(R, 1.0); };
    fam.beta = [profile = field.lipschitz_profile](double R, double t) { return std::exp(profile(R) * t); };
    fam.analytic_generator = [field](const VectorState& x) { return VectorState{field.eval(x.coordinates)}; };
    fam.linear = field.name == "neg_identity" || field.name == "rotation";
    return fam;
}

PerturbationSpec PerturbationSpec::sine() {
    return {"sin", [](double u) { return std::sin(u); }, 1.0, [](double) { return 1.0; }};
}

PerturbationSpec PerturbationSpec::linear(double c) {
    const double a = std::abs(c);
    return {"linear", [c](double u) { return c * u; }, a, [a](double) { return a; }};
}

PerturbationSpec PerturbationSpec::neg_identity() {
    return {"neg_identity", [](double u) { return -u; }, 1.0, [](double) { return 1.0; }};
}

PerturbationSpec PerturbationSpec::cubic(double nominal_growth) {
    return {"cubic", [](double u) { return u * u * u; }, nominal_growth, [](double R) { return 3.0 * R * R; }};
}

void validate_perturbation(const PerturbationSpec& pert) {
    if (!pert.psi || !pert.lipschitz_profile) throw std::invalid_argument("perturbation is incomplete");
    if (pert.psi(0.0) != 0.0) throw std::invalid_argument("perturbation '" + pert.name + "' violates Psi(0) = 0");
    for (int i = 0; i <= 20000; ++i) {
        const double x = -1000.0 + 0.1 * i;
        if (std::abs(pert.psi(x)) > pert.growth * (1.0 + std::abs(x)) * (1.0 + 1e-12)) {
            throw std::invalid_argument("perturbation '" + pert.name + "' violates |Psi(x)| <= K(1+|x|) at x = " +
                                        format_double(x));
        }
    }
    double previous = 0.0;
    for (double R : {1.0, 10.0, 100.0}) {
        const double L = pert.lipschitz_profile(R);
        if (L < previous) throw std::invalid_argument("Lipschitz profile of '" + pert.name + "' decreases");
        previous = L;
        constexpr int probes = 2000;
        for (int i = 0; i < probes; ++i) {
            const double x = -R + 2.0 * R * i / probes;
            const double y = -R + 2.0 * R * (i + 1) / probes;
            if (std::abs(pert.psi(x) - pert.psi(y)) > L * std::abs(x - y) * (1.0 + 1e-9) + 1e-15) {
                throw std::invalid_argument("perturbation '" + pert.name + "' violates its Lipschitz profile on [-" +
                                            format_double(R) + ", " + format_double(R) + "]");
            }
        }
    }
}

GridFunction apply_psi(const GridFunction& f, const PerturbationSpec& pert) {
    GridFunction out = f;
    for (double& v : out.values()) v = pert.psi(v);
    return out;
}

GridFunction perturbation_step(const GridFunction& f, double t, const GeneratingFamily<GridFunction>& base,
                               const PerturbationSpec& pert) {
    if (t < 0.0) throw std::invalid_argument("step time must be nonnegative");
    if (t == 0.0) return f;
    GridFunction out = base.step(t, f);
    auto o = out.values();
    auto in = f.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += t * pert.psi(in[i]);
    return out;
}

GeneratingFamily<GridFunction> make_perturbation_family(const GeneratingFamily<GridFunction>& base,
                                                        const PerturbationSpec& pert, double base_omega) {
    if (!base.linear) throw std::invalid_argument("perturbation base family must be linear");
    validate_perturbation(pert);
    GeneratingFamily<GridFunction> fam;
    fam.name = base.name + "+" + pert.name;
    fam.step = [base, pert](double t, const GridFunction& f) { return perturbation_step(f, t, base, pert); };
    fam.distance = base.distance;
    fam.trusted_distance = base.trusted_distance;
    fam.trusted_radius = base.trusted_radius;
    const double w = base_omega, K = pert.growth;
    fam.alpha = [w, K](double R, double t) { return std::exp((w + 2.0 * K) * t) * std::max(R, 1.0); };
    fam.beta = [w, profile = pert.lipschitz_profile](double R, double t) { return std::exp((w + profile(R)) * t); };
    if (base.analytic_generator) {
        fam.analytic_generator = [gen = base.analytic_generator, pert](const GridFunction& f) {
            return gen(f) + apply_psi(f, pert);
        };
    }
    return fam;
}

double telescoping_residual(const GeneratingFamily<GridFunction>& base, const PerturbationSpec& pert,
                            const GridFunction& f, const GridFunction& g, int k, int n) {
    if (!base.linear) throw std::invalid_argument("telescoping identity needs a linear base family");
    if (k < 1 || n < 0) throw std::invalid_argument("telescoping residual needs k >= 1 and n >= 0");
    const double tau = std::ldexp(1.0, -n);
    // Left side, keeping every iterate for the sum.
    std::vector<GridFunction> fi{f}, gi{g};
    for (int l = 0; l < k; ++l) {
        fi.push_back(perturbation_step(fi.back(), tau, base, pert));
        gi.push_back(perturbation_step(gi.back(), tau, base, pert));
    }
    const GridFunction lhs = fi.back() - gi.back();
    GridFunction rhs = base.step(k * tau, f - g);
    for (int l = 0; l < k; ++l) {
        const GridFunction gap = apply_psi(fi[std::size_t(l)], pert) - apply_psi(gi[std::size_t(l)], pert);
        rhs = rhs + tau * base.step((k - 1 - l) * tau, gap);
    }
    return distance(lhs, rhs, NormSpec::sup());
}

}  // namespace semiflow
