#include "semiflow/families_linear.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

#include "semiflow/gauss_hermite.hpp"

namespace semiflow {

HeatDriftParams HeatDriftParams::standard(int dim) {
    HeatDriftParams p;
    p.drift.assign(std::size_t(dim), 0.0);
    p.sigma.assign(std::size_t(dim * dim), 0.0);
    for (int a = 0; a < dim; ++a) p.sigma[std::size_t(a * dim + a)] = 1.0;
    return p;
}

HeatDriftParams HeatDriftParams::scalar(double sigma, double drift) { return {{drift}, {sigma}}; }

std::vector<double> HeatDriftParams::diagonal(int dim) const {
    if (drift.size() != std::size_t(dim) || sigma.size() != std::size_t(dim * dim)) {
        throw std::invalid_argument("heat parameters do not match grid dimension " + std::to_string(dim));
    }
    std::vector<double> diag(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
            const double s = sigma[std::size_t(a * dim + b)];
            if (!std::isfinite(s)) throw std::invalid_argument("sigma entries must be finite");
            if (a != b && s != 0.0) throw std::invalid_argument("only diagonal sigma matrices are supported");
        }
        diag[std::size_t(a)] = sigma[std::size_t(a * dim + a)];
        if (!std::isfinite(drift[std::size_t(a)])) throw std::invalid_argument("drift entries must be finite");
    }
    return diag;
}

double HeatDriftParams::sigma_norm() const {
    double s = 0.0;
    for (double v : sigma) s += v * v;
    return std::sqrt(s);
}

double HeatDriftParams::drift_norm() const {
    double s = 0.0;
    for (double v : drift) s += v * v;
    return std::sqrt(s);
}

namespace {

// out[i] = sum_k w[k] * ext(line)[i + offset_lo + k]
void convolve_line(const double* in, std::size_t stride, int n, double* out, const LatticeKernel& kernel,
                   Extension ext, std::vector<double>& pad) {
    const int reach = std::max(std::abs(kernel.offset_lo), std::abs(kernel.offset_hi()));
    pad.assign(std::size_t(n + 2 * reach), 0.0);
    for (int i = 0; i < n; ++i) pad[std::size_t(reach + i)] = in[std::size_t(i) * stride];
    if (ext == Extension::clamp) {
        std::fill(pad.begin(), pad.begin() + reach, in[0]);
        std::fill(pad.begin() + reach + n, pad.end(), in[std::size_t(n - 1) * stride]);
    }
    const double* w = kernel.weights.data();
    const int m = int(kernel.weights.size());
    for (int i = 0; i < n; ++i) {
        const double* src = pad.data() + (reach + i + kernel.offset_lo);
        double acc = 0.0;
        for (int k = 0; k < m; ++k) acc += w[k] * src[k];
        out[std::size_t(i) * stride] = acc;
    }
}

bool is_identity(const LatticeKernel& k) { return k.offset_lo == 0 && k.weights.size() == 1 && k.weights[0] == 1.0; }

}  // namespace

GridFunction convolve_axis(const GridFunction& f, int axis, const LatticeKernel& kernel) {
    const Grid& grid = f.grid();
    if (axis < 0 || axis >= grid.dim()) throw std::invalid_argument("axis out of range");
    GridFunction out = f;
    const int m = f.codim();
    const int n = grid.n_points(axis);
    std::vector<double> pad;
    const double* src = f.values().data();
    double* dst = out.values().data();
    if (grid.dim() == 1) {
        for (int c = 0; c < m; ++c) convolve_line(src + c, std::size_t(m), n, dst + c, kernel, f.extension(), pad);
        return out;
    }
    const int ny = grid.n_points(1);
    if (axis == 0) {
        for (int j = 0; j < ny; ++j) {
            for (int c = 0; c < m; ++c) {
                const std::size_t base = std::size_t(j) * m + c;
                convolve_line(src + base, std::size_t(ny) * m, n, dst + base, kernel, f.extension(), pad);
            }
        }
    } else {
        for (int i = 0; i < grid.n_points(0); ++i) {
            for (int c = 0; c < m; ++c) {
                const std::size_t base = std::size_t(i) * ny * m + c;
                convolve_line(src + base, std::size_t(m), n, dst + base, kernel, f.extension(), pad);
            }
        }
    }
    return out;
}

GridFunction heat_drift_step(const GridFunction& f, double t, const HeatDriftParams& params) {
    if (t < 0.0) throw std::invalid_argument("heat step time must be nonnegative");
    const int dim = f.grid().dim();
    const auto diag = params.diagonal(dim);
    if (t == 0.0) return f;
    GridFunction g = f;
    for (int a = 0; a < dim; ++a) {
        const auto kernel = lattice_heat_kernel(t, diag[std::size_t(a)], params.drift[std::size_t(a)], f.grid().spacing(a));
        if (!is_identity(kernel)) g = convolve_axis(g, a, kernel);
    }
    return g;
}

GridFunction first_difference(const GridFunction& f, int axis) {
    const Grid& grid = f.grid();
    const int n = grid.n_points(axis);
    const double h = grid.spacing(axis);
    GridFunction out = zero_like(f);
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const auto ij = grid.unflatten(node);
        const int i = ij[axis];
        auto at = [&](int k, int c) {
            return axis == 0 ? f.at(grid.flatten(k, ij[1]), c) : f.at(grid.flatten(ij[0], k), c);
        };
        for (int c = 0; c < f.codim(); ++c) {
            double d;
            if (i == 0) {
                d = (-3.0 * at(0, c) + 4.0 * at(1, c) - at(2, c)) / (2.0 * h);
            } else if (i == n - 1) {
                d = (3.0 * at(n - 1, c) - 4.0 * at(n - 2, c) + at(n - 3, c)) / (2.0 * h);
            } else {
                d = (at(i + 1, c) - at(i - 1, c)) / (2.0 * h);
            }
            out.at(node, c) = d;
        }
    }
    return out;
}

GridFunction second_difference(const GridFunction& f, int axis) {
    const Grid& grid = f.grid();
    const int n = grid.n_points(axis);
    const double h2 = grid.spacing(axis) * grid.spacing(axis);
    GridFunction out = zero_like(f);
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const auto ij = grid.unflatten(node);
        const int i = ij[axis];
        auto at = [&](int k, int c) {
            return axis == 0 ? f.at(grid.flatten(k, ij[1]), c) : f.at(grid.flatten(ij[0], k), c);
        };
        for (int c = 0; c < f.codim(); ++c) {
            double d;
            if (n < 4) {
                d = (at(0, c) - 2.0 * at(1, c) + at(2, c)) / h2;
            } else if (i == 0) {
                d = (2.0 * at(0, c) - 5.0 * at(1, c) + 4.0 * at(2, c) - at(3, c)) / h2;
            } else if (i == n - 1) {
                d = (2.0 * at(n - 1, c) - 5.0 * at(n - 2, c) + 4.0 * at(n - 3, c) - at(n - 4, c)) / h2;
            } else {
                d = (at(i + 1, c) - 2.0 * at(i, c) + at(i - 1, c)) / h2;
            }
            out.at(node, c) = d;
        }
    }
    return out;
}

GridFunction heat_drift_generator(const GridFunction& f, const HeatDriftParams& params) {
    const int dim = f.grid().dim();
    const auto diag = params.diagonal(dim);
    GridFunction out = zero_like(f);
    for (int a = 0; a < dim; ++a) {
        const double s2 = diag[std::size_t(a)] * diag[std::size_t(a)];
        const double lam = params.drift[std::size_t(a)];
        if (s2 != 0.0) out = out + (0.5 * s2) * second_difference(f, a);
        if (lam != 0.0) out = out + lam * first_difference(f, a);
    }
    return out;
}

std::function<double(const GridFunction&, const GridFunction&)> norm_metric(NormSpec norm, double radius) {
    return [norm, radius](const GridFunction& a, const GridFunction& b) { return distance(a, b, norm, radius); };
}

GeneratingFamily<GridFunction> make_heat_family(const HeatDriftParams& params, const NormSpec& norm) {
    GeneratingFamily<GridFunction> fam;
    fam.name = "heat";
    fam.step = [params](double t, const GridFunction& f) { return heat_drift_step(f, t, params); };
    fam.distance = norm_metric(norm);
    if (norm.kind == NormSpec::Kind::sup) {
        fam.alpha = [](double R, double) { return R; };
        fam.beta = [](double, double) { return 1.0; };
    } else {
        // Second-moment growth of the Gaussian step in the (1+|x|^2)^-1 weight.
        if (norm.p != 2.0) throw std::invalid_argument("weighted heat families use the p = 2 weight");
        const double sn = params.sigma_norm(), dn = params.drift_norm();
        const double omega = std::max(1.0 + sn * sn + dn * dn, std::numbers::sqrt2 * dn);
        fam.alpha = [omega](double R, double t) { return std::exp(omega * t) * R; };
        fam.beta = [omega](double, double t) { return std::exp(omega * t); };
    }
    fam.lip_growth = [](double c, double) { return c; };
    fam.analytic_generator = [params](const GridFunction& f) { return heat_drift_generator(f, params); };
    fam.minus_conjugate = true;
    fam.sup_type = true;
    fam.linear = true;
    return fam;
}

GeneratingFamily<GridFunction> make_identity_family(const NormSpec& norm) {
    GeneratingFamily<GridFunction> fam;
    fam.name = "identity";
    fam.step = [](double t, const GridFunction& f) {
        if (t < 0.0) throw std::invalid_argument("step time must be nonnegative");
        return f;
    };
    fam.distance = norm_metric(norm);
    fam.alpha = [](double R, double) { return R; };
    fam.beta = [](double, double) { return 1.0; };
    fam.lip_growth = [](double c, double) { return c; };
    fam.analytic_generator = [](const GridFunction& f) { return zero_like(f); };
    fam.minus_conjugate = true;
    fam.sup_type = true;
    fam.linear = true;
    return fam;
}

double gbm_omega(std::span<const GbmParams> set) {
    double omega = 0.0;
    for (const auto& g : set) omega = std::max(omega, g.p * std::max(0.0, g.mu + (g.p - 1.0) * g.sigma * g.sigma / 2.0));
    return omega;
}

double gbm_escape_mass(double x, double t, double x_max, const GbmParams& params) {
    if (x == 0.0 || t == 0.0) return std::abs(x) > x_max ? 1.0 : 0.0;
    const double drift = (params.mu - params.sigma * params.sigma / 2.0) * t;
    const double level = std::log(x_max / std::abs(x)) - drift;
    if (params.sigma == 0.0) return level < 0.0 ? 1.0 : 0.0;
    return 0.5 * std::erfc(level / (params.sigma * std::sqrt(t) * std::numbers::sqrt2));
}

double gbm_trusted_radius(const Grid& grid, std::span<const GbmParams> set, double horizon) {
    // z = 6.7 leaves a factor 2 for the running maximum (reflection) below 1e-10.
    constexpr double z = 6.7;
    double worst_drift = 0.0, worst_sigma = 0.0;
    for (const auto& g : set) {
        worst_drift = std::max(worst_drift, (g.mu - g.sigma * g.sigma / 2.0) * horizon);
        worst_sigma = std::max(worst_sigma, std::abs(g.sigma));
    }
    return grid.half_width() * std::exp(-worst_drift - z * worst_sigma * std::sqrt(horizon));
}

namespace {

void validate_gbm(const GridFunction& f, const GbmParams& params) {
    if (f.grid().dim() != 1 || f.codim() != 1) throw std::invalid_argument("GBM steps act on scalar 1D grid functions");
    if (params.quad_nodes < 8) throw std::invalid_argument("GBM quadrature needs at least 8 nodes");
    if (!std::isfinite(params.mu) || !std::isfinite(params.sigma)) throw std::invalid_argument("GBM coefficients must be finite");
}

std::atomic<bool> g_gbm_escape_warned{false};

GridFunction gbm_step_with_rule(const GridFunction& f, double t, const GbmParams& params, const GaussHermiteRule& rule,
                                double trusted_radius) {
    if (t < 0.0) throw std::invalid_argument("GBM step time must be nonnegative");
    if (t == 0.0) return f;
    const Grid& grid = f.grid();
    const int centre = (grid.n_points() - 1) / 2;
    const double drift = (params.mu - params.sigma * params.sigma / 2.0) * t;
    const double spread = params.sigma * std::sqrt(2.0 * t);
    std::vector<double> factors(rule.nodes.size());
    for (std::size_t m = 0; m < factors.size(); ++m) factors[m] = std::exp(drift + spread * rule.nodes[m]);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);

    GridFunction out = f;
    bool escaped = false;
    for (int i = 0; i < grid.n_points(); ++i) {
        if (i == centre) continue;  // x = 0 is a fixed point of x -> x X_t
        const double x = grid.coordinate(0, i);
        double acc = 0.0;
        for (std::size_t m = 0; m < factors.size(); ++m) acc += rule.weights[m] * interp_eval_1d(f, x * factors[m]);
        out.at(std::size_t(i)) = acc * inv_sqrt_pi;
        if (!escaped && std::abs(x) <= trusted_radius && gbm_escape_mass(x, t, grid.half_width(), params) > 1e-10) {
            escaped = true;
        }
    }
    if (escaped && !g_gbm_escape_warned.exchange(true)) {
        std::cerr << "semiflow: warning: GBM lognormal mass escaping the box exceeds 1e-10 inside the trusted radius "
                  << trusted_radius << '\n';
    }
    return out;
}

}  // namespace

GridFunction gbm_step(const GridFunction& f, double t, const GbmParams& params, double trusted_radius) {
    validate_gbm(f, params);
    return gbm_step_with_rule(f, t, params, gauss_hermite_rule(params.quad_nodes), trusted_radius);
}

GridFunction gbm_generator(const GridFunction& f, const GbmParams& params) {
    const GridFunction d1 = first_difference(f, 0);
    const GridFunction d2 = second_difference(f, 0);
    GridFunction out = zero_like(f);
    for (std::size_t i = 0; i < f.grid().size(); ++i) {
        const double x = f.grid().coordinate(0, int(i));
        out.at(i) = params.mu * x * d1.at(i) + 0.5 * params.sigma * params.sigma * x * x * d2.at(i);
    }
    return out;
}

GeneratingFamily<GridFunction> make_gbm_linear_family(const GbmParams& params, const Grid& grid, double horizon) {
    validate_gbm(GridFunction(grid, 1, Extension::clamp), params);
    const GbmParams set[] = {params};
    const double omega = gbm_omega(set);
    const double radius = gbm_trusted_radius(grid, set, horizon);
    const NormSpec norm = NormSpec::weighted(params.p);
    auto rule = std::make_shared<const GaussHermiteRule>(gauss_hermite_rule(params.quad_nodes));

    GeneratingFamily<GridFunction> fam;
    fam.name = "gbm";
    fam.step = [params, rule, radius](double t, const GridFunction& f) {
        validate_gbm(f, params);
        return gbm_step_with_rule(f, t, params, *rule, radius);
    };
    fam.distance = norm_metric(norm);
    fam.trusted_distance = norm_metric(norm, radius);
    fam.trusted_radius = radius;
    fam.alpha = [omega](double R, double t) { return std::exp(omega * t) * R; };
    fam.beta = [omega](double, double t) { return std::exp(omega * t); };
    fam.lip_growth = [omega](double c, double t) { return std::exp(omega * t) * c; };
    fam.analytic_generator = [params](const GridFunction& f) { return gbm_generator(f, params); };
    fam.minus_conjugate = true;
    fam.sup_type = true;
    fam.linear = true;
    return fam;
}

}  // namespace semiflow
