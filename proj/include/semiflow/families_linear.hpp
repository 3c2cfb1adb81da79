/**
 * @file families_linear.hpp
 * @brief Linear transition operators on grid functions: heat with drift and
 *        geometric Brownian motion.
 *
 * Both are nonnegative-weight quadratures, hence monotone and linear.
 */

#pragma once

#include <limits>
#include <span>
#include <vector>

#include "semiflow/chernoff.hpp"
#include "semiflow/lattice_kernel.hpp"
#include "semiflow/state_space.hpp"

namespace semiflow {

/// Drift lambda (one entry per axis) and diffusion matrix sigma (dim x dim,
/// row-major). Only diagonal sigma is supported.
struct HeatDriftParams {
    std::vector<double> drift;
    std::vector<double> sigma;

    static HeatDriftParams standard(int dim);
    static HeatDriftParams scalar(double sigma, double drift);
    /// Diagonal entries; throws std::invalid_argument for a shape mismatch
    /// with dim or a non-diagonal matrix.
    std::vector<double> diagonal(int dim) const;
    /// Frobenius norm |sigma|.
    double sigma_norm() const;
    double drift_norm() const;
    bool operator==(const HeatDriftParams&) const = default;
};

/// Applies a 1D lattice kernel along one axis with the function's extension.
GridFunction convolve_axis(const GridFunction& f, int axis, const LatticeKernel& kernel);

/// E[f(x + sigma W_t + lambda t)] for the lattice walk with this generator;
/// t == 0 returns f unchanged.
GridFunction heat_drift_step(const GridFunction& f, double t, const HeatDriftParams& params);

/// (1/2) tr(sigma sigma^T D^2 f) + <lambda, grad f> by central differences.
GridFunction heat_drift_generator(const GridFunction& f, const HeatDriftParams& params);

/// Central first / second differences along an axis; second-order one-sided
/// stencils at the boundary.
GridFunction first_difference(const GridFunction& f, int axis);
GridFunction second_difference(const GridFunction& f, int axis);

/// Metric for the family descriptors: the norm, optionally on |x|_inf <= radius.
std::function<double(const GridFunction&, const GridFunction&)> norm_metric(
    NormSpec norm, double radius = std::numeric_limits<double>::infinity());

/// Contraction family: alpha(R,t) = R, beta = 1.
GeneratingFamily<GridFunction> make_heat_family(const HeatDriftParams& params, const NormSpec& norm);

/// The identity semigroup I(t) = id, used as a perturbation base.
GeneratingFamily<GridFunction> make_identity_family(const NormSpec& norm);

struct GbmParams {
    double mu = 0.0;
    double sigma = 0.0;
    int quad_nodes = 64;
    double p = 3.0;  ///< weight exponent of the kappa norm
    bool operator==(const GbmParams&) const = default;
};

/// omega = max over the set of p (mu + (p-1) sigma^2 / 2)^+.
double gbm_omega(std::span<const GbmParams> set);

/// Largest radius r such that for every |x| <= r and every member of the set
/// the lognormal mass leaving [-X_max, X_max] before the horizon is < 1e-10.
double gbm_trusted_radius(const Grid& grid, std::span<const GbmParams> set, double horizon);

/// Mass of x exp((mu - sigma^2/2) t + sigma W_t) outside the box.
double gbm_escape_mass(double x, double t, double x_max, const GbmParams& params);

/// E[f(x X_t)] by Gauss-Hermite quadrature in the Brownian variable; f is read
/// by interpolation. Writes one warning to stderr when nodes inside
/// trusted_radius lose more than 1e-10 mass outside the box.
GridFunction gbm_step(const GridFunction& f, double t, const GbmParams& params,
                      double trusted_radius = std::numeric_limits<double>::infinity());

/// mu x f' + (sigma^2/2) x^2 f''.
GridFunction gbm_generator(const GridFunction& f, const GbmParams& params);

/// Weighted-norm family with alpha = e^{omega t} R, beta = e^{omega t}. The
/// trusted metric uses the interior radius for the given horizon.
GeneratingFamily<GridFunction> make_gbm_linear_family(const GbmParams& params, const Grid& grid,
                                                      double horizon = 1.0);

}  // namespace semiflow
