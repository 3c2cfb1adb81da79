/**
 * @file families_nonlinear.hpp
 * @brief Nonlinear generating families built from the linear kernels:
 *        convex g-expectation, G-expectation, robust GBM, Euler steps for
 *        ODEs, and Lipschitz perturbations of a linear semigroup.
 */

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semiflow/chernoff.hpp"
#include "semiflow/families_linear.hpp"
#include "semiflow/state_space.hpp"

namespace semiflow {

/// Drift cost L: R^d -> [0, +inf] with L(anchor) = 0.
struct CostFunction {
    std::string name;
    std::function<double(std::span<const double>)> value;
    std::vector<double> anchor;
    /// R(c) with L(lambda) >= c |lambda| whenever |lambda| >= R(c). Empty when
    /// no superlinearity witness is known.
    std::function<double(double)> superlinear_radius;

    int dim() const { return int(anchor.size()); }

    /// L(lambda) = a |lambda|^2, a > 0.
    static CostFunction quadratic(double a, int dim);
    /// L = 0 on [lo, hi]^d and +inf outside; lo <= hi.
    static CostFunction indicator(double lo, double hi, int dim);
};

/// Finite set of candidate drifts.
struct LambdaGrid {
    enum class Provenance { user, derived };
    std::vector<std::vector<double>> points;
    Provenance provenance = Provenance::user;

    /// Tensor grid k*step for integer k with lo <= k*step <= hi on every axis
    /// (0 is hit exactly when lo <= 0 <= hi).
    static LambdaGrid uniform(double lo, double hi, double step, int dim);
    /// Explicit list of 1D drifts.
    static LambdaGrid from_values(const std::vector<double>& values);
};

/// Throws std::invalid_argument if the grid is empty, contains points of
/// mixed dimension, misses the cost anchor, or has no finite-cost point.
void validate_lambda_grid(const LambdaGrid& grid, const CostFunction& cost);

/// Smallest probed radius R >= |anchor| such that c |lambda - anchor| <= L(lambda)
/// for all |lambda| >= R. Throws std::invalid_argument when the cost has no
/// witness (an explicit lambda grid is then required).
double effective_lambda_radius(double lip_c, const CostFunction& cost);

/// Uniform grid of points_per_axis points per axis on the box of the
/// effective radius around the anchor; infinite-cost points are dropped.
LambdaGrid auto_lambda_grid(double lip_c, const CostFunction& cost, int points_per_axis = 41);

/// H(x) = max_k <x, lambda_k> - L(lambda_k) over the finite grid.
class DiscreteConjugate {
public:
    DiscreteConjugate(const CostFunction& cost, const LambdaGrid& grid);
    double operator()(std::span<const double> x) const;
    double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

private:
    std::vector<std::vector<double>> points_;
    std::vector<double> costs_;
};

DiscreteConjugate legendre_transform(const CostFunction& cost, const LambdaGrid& grid);

/// max_k S_{lambda_k}(t) f - L(lambda_k) t nodewise; t == 0 returns f.
GridFunction gexp_step(const GridFunction& f, double t, const LambdaGrid& lambdas, const CostFunction& cost);

/// (1/2) Delta f + H(grad f) with the discrete conjugate of the same grid.
GridFunction gexp_generator(const GridFunction& f, const DiscreteConjugate& hamiltonian);

/// Sup-norm contraction family; minus conjugate available.
GeneratingFamily<GridFunction> make_gexp_family(const LambdaGrid& lambdas, const CostFunction& cost);

/// Nodewise max over (sigma, lambda) pairs of the heat-with-drift step.
GridFunction g_expectation_step(const GridFunction& f, double t, const std::vector<HeatDriftParams>& pairs);

/// Sup norm: alpha = R, beta = 1. Weighted norm (p = 2): alpha = e^{omega t} R,
/// beta = e^{omega t}, omega = max{1 + sup|sigma|^2 + sup|lambda|^2, sqrt2 sup|lambda|}.
GeneratingFamily<GridFunction> make_g_expectation_family(const std::vector<HeatDriftParams>& pairs,
                                                         const NormSpec& norm);
double g_expectation_omega(const std::vector<HeatDriftParams>& pairs);

/// Nodewise max of gbm_step over the (mu, sigma) set.
GridFunction robust_gbm_step(const GridFunction& f, double t, const std::vector<GbmParams>& set);
GeneratingFamily<GridFunction> make_robust_gbm_family(const std::vector<GbmParams>& set, const Grid& grid,
                                                      double horizon = 1.0);

/// Vector field f: R^d -> R^d with |f(x)| <= K(1+|x|) and local Lipschitz profile L_R.
struct VectorField {
    std::string name;
    int dim = 1;
    std::function<std::vector<double>(std::span<const double>)> eval;
    double growth = 1.0;
    std::function<double(double)> lipschitz_profile;

    /// f(y) = -y.
    static VectorField neg_identity(int dim);
    /// f(y) = (-y2, y1).
    static VectorField rotation();
};

VectorState ode_euler_step(const VectorState& x, double t, const VectorField& field);
/// alpha(R,t) = e^{2Kt} max(R,1), beta(R,t) = e^{L_R t}; generator = field.
GeneratingFamily<VectorState> make_ode_family(const VectorField& field);

/// Componentwise reaction term Psi with Psi(0) = 0, |Psi(x)| <= K(1+|x|),
/// and non-decreasing local Lipschitz profile.
struct PerturbationSpec {
    std::string name;
    std::function<double(double)> psi;
    double growth = 1.0;
    std::function<double(double)> lipschitz_profile;

    static PerturbationSpec sine();
    static PerturbationSpec linear(double c);
    static PerturbationSpec neg_identity();
    /// Psi(u) = u^3 with a nominal growth constant; rejected by validation.
    static PerturbationSpec cubic(double nominal_growth = 1.0);
};

/// Probes Psi(0) = 0, the growth bound on [-1e3, 1e3] and the Lipschitz
/// profile on [-R, R] for R in {1, 10, 100}. Throws std::invalid_argument.
void validate_perturbation(const PerturbationSpec& pert);

GridFunction apply_psi(const GridFunction& f, const PerturbationSpec& pert);

/// I(t)f = I_0(t)f + t Psi(f) with a linear base family.
GridFunction perturbation_step(const GridFunction& f, double t, const GeneratingFamily<GridFunction>& base,
                               const PerturbationSpec& pert);

/// alpha(R,t) = e^{(omega+2K)t} max(R,1), beta(R,t) = e^{(omega+L_R)t} where
/// omega is the growth rate of the base (0 for contractions).
GeneratingFamily<GridFunction> make_perturbation_family(const GeneratingFamily<GridFunction>& base,
                                                        const PerturbationSpec& pert, double base_omega = 0.0);

/// Sup distance between I(2^-n)^k f - I(2^-n)^k g and
/// I_0(k 2^-n)(f-g) + 2^-n sum_l I_0((k-1-l) 2^-n)(Psi(I^l f) - Psi(I^l g)).
double telescoping_residual(const GeneratingFamily<GridFunction>& base, const PerturbationSpec& pert,
                            const GridFunction& f, const GridFunction& g, int k, int n);

}  // namespace semiflow
