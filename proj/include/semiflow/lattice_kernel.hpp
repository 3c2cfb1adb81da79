/**
 * @file lattice_kernel.hpp
 * @brief Transition weights of the continuous-time nearest-neighbour walk on hZ.
 *
 * The walk jumps right with rate r and left with rate l; its generator acting
 * on grid functions is r(f_{i+1}-f_i) + l(f_{i-1}-f_i). With
 * r + l = sigma^2/h^2 and r - l = lambda/h it is the central-difference
 * discretization of (sigma^2/2) f'' + lambda f'. The displacement after time t
 * is Skellam(r t, l t) distributed, so the weights are nonnegative, reproduce
 * affine functions, and compose exactly: K(s) * K(t) = K(s+t).
 */

#pragma once

#include <span>
#include <vector>

namespace semiflow {

struct LatticeKernel {
    int offset_lo = 0;             ///< lattice displacement of weights[0]
    std::vector<double> weights;   ///< P(displacement = offset_lo + k)

    int offset_hi() const { return offset_lo + int(weights.size()) - 1; }
};

/// Skellam(mean_right, mean_left) probabilities. Tails whose total mass is
/// below 1e-17 are dropped (not renormalized).
LatticeKernel skellam_kernel(double mean_right, double mean_left);

/// Jump rates (right, left) for diffusion sigma and drift lambda on spacing h.
/// Central rates when |lambda| h <= sigma^2, upwind rates otherwise.
struct JumpRates {
    double right;
    double left;
};
JumpRates jump_rates(double sigma, double drift, double h);

/// Kernel after time t >= 0; t == 0 gives the unit mass at 0.
LatticeKernel lattice_heat_kernel(double t, double sigma, double drift, double h);

/// log(exp(-z) I_j(z)) for j = 0..j_max via Miller's backward recurrence.
std::vector<double> log_scaled_bessel_i(double z, int j_max);

}  // namespace semiflow
