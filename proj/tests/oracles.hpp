// Independent reference solutions used only by the tests.
#pragma once

#include <vector>

namespace oracle {

/// (1 + 2 s^2 t)^{-1/2} exp(-(x + l t)^2 / (1 + 2 s^2 t)): heat flow of exp(-x^2).
double heat_of_gaussian(double x, double t, double sigma = 1.0, double drift = 0.0);

/// Heat flow of the hat max(0, 1 - |x|) under (1/2) u'', closed form via the
/// normal cdf and pdf.
double heat_of_hat(double x, double t);

/// log E[exp(f(x + W_t))] for f(y) = exp(-y^2), by trapezoidal quadrature in y
/// with spacing dy over +-12 sqrt(t).
double hopf_cole(double x, double t, double dy = 0.0025);

/// Explicit finite differences for u_t = (1/2) max_s s^2 u_xx on [-x_max, x_max]
/// with u = 0 at the ends; returns u(t) on the nodes x_j = -x_max + j dx.
std::vector<double> g_heat_fd(const std::vector<double>& u0, double x_max, double dx, double t,
                              const std::vector<double>& sigmas);

/// Value of the piecewise linear interpolant of (x_j, v_j) at x on a uniform grid.
double interpolate(const std::vector<double>& v, double x_min, double dx, double x);

}  // namespace oracle
