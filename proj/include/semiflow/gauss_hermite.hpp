#pragma once

#include <vector>

namespace semiflow {

/// Nodes and weights for \int e^{-z^2} g(z) dz ~ sum_m w_m g(z_m).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Newton iteration on the orthonormal Hermite recurrence; n in [1, 256].
GaussHermiteRule gauss_hermite_rule(int n);

}  // namespace semiflow
