#pragma once

#include <vector>

namespace orlicz_ot {

struct QuadratureRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

// n-point Gauss-Legendre rule, exact for polynomials of degree 2n - 1.
QuadratureRule gauss_legendre(int n);

// The same rule mapped to [a, b]; weights sum to b - a.
QuadratureRule gauss_legendre(int n, double a, double b);

}  // namespace orlicz_ot
