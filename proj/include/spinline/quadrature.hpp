#pragma once

#include <vector>

namespace spinline {

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule mapped to [a, b]; weights sum to (b - a).
Quadrature gauss_legendre(int n, double a, double b);

}  // namespace spinline
