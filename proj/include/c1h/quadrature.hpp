#pragma once

#include <vector>

namespace c1h {

// Gauss-Legendre rule on [0,1]; exact for degree <= 2n-1.
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int n);

}  // namespace c1h
