#pragma once

#include <vector>

namespace stdd {

// Nodes and weights of a quadrature rule on some interval.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal subintervals.
QuadratureRule composite_gauss(double a, double b, int panels, int points_per_panel);

}  // namespace stdd
