#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace anisodiff {

// Nodes and weights of a one-dimensional rule, nodes ascending.
struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  double integrate(const std::function<double(double)>& f) const;
};

// n-point Gauss-Legendre rule mapped to [a, b].
Quadrature1D gauss_legendre(std::size_t n, double a, double b);

// Composite Gauss-Legendre rule with panel breakpoints given (ascending).
Quadrature1D composite_gauss(const std::vector<double>& breaks, std::size_t order);

// Panel breakpoints on [a, b]: geometric growth by `ratio` starting at a > 0,
// each panel no wider than max_width.
std::vector<double> graded_breaks(double a, double b, double ratio, double max_width);

// Double-exponential integration on a finite interval; copes with
// integrable algebraic endpoint singularities.
double integrate_endpoint_singular(const std::function<double(double)>& f, double a, double b,
                                   double tol = 1e-14);

}  // namespace anisodiff
