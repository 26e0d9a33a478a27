#include "anisodiff/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace anisodiff {

double Quadrature1D::integrate(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
  return s;
}

namespace {

// Reference rules on [-1, 1], cached by order.
const Quadrature1D& reference_rule(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<Quadrature1D>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  auto rule = std::make_unique<Quadrature1D>();
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
  if (!t) throw std::runtime_error("gauss_legendre: allocation failed");
  rule->nodes.resize(n);
  rule->weights.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    gsl_integration_glfixed_point(-1.0, 1.0, i, &rule->nodes[i], &rule->weights[i], t);
  gsl_integration_glfixed_table_free(t);
  auto& ref = *rule;
  cache.emplace(n, std::move(rule));
  return ref;
}

}  // namespace

Quadrature1D gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  const auto& ref = reference_rule(n);
  Quadrature1D q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  for (std::size_t i = 0; i < n; ++i) {
    q.nodes[i] = c + h * ref.nodes[i];
    q.weights[i] = h * ref.weights[i];
  }
  return q;
}

Quadrature1D composite_gauss(const std::vector<double>& breaks, std::size_t order) {
  Quadrature1D q;
  if (breaks.size() < 2) return q;
  const auto& ref = reference_rule(order);
  q.nodes.reserve((breaks.size() - 1) * order);
  q.weights.reserve((breaks.size() - 1) * order);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double h = 0.5 * (breaks[p + 1] - breaks[p]), c = 0.5 * (breaks[p + 1] + breaks[p]);
    for (std::size_t i = 0; i < order; ++i) {
      q.nodes.push_back(c + h * ref.nodes[i]);
      q.weights.push_back(h * ref.weights[i]);
    }
  }
  return q;
}

std::vector<double> graded_breaks(double a, double b, double ratio, double max_width) {
  std::vector<double> br{a};
  if (!(b > a)) return br;
  double x = a;
  while (x < b) {
    double w = x * (ratio - 1.0);
    if (w <= 0.0 || w > max_width) w = max_width;
    x = std::min(b, x + w);
    // avoid a sliver at the end
    if (b - x < 1e-3 * w) x = b;
    br.push_back(x);
  }
  return br;
}

double integrate_endpoint_singular(const std::function<double(double)>& f, double a, double b,
                                   double tol) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, tol);
}

}  // namespace anisodiff
