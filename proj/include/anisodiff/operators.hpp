#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "anisodiff/grid.hpp"
#include "anisodiff/measure.hpp"
#include "anisodiff/symbols.hpp"

namespace anisodiff {

// ---- multiplier backend ----

Field apply_multiplier(const Field& f, const SymbolGrid& sg);

// sum f g dV
double inner_product(const Field& f, const Field& g);

// <L f, f> evaluated in frequency space: (dV / n) sum_k m(k) |F_k|^2.
double spectral_form(const Field& f, const SymbolGrid& sg);

// ---- direct quadrature backend ----

// A pointwise function for the quadrature backend. Decaying functions live on
// R^N; periodic ones repeat with the given periods (and must report their mean).
struct TestFunction {
  std::function<double(const Vec&)> eval;
  std::optional<Vec> periods;
  double mean = 0.0;
  double feature = 1.0;  // smallest length scale the radial rule has to resolve

  std::size_t dim = 1;

  static TestFunction decaying(std::size_t dim, std::function<double(const Vec&)> f, double feature);
  static TestFunction periodic(std::size_t dim, std::function<double(const Vec&)> f, Vec periods, double mean,
                               double feature);
  // Band-limited interpolant of a torus field.
  static TestFunction from_field(const Field& f);
};

struct QuadratureOptions {
  std::size_t order = 6;        // Gauss points per panel
  double ratio = 1.3;           // geometric panel growth
  double r_min_factor = 1e-2;   // r_min = factor * feature
  double r_max_factor = 20.0;   // R_max = factor * length scale
  double length_scale = 0.0;    // 0: largest period, or 16 * feature when decaying
  double panel_factor = 0.5;    // panel width cap = factor * feature

  QuadratureOptions refined() const {
    QuadratureOptions o = *this;
    o.order *= 2;
    return o;
  }
};

struct SplitValue {
  double inner = 0.0;
  double outer = 0.0;
  double total() const { return inner + outer; }
};

// L phi(x) = int dmu int_0^inf (phi(x) - (phi(x + r theta) + phi(x - r theta))/2) r^{-1-alpha} dr,
// split at r = rho.
SplitValue apply_quadrature(const TestFunction& phi, const SpectralMeasure& mu, double alpha, const Vec& x,
                            double rho, const QuadratureOptions& opt = {});

// Same with displacement r (theta', 0).
SplitValue apply_primed_quadrature(const TestFunction& phi, const SpectralMeasure& mu, double alpha,
                                   const Vec& x, double rho, const QuadratureOptions& opt = {});

// Same with displacement r (theta', lambda^{1/alpha - beta} theta_N); the split stays at r = rho.
SplitValue apply_rescaled_quadrature(const TestFunction& phi, const SpectralMeasure& mu, double alpha,
                                     double lambda, double beta, const Vec& x, double rho,
                                     const QuadratureOptions& opt = {});

// ---- structural identities ----

// v(x') = sum over the last axis times dx_N.
Field integrate_out_last(const Field& f);

struct Lemma21Options {
  QuadratureOptions radial;
  std::vector<Vec> points;   // sample x'; empty -> a few points on the first axis
  double window = 0.0;       // x_N integration half-width; 0 -> 16 * feature
  double rho = 1.0;
};

struct Lemma21Result {
  double residual = 0.0;
  std::vector<Vec> points;
  Vec lhs;  // int (L u)(x', x_N) dx_N
  Vec rhs;  // (L~ v)(x')
};

// Compares the x_N-integral of L u with the projected operator applied to
// v = int u dx_N. u must decay in every direction.
Lemma21Result lemma21_residual(const TestFunction& u, const SpectralMeasure& mu, double alpha,
                               const Lemma21Options& opt = {});

struct TruncationRow {
  double lambda;
  double outer_l1;
  double inner_l1;
  double inner_linf;
};

struct TruncationReport {
  std::vector<TruncationRow> rows;
  double inner_slope = 0.0;   // log-log slope of inner_l1 against lambda
  double target_slope = 0.0;  // 1/alpha - beta
  bool outer_monotone = false;
};

TruncationReport truncated_convergence_report(const Field& phi, const SpectralMeasure& mu, double alpha,
                                              double beta, double rho, const std::vector<double>& lambdas);

}  // namespace anisodiff
