#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "anisodiff/grid.hpp"
#include "anisodiff/kernel.hpp"
#include "anisodiff/measure.hpp"

namespace anisodiff {

// Which operator of the family the symbol belongs to.
//   Full      int |theta.xi|^a K dmu
//   Primed    theta replaced by (theta', 0); acts on xi in R^N
//   Tilde     the projected operator on R^{N-1}
//   Rescaled  theta replaced by (theta', lambda^{1/a - beta} theta_N)
enum class SymbolKind { Full, Primed, Tilde, Rescaled };
// K = C_alpha (none), c_leq(rho .) (inner), c_gt(rho .) (outer)
enum class Truncation { None, Inner, Outer };

struct SymbolSpec {
  SpectralMeasure measure;
  double alpha;
  SymbolKind kind = SymbolKind::Full;
  Truncation truncation = Truncation::None;
  double rho = std::numeric_limits<double>::infinity();
  double lambda = 1.0;
  double beta = 0.0;

  SymbolSpec(SpectralMeasure mu, double a) : measure(std::move(mu)), alpha(a) {}

  static SymbolSpec full(SpectralMeasure mu, double a) { return {std::move(mu), a}; }
  static SymbolSpec primed(SpectralMeasure mu, double a);
  static SymbolSpec tilde(SpectralMeasure mu, double a);
  static SymbolSpec rescaled(SpectralMeasure mu, double a, double lambda, double beta);
  SymbolSpec inner(double r) const;
  SymbolSpec outer(double r) const;

  // Dimension of the frequency variable (N-1 for Tilde).
  std::size_t frequency_dim() const;
  void validate() const;
  std::string describe() const;
};

double evaluate_symbol(const SymbolSpec& spec, const Vec& xi);

// Multiplier values on the full DFT lattice of a grid, row-major in DFT index order.
struct SymbolGrid {
  PeriodicGrid grid;
  Vec values;
  double alpha = 1.0;
  std::string provenance;

  // Values in the half-complex layout used by real transforms.
  Vec half_layout() const;
};

SymbolGrid build_symbol_grid(const SymbolSpec& spec, const PeriodicGrid& grid);

// Columns k0..k{N-1} (signed wavenumbers), xi0.., value.
void write_symbol_csv(const SymbolGrid& sg, std::ostream& os);

}  // namespace anisodiff
