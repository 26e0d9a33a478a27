#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "anisodiff/grid.hpp"
#include "anisodiff/solver.hpp"

namespace anisodiff {

enum class Regime { Diffusion, Critical, Convection };

std::string to_string(Regime r);

struct RegimeParams {
  double alpha, q;
  std::size_t dim;
  double q_star;
  Regime regime;
  double beta, gamma;
  // exponent of max{N/alpha, (1/q)(1 + (N-1)/alpha)}
  double decay_rate;
  // q = alpha in (0,1) with N = 1 lies outside the known theory; still classified.
  bool outside_theory = false;

  // Target decay exponent of ||u||_p, i.e. -decay_rate * (1 - 1/p); 0 for p = 0 (mass).
  double target_slope(double p) const;
  // Exponent c in the convection coefficient lambda^{-c} of the rescaled equation.
  double convection_exponent() const;
};

// Accepts alpha in (0,2]; alpha = 2 gives the local case.
RegimeParams classify(double alpha, double q, std::size_t dim);

void write_regime_table(const std::vector<RegimeParams>& rows, std::ostream& os);

// lambda^gamma u0(lambda^{1/alpha} x', lambda^beta x_N), renormalized to the
// discrete mass of u0 on the grid.
Field scale_initial_data(const std::function<double(const Vec&)>& u0, const PeriodicGrid& grid, double lambda,
                         const RegimeParams& p);
Field scale_initial_data(const Field& u0, double lambda, const RegimeParams& p);

// Solver configuration for the rescaled function u_lambda: same measure and
// grid, convection coefficient and multiplier adjusted for lambda.
SolverConfig rescaled_config(const SolverConfig& cfg, double lambda, const RegimeParams& p);

struct FamilyDistances {
  std::vector<double> lambdas;
  std::vector<std::vector<double>> distance;  // L1 at t_ref
  double top_half_max = 0.0;
  double bottom_half_max = 0.0;
  std::vector<Field> states;
};

FamilyDistances rescaled_family_distance(const SolverConfig& cfg, const std::function<double(const Vec&)>& u0,
                                         const std::vector<double>& lambdas, double t_ref = 1.0,
                                         unsigned jobs = 1);

struct FitOptions {
  double t_lo = 0.0;
  double t_hi = std::numeric_limits<double>::infinity();
  std::size_t min_samples = 10;
  double transient = 0.0;  // windows starting earlier are rejected
};

struct FitResult {
  double slope = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

FitResult fit_power_law(const Vec& t, const Vec& y, const FitOptions& opt);
// p in {1, 2, inf}; p = 0 selects the mass column.
FitResult fit_decay_rate(const DiagnosticsSeries& s, double p, const FitOptions& opt);

// Reruns a decay fit on a torus doubled along every axis (same spacing). The
// run counts as domain-certified when the fitted slopes differ by < tolerance.
struct DomainCheck {
  FitResult base, doubled;
  double shift = 0.0;
  bool certified = false;
};
DomainCheck domain_doubling_check(const SolverConfig& cfg, const std::function<double(const Vec&)>& u0, double p,
                                  const FitOptions& opt, double tolerance = 0.01);

// Five times the diffusive time of a bump of the given width.
double transient_time(double width, double alpha);

struct ProfileResult {
  PeriodicGrid profile_grid;     // y-grid of the latest time
  Field mean_profile;
  std::vector<double> times;
  std::vector<double> profile_mass;  // integral of each mapped profile on its own grid
  double defect = 0.0;               // max pairwise L1 distance on the common grid
};

// Runs cfg from M delta_0 (width 0: a discrete delta at the origin node; width > 0:
// a bump of that width) and maps each late snapshot to profile coordinates
// y = (x' t^{-1/alpha}, x_N t^{-beta}).
ProfileResult self_similar_profile(const SolverConfig& cfg, double mass, const std::vector<double>& times,
                                   double width = 0.0, double escape_tolerance = 0.05);

double oleinik_linf_bound(double c, double k, double l1);

}  // namespace anisodiff
