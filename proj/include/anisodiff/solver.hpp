#pragma once

#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisodiff/grid.hpp"
#include "anisodiff/measure.hpp"
#include "anisodiff/symbols.hpp"

namespace anisodiff {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OperatorKind { Full, Primed, Rescaled, None };
enum class Splitting { Lie, Strang };

// du/dt + L u + k d_{x_N}(u^q) = eps Lap u on the torus, drift along the last axis.
struct SolverConfig {
  double alpha = 1.5;
  double q = 2.0;
  double epsilon = 0.0;
  SpectralMeasure measure = SpectralMeasure::isotropic(1, 1.0);
  OperatorKind op = OperatorKind::Full;
  double lambda = 1.0;  // Rescaled only
  double beta = 0.0;    // Rescaled only
  bool convection = true;
  double convection_coeff = 1.0;  // k above
  PeriodicGrid grid;
  double horizon = 1.0;
  double cfl = 0.45;
  Splitting splitting = Splitting::Strang;
  std::vector<double> snapshot_times;
  std::vector<double> diagnostic_times;
  double dt_max = std::numeric_limits<double>::infinity();
  double dt_rel = 0.05;       // dt <= dt_rel * max(t, dt_rel_floor)
  double dt_rel_floor = 0.0;  // 0 -> 1e-3 * horizon
  double blowup_factor = 2.0;
  double degeneracy_threshold = 1e-10;

  void validate() const;
  // Multiplier of the diffusion substep, without the viscous part.
  SymbolSpec symbol_spec() const;
};

struct DiagnosticsRecord {
  double t, mass, l1, l2, linf, min, energy_frac, energy_visc, oleinik, tail;
};

struct DiagnosticsSeries {
  std::vector<DiagnosticsRecord> records;

  Vec column(const std::string& name) const;
  Vec times() const { return column("t"); }
};

void write_diagnostics_csv(const DiagnosticsSeries& s, std::ostream& os);
DiagnosticsSeries read_diagnostics_csv(std::istream& is);

struct Snapshot {
  double t;
  Field u;
};

struct RunResult {
  std::vector<Snapshot> snapshots;
  DiagnosticsSeries diagnostics;
  Field final_state;
  std::size_t steps = 0;
  double max_clip_fraction = 0.0;  // largest per-step clipped mass / total mass
  double mass0 = 0.0;
  double max0 = 0.0;
  double max_seen = 0.0;            // sup over steps of max u
  double min_seen = 0.0;            // inf over steps of min u
  double max_mass_drift = 0.0;      // sup over steps of |mass - mass0| / mass0
};

// Smooth bump exp(-1/(1 - |x-c|^2/w^2)) scaled to discrete mass exactly M.
Field initial_bump(const PeriodicGrid& grid, double mass, double width, const Vec& center);

double cfl_dt(const Field& u, const SolverConfig& cfg);

// Oleinik-type one-sided statistic along the last axis (see the README).
double oleinik_statistic(const Field& u, double q);

// Largest slice mass int u dx_N over x' (the total mass when N = 1).
double max_slice_mass(const Field& u);

class Solver {
 public:
  explicit Solver(SolverConfig cfg);
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  const SolverConfig& config() const { return cfg_; }
  const SymbolGrid& symbol() const { return symbol_; }

  // One splitting step; returns the mass removed by clipping negative values.
  double step(Field& u, double dt);
  DiagnosticsRecord diagnostics(const Field& u, double t);

  RunResult run(const Field& u0);

 private:
  void convect(Field& u, double h) const;
  double diffuse(Field& u, double dt);

  SolverConfig cfg_;
  SymbolGrid symbol_;
  Vec half_m_;     // operator multiplier, half layout
  Vec half_visc_;  // |k|^2, half layout
  std::unique_ptr<RealFft> fft_;
  std::vector<std::complex<double>> work_;
};

// Worst conservation figures over every run() and contraction_check() in this
// process. Thread-safe.
struct RunAudit {
  std::size_t runs = 0;
  double worst_mass_drift = 0.0;
  double worst_max_excess = -1.0;  // max u(t) / max u0 - 1
};
RunAudit run_audit();
void reset_run_audit();

// Two trajectories advanced with a common dt sequence; L1 distance at each
// diagnostic time.
struct ContractionSeries {
  Vec t;
  Vec distance;
  bool ordered = true;  // u <= ubar nodewise throughout (if so at t = 0)
};
ContractionSeries contraction_check(const SolverConfig& cfg, const Field& u0, const Field& ubar0);

}  // namespace anisodiff
