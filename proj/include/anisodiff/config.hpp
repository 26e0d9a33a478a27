#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisodiff/measure.hpp"
#include "anisodiff/solver.hpp"
#include "anisodiff/symbols.hpp"

namespace anisodiff {

// All violations found in a configuration, each prefixed with its line number
// where one is known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> msgs);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

struct BumpSpec {
  double mass = 1.0;
  double width = 1.0;
  Vec center;
};

struct ExperimentParams {
  std::string mode = "simulate";
  std::vector<double> lambdas;
  double t_ref = 1.0;
  std::vector<double> p_list{std::numeric_limits<double>::infinity()};
  double window_lo = 0.0;
  double window_hi = std::numeric_limits<double>::infinity();
  double tolerance = std::numeric_limits<double>::quiet_NaN();  // NaN: mode default
  double rho = 1.0;
  double beta = std::numeric_limits<double>::quiet_NaN();       // NaN: from the regime
  double test_width = 1.0;
  SymbolKind symbol_kind = SymbolKind::Full;
  Truncation truncation = Truncation::None;
  double symbol_lambda = 1.0;
  double symbol_beta = 0.0;
  std::vector<Vec> points;
  std::string diagnostics_path;
  unsigned sample_count = 4;
};

struct ExperimentConfig {
  SolverConfig solver;
  Vec drift;                      // rotation vector a
  std::vector<BumpSpec> bumps;
  ExperimentParams experiment;
  std::string text;               // source, for hashing
};

extern const std::vector<std::string> kModes;

// A nonempty mode overrides experiment.mode (the CLI subcommand).
ExperimentConfig parse_config(const std::string& text, const std::string& mode = "");
ExperimentConfig load_config(const std::string& path, const std::string& mode = "");

// Measures in the [measure] table layout.
std::string measure_to_toml(const SpectralMeasure& mu);

}  // namespace anisodiff
