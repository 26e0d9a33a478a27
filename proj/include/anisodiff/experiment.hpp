#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "anisodiff/config.hpp"

namespace anisodiff {

struct RunOptions {
  std::string out_dir;      // empty: nothing is written (validate-config only)
  std::string config_path;  // reported in errors and the manifest
  unsigned jobs = 1;
  std::uint64_t seed = 0;
};

struct Assertion {
  std::string name;
  bool pass;
  double value;
  double threshold;
};

struct ExperimentOutcome {
  int exit_code = 0;  // 0 ok, 3 an assertion failed
  std::vector<std::string> files;
  std::vector<Assertion> assertions;
};

// Thrown for any failure inside a mode, prefixed with the config path and mode.
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sum of the configured bumps, each normalized to its own discrete mass.
Field initial_data(const ExperimentConfig& cfg);
// The same data as a pointwise function, for rescaling.
std::function<double(const Vec&)> initial_function(const ExperimentConfig& cfg);

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

}  // namespace anisodiff
