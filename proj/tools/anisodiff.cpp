// Command-line front end: one experiment per invocation.
#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "anisodiff/config.hpp"
#include "anisodiff/experiment.hpp"

int main(int argc, char** argv) {
  using namespace anisodiff;
  spdlog::set_default_logger(spdlog::stderr_color_mt("anisodiff"));
  spdlog::set_level(spdlog::level::info);
  if (const char* lvl = std::getenv("ANISODIFF_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));

  CLI::App app{"Anisotropic nonlocal diffusion-convection laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  for (const auto& mode : kModes) {
    auto* sub = app.add_subcommand(mode, "run the " + mode + " mode");
    sub->add_option("--config", config_path, "TOML configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "recorded in the manifest");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string mode = app.get_subcommands().front()->get_name();

  try {
    const ExperimentConfig cfg = load_config(config_path, mode);
    RunOptions opt{out_dir, config_path, jobs, seed};
    const auto outcome = run_experiment(cfg, opt);
    for (const auto& a : outcome.assertions)
      std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << " value=" << a.value << " threshold=" << a.threshold
                << "\n";
    if (!out_dir.empty()) std::cout << "wrote " << outcome.files.size() << " files to " << out_dir << "\n";
    return outcome.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": invalid configuration\n";
    for (const auto& m : e.messages()) std::cerr << "  " << m << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
