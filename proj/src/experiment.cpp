#include "anisodiff/experiment.hpp"

#include <boost/version.hpp>
#include <fftw3.h>
#include <gsl/gsl_version.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "anisodiff/asymptotics.hpp"
#include "anisodiff/operators.hpp"

namespace anisodiff {

namespace fs = std::filesystem;

namespace {

double bump_profile(double s) { return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0; }

class Output {
 public:
  explicit Output(std::string dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }
  bool enabled() const { return !dir_.empty(); }
  std::string path(const std::string& name) {
    files_.push_back(name);
    const fs::path p = fs::path(dir_) / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p.string();
  }
  // Opens a CSV with fixed 17-digit formatting.
  std::ofstream csv(const std::string& name) {
    std::ofstream os(path(name));
    if (!os) throw std::runtime_error("cannot write " + name);
    os << std::setprecision(17);
    return os;
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  Output out;
  std::vector<Assertion> checks;

  void check(const std::string& name, bool pass, double value, double threshold) {
    checks.push_back({name, pass, value, threshold});
    spdlog::log(pass ? spdlog::level::info : spdlog::level::warn, "{}: {} (value {:.6g}, threshold {:.6g})", name,
                pass ? "pass" : "FAIL", value, threshold);
  }
  double tolerance(double def) const {
    return std::isnan(cfg.experiment.tolerance) ? def : cfg.experiment.tolerance;
  }
};

RegimeParams regime_of(const SolverConfig& s) {
  return s.convection ? classify(s.alpha, s.q, s.grid.dim()) : classify(s.alpha, 1e9, s.grid.dim());
}

double smallest_width(const ExperimentConfig& cfg) {
  double w = INFINITY;
  for (const auto& b : cfg.bumps) w = std::min(w, b.width);
  return std::isfinite(w) ? w : 0.0;
}

void write_regime(Context& c) {
  const auto& s = c.cfg.solver;
  auto os = c.out.csv("regime.csv");
  write_regime_table({classify(s.alpha, s.q, s.grid.dim())}, os);
}

RunResult simulate(Context& c) {
  const Field u0 = initial_data(c.cfg);
  Solver solver(c.cfg.solver);
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r = solver.run(u0);
  spdlog::info("simulate: {} steps in {:.2f} s", r.steps,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  {
    auto os = c.out.csv("diagnostics.csv");
    write_diagnostics_csv(r.diagnostics, os);
  }
  for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
    std::ostringstream name;
    name << "snapshots/snap_" << std::setw(4) << std::setfill('0') << i << ".bin";
    write_field_binary(r.snapshots[i].u, c.out.path(name.str()));
  }
  write_field_binary(r.final_state, c.out.path("final_state.bin"));
  {
    auto os = c.out.csv("snapshots/times.csv");
    os << "index,t\n";
    for (std::size_t i = 0; i < r.snapshots.size(); ++i) os << i << "," << r.snapshots[i].t << "\n";
  }
  write_regime(c);
  c.check("mass_conservation", r.max_mass_drift < 1e-12, r.max_mass_drift, 1e-12);
  const double excess = r.max_seen / r.max0 - 1.0;
  c.check("max_principle", excess <= 1e-12, excess, 1e-12);
  c.check("nonnegativity", r.min_seen >= 0.0, r.min_seen, 0.0);
  return r;
}

void fit_decay(Context& c) {
  const auto& ex = c.cfg.experiment;
  DiagnosticsSeries series;
  if (!ex.diagnostics_path.empty()) {
    std::ifstream is(ex.diagnostics_path);
    if (!is) throw std::runtime_error("cannot read diagnostics " + ex.diagnostics_path);
    series = read_diagnostics_csv(is);
  } else {
    series = simulate(c).diagnostics;
  }
  const auto reg = regime_of(c.cfg.solver);
  FitOptions fo;
  fo.t_lo = ex.window_lo;
  fo.t_hi = ex.window_hi;
  fo.transient = transient_time(smallest_width(c.cfg), c.cfg.solver.alpha);
  const double tol = c.tolerance(0.05);
  auto os = c.out.csv("fit_report.csv");
  os << "alpha,q,p,slope,stderr,target,pass\n";
  for (double p : ex.p_list) {
    const FitResult f = fit_decay_rate(series, p, fo);
    const double target = reg.target_slope(p);
    const bool pass = std::abs(f.slope - target) <= tol;
    os << c.cfg.solver.alpha << "," << c.cfg.solver.q << "," << p << "," << f.slope << "," << f.stderr_ << ","
       << target << "," << (pass ? "true" : "false") << "\n";
    std::ostringstream name;
    name << "decay_slope_p" << p;
    c.check(name.str(), pass, f.slope - target, tol);
  }
}

void rescale_sweep(Context& c) {
  const auto& ex = c.cfg.experiment;
  const auto fam =
      rescaled_family_distance(c.cfg.solver, initial_function(c.cfg), ex.lambdas, ex.t_ref, c.opt.jobs);
  {
    auto os = c.out.csv("family_distance.csv");
    os << "lambda_i,lambda_j,l1_distance\n";
    for (std::size_t i = 0; i < fam.lambdas.size(); ++i)
      for (std::size_t j = i + 1; j < fam.lambdas.size(); ++j)
        os << fam.lambdas[i] << "," << fam.lambdas[j] << "," << fam.distance[i][j] << "\n";
  }
  for (std::size_t i = 0; i < fam.states.size(); ++i) {
    std::ostringstream name;
    name << "lambda_" << i << "/state.bin";
    write_field_binary(fam.states[i], c.out.path(name.str()));
  }
  write_regime(c);
  const double ratio = c.tolerance(1.0 / 3.0);
  c.check("cauchy_trend", fam.top_half_max < ratio * fam.bottom_half_max,
          fam.bottom_half_max > 0 ? fam.top_half_max / fam.bottom_half_max : INFINITY, ratio);
}

SymbolSpec symbol_spec_of(const ExperimentConfig& cfg) {
  const auto& ex = cfg.experiment;
  const auto& mu = cfg.solver.measure;
  const double a = cfg.solver.alpha;
  SymbolSpec s = SymbolSpec::full(mu, a);
  switch (ex.symbol_kind) {
    case SymbolKind::Full: break;
    case SymbolKind::Primed: s = SymbolSpec::primed(mu, a); break;
    case SymbolKind::Tilde: s = SymbolSpec::tilde(mu, a); break;
    case SymbolKind::Rescaled: s = SymbolSpec::rescaled(mu, a, ex.symbol_lambda, ex.symbol_beta); break;
  }
  if (ex.truncation == Truncation::Inner) s = s.inner(ex.rho);
  if (ex.truncation == Truncation::Outer) s = s.outer(ex.rho);
  return s;
}

// Weight c when mu is c times the sum of the coordinate atoms (either sign), else NaN.
double canonical_axes_weight(const SpectralMeasure& mu) {
  if (mu.kind() != SpectralMeasure::Kind::Atoms) return NAN;
  const std::size_t n = mu.dim();
  Vec w(n, 0.0);
  for (const auto& a : mu.atom_list()) {
    std::size_t hit = n;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(std::abs(a.dir[j]) - 1.0) < 1e-15) hit = j;
    if (hit == n) return NAN;
    w[hit] += a.weight;
  }
  for (double v : w)
    if (v <= 0.0 || std::abs(v - w[0]) > 1e-14 * w[0]) return NAN;
  return w[0];
}

void symbol_dump(Context& c) {
  const SymbolSpec spec = symbol_spec_of(c.cfg);
  const auto& grid = c.cfg.solver.grid;
  const SymbolGrid sg = build_symbol_grid(spec, spec.kind == SymbolKind::Tilde ? grid.drop_last() : grid);
  {
    auto os = c.out.csv("symbol.csv");
    write_symbol_csv(sg, os);
  }
  const double w = canonical_axes_weight(spec.measure);
  if (spec.kind == SymbolKind::Full && spec.truncation == Truncation::None && !std::isnan(w)) {
    const double ca = w * c_alpha_total(spec.alpha);
    double err = 0.0;
    const auto& g = sg.grid;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.unflatten(i, idx);
      double ref = 0.0;
      for (std::size_t j = 0; j < g.dim(); ++j) ref += std::pow(std::abs(g.angular_frequency(j, idx[j])), spec.alpha);
      ref *= ca;
      if (ref > 0.0) err = std::max(err, std::abs(sg.values[i] - ref) / ref);
    }
    const double tol = c.tolerance(1e-10);
    c.check("canonical_axes_symbol", err < tol, err, tol);
  }
}

void project_measure(Context& c) {
  const auto& mu = c.cfg.solver.measure;
  const double a = c.cfg.solver.alpha;
  const SpectralMeasure p = project(mu, a);
  {
    std::ofstream os(c.out.path("projected_measure.toml"));
    os << measure_to_toml(p);
  }
  {
    auto os = c.out.csv("projected_atoms.csv");
    for (std::size_t j = 0; j < p.dim(); ++j) os << "theta" << j << ",";
    os << "weight\n";
    for (const auto& n : p.nodes()) {
      for (double v : n.point) os << v << ",";
      os << n.weight << "\n";
    }
  }
  const double w = canonical_axes_weight(mu);
  if (!std::isnan(w)) {
    // expected: the first N-1 coordinate atoms with unchanged weight
    double err = 0.0;
    bool shape = p.kind() == SpectralMeasure::Kind::Atoms && p.atom_list().size() == mu.dim() - 1;
    if (shape) {
      Vec got(p.dim(), 0.0);
      for (const auto& at : p.atom_list()) {
        std::size_t hit = p.dim();
        for (std::size_t j = 0; j < p.dim(); ++j)
          if (std::abs(std::abs(at.dir[j]) - 1.0) < 1e-15) hit = j;
        if (hit == p.dim()) shape = false;
        else got[hit] += at.weight;
      }
      for (double g : got) err = std::max(err, std::abs(g - w) / w);
    }
    c.check("canonical_projection_atoms", shape, shape ? 1.0 : 0.0, 1.0);
    c.check("canonical_projection_weights", shape && err < 1e-14, err, 1e-14);
  }
}

Field gaussian_field(const PeriodicGrid& g, double width) {
  return Field::sample(g, [width](const Vec& x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return std::exp(-r2 / (2.0 * width * width));
  });
}

void truncation_report(Context& c) {
  const auto& s = c.cfg.solver;
  const auto& ex = c.cfg.experiment;
  const double beta = std::isnan(ex.beta) ? classify(s.alpha, s.q, s.grid.dim()).beta : ex.beta;
  const auto rep =
      truncated_convergence_report(gaussian_field(s.grid, ex.test_width), s.measure, s.alpha, beta, ex.rho, ex.lambdas);
  {
    auto os = c.out.csv("truncation_report.csv");
    os << "lambda,outer_l1,inner_l1,inner_linf\n";
    for (const auto& r : rep.rows) os << r.lambda << "," << r.outer_l1 << "," << r.inner_l1 << "," << r.inner_linf << "\n";
  }
  const double tol = c.tolerance(0.15);
  c.check("inner_rate", std::abs(rep.inner_slope - rep.target_slope) <= tol, rep.inner_slope - rep.target_slope, tol);
  c.check("outer_monotone", rep.outer_monotone, rep.outer_monotone ? 1.0 : 0.0, 1.0);
}

void lemma21_check(Context& c) {
  const auto& s = c.cfg.solver;
  const auto& ex = c.cfg.experiment;
  const double w = ex.test_width;
  const std::size_t n = s.grid.dim();
  const auto u = TestFunction::decaying(
      n,
      [w](const Vec& x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return std::exp(-r2 / (2.0 * w * w));
      },
      w);
  Lemma21Options lo;
  lo.rho = ex.rho;
  lo.points = ex.points;
  for (const auto& p : lo.points)
    if (p.size() != n - 1) throw std::invalid_argument("experiment.points entries must have N-1 components");
  const auto res = lemma21_residual(u, s.measure, s.alpha, lo);
  {
    auto os = c.out.csv("lemma21.csv");
    for (std::size_t j = 0; j + 1 < n; ++j) os << "x" << j << ",";
    os << "lhs,rhs\n";
    for (std::size_t i = 0; i < res.points.size(); ++i) {
      for (double v : res.points[i]) os << v << ",";
      os << res.lhs[i] << "," << res.rhs[i] << "\n";
    }
  }
  const double tol = c.tolerance(1e-5);
  c.check("projection_identity", res.residual < tol, res.residual, tol);
}

std::string hex_hash(const std::string& text) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << std::hash<std::string>{}(text);
  return os.str();
}

}  // namespace

Field initial_data(const ExperimentConfig& cfg) {
  Field u(cfg.solver.grid);
  for (const auto& b : cfg.bumps) {
    const Field f = initial_bump(cfg.solver.grid, b.mass, b.width, b.center);
    for (std::size_t i = 0; i < u.data.size(); ++i) u.data[i] += f.data[i];
  }
  return u;
}

std::function<double(const Vec&)> initial_function(const ExperimentConfig& cfg) {
  struct Term {
    double scale, width;
    Vec center;
  };
  std::vector<Term> terms;
  const auto& g = cfg.solver.grid;
  for (const auto& b : cfg.bumps) {
    // same normalization as initial_bump: discrete mass of the raw profile
    double raw = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec x = g.point(i);
      double r2 = 0.0;
      for (std::size_t j = 0; j < g.dim(); ++j) {
        double d = x[j] - b.center[j];
        d -= g.extent(j) * std::round(d / g.extent(j));
        r2 += d * d;
      }
      raw += bump_profile(r2 / (b.width * b.width));
    }
    raw *= g.cell_volume();
    if (!(raw > 0.0)) throw std::invalid_argument("bump: no grid point inside the support");
    terms.push_back({b.mass / raw, b.width, b.center});
  }
  return [terms](const Vec& x) {
    double v = 0.0;
    for (const auto& t : terms) {
      double r2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - t.center[j]) * (x[j] - t.center[j]);
      v += t.scale * bump_profile(r2 / (t.width * t.width));
    }
    return v;
  };
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const std::string& mode = cfg.experiment.mode;
  Context c{cfg, opt, Output(opt.out_dir), {}};
  try {
    if (mode == "validate-config") {
      spdlog::info("config valid: N = {}, alpha = {}, q = {}, regime {}", cfg.solver.grid.dim(), cfg.solver.alpha,
                   cfg.solver.q, to_string(classify(cfg.solver.alpha, cfg.solver.q, cfg.solver.grid.dim()).regime));
      if (!c.out.enabled()) return {};
    } else {
      if (!c.out.enabled()) throw std::invalid_argument("an output directory is required");
      if (mode == "simulate") simulate(c);
      else if (mode == "fit-decay") fit_decay(c);
      else if (mode == "rescale-sweep") rescale_sweep(c);
      else if (mode == "symbol-dump") symbol_dump(c);
      else if (mode == "project-measure") project_measure(c);
      else if (mode == "truncation-report") truncation_report(c);
      else if (mode == "lemma21-check") lemma21_check(c);
      else throw std::invalid_argument("unknown mode " + mode);
    }
  } catch (const std::exception& e) {
    throw ExperimentError("config " + (opt.config_path.empty() ? std::string("<memory>") : opt.config_path) +
                          ", mode " + mode + ": " + e.what());
  }

  ExperimentOutcome res;
  res.assertions = c.checks;
  for (const auto& a : c.checks)
    if (!a.pass) res.exit_code = 3;

  const auto reg = classify(cfg.solver.alpha, cfg.solver.q, cfg.solver.grid.dim());
  nlohmann::json m;
  m["mode"] = mode;
  m["config_path"] = opt.config_path;
  m["config_hash"] = hex_hash(cfg.text);
  m["seed"] = opt.seed;
  m["jobs"] = opt.jobs;
  m["regime"] = to_string(reg.regime);
  m["outside_theory"] = reg.outside_theory;
  nlohmann::json versions;
  versions["anisodiff"] = "1.0.0";
  versions["fftw"] = std::string(fftw_version);
  versions["gsl"] = std::string(GSL_VERSION);
  versions["boost"] = std::string(BOOST_LIB_VERSION);
  versions["compiler"] = std::string(__VERSION__);
  m["versions"] = versions;
  m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& a : c.checks)
    checks.push_back({{"name", a.name}, {"pass", a.pass}, {"value", a.value}, {"threshold", a.threshold}});
  m["assertions"] = checks;
  m["status"] = res.exit_code == 0 ? "pass" : "fail";
  auto files = c.out.files();
  files.push_back("manifest.json");
  m["files"] = files;
  res.files = files;
  std::ofstream os(fs::path(opt.out_dir) / "manifest.json");
  os << m.dump(2) << "\n";
  return res;
}

}  // namespace anisodiff
