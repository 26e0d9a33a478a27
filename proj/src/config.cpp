#include "anisodiff/config.hpp"

#include <toml.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace anisodiff {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& m : v) s += (s.empty() ? "" : "\n") + m;
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> msgs)
    : std::runtime_error(join(msgs)), messages_(std::move(msgs)) {}

const std::vector<std::string> kModes = {"simulate",          "rescale-sweep", "fit-decay",      "symbol-dump",
                                         "project-measure",   "truncation-report", "lemma21-check", "validate-config"};

namespace {

struct Errors {
  std::vector<std::string> list;
  void add(const toml::node* n, const std::string& msg) {
    std::ostringstream os;
    if (n && n->source().begin.line > 0) os << "line " << n->source().begin.line << ": ";
    os << msg;
    list.push_back(os.str());
  }
};

// Typed access to one table; remembers consumed keys so the rest can be
// reported as unknown.
class Section {
 public:
  Section(const toml::table* t, std::string name, Errors& e) : t_(t), name_(std::move(name)), e_(e) {}

  bool present() const { return t_ != nullptr; }
  const toml::node* node(const std::string& key) {
    seen_.insert(key);
    return t_ ? t_->get(key) : nullptr;
  }
  std::string where(const std::string& key) const { return name_ + "." + key; }

  std::optional<double> number(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<double>()) return *v;
    e_.add(n, where(key) + " must be a number");
    return std::nullopt;
  }
  double number(const std::string& key, double def) { return number(key).value_or(def); }
  double required(const std::string& key) {
    auto v = number(key);
    if (!v && t_ && !t_->get(key)) e_.add(nullptr, "missing required key " + where(key));
    return v.value_or(std::numeric_limits<double>::quiet_NaN());
  }
  std::optional<std::string> string(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<std::string>()) return *v;
    e_.add(n, where(key) + " must be a string");
    return std::nullopt;
  }
  std::optional<bool> boolean(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<bool>()) return *v;
    e_.add(n, where(key) + " must be a boolean");
    return std::nullopt;
  }
  std::optional<Vec> numbers(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    return to_vec(n, where(key));
  }
  std::optional<Vec> to_vec(const toml::node* n, const std::string& what) {
    const auto* arr = n->as_array();
    if (!arr) {
      e_.add(n, what + " must be an array of numbers");
      return std::nullopt;
    }
    Vec out;
    for (const auto& el : *arr) {
      auto v = el.value<double>();
      if (!v) {
        e_.add(&el, what + " must contain numbers only");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  }
  const toml::table* table(const std::string& key) {
    const auto* n = node(key);
    if (!n) return nullptr;
    if (const auto* t = n->as_table()) return t;
    e_.add(n, where(key) + " must be a table");
    return nullptr;
  }
  const toml::array* array(const std::string& key) {
    const auto* n = node(key);
    if (!n) return nullptr;
    if (const auto* a = n->as_array()) return a;
    e_.add(n, where(key) + " must be an array");
    return nullptr;
  }
  void finish() {
    if (!t_) return;
    for (auto&& [k, v] : *t_) {
      const std::string key(k.str());
      if (!seen_.count(key)) e_.add(&v, "unknown key '" + where(key) + "'");
    }
  }
  Errors& errors() { return e_; }

 private:
  const toml::table* t_;
  std::string name_;
  Errors& e_;
  std::set<std::string> seen_;
};

std::optional<SpectralMeasure> parse_measure(Section& s, std::size_t dim) {
  Errors& e = s.errors();
  const auto type = s.string("type");
  if (!type) {
    if (s.present()) e.add(nullptr, "missing required key measure.type");
    return std::nullopt;
  }
  try {
    if (*type == "isotropic") {
      const double c = s.number("c", 1.0);
      if (!(c > 0.0)) {
        e.add(s.node("c"), "measure.c must be positive");
        return std::nullopt;
      }
      return SpectralMeasure::isotropic(dim, c);
    }
    if (*type == "atoms") {
      const auto* arr = s.array("atoms");
      if (!arr || arr->empty()) {
        e.add(nullptr, "measure.atoms must list at least one atom");
        return std::nullopt;
      }
      std::vector<Atom> atoms;
      bool ok = true;
      for (const auto& el : *arr) {
        const auto* t = el.as_table();
        if (!t) {
          e.add(&el, "each atom must be a table {dir = [...], w = ...}");
          ok = false;
          continue;
        }
        Section a(t, "measure.atoms[]", e);
        auto dir = a.numbers("dir");
        auto w = a.number("w");
        a.finish();
        if (!dir || !w) {
          e.add(&el, "atom needs dir and w");
          ok = false;
          continue;
        }
        if (dir->size() != dim) {
          e.add(&el, "atom direction must have " + std::to_string(dim) + " components");
          ok = false;
          continue;
        }
        if (!(*w > 0.0)) {
          e.add(&el, "atom weight must be positive");
          ok = false;
          continue;
        }
        atoms.push_back({*dir, *w});
      }
      if (!ok) return std::nullopt;
      return SpectralMeasure::atoms(dim, std::move(atoms));
    }
    if (*type == "density") {
      const auto* arr = s.array("terms");
      const auto res = static_cast<std::size_t>(s.number("resolution", 0.0));
      if (!arr || arr->empty()) {
        e.add(nullptr, "measure.terms must list polynomial terms {coef, powers}");
        return std::nullopt;
      }
      std::vector<std::pair<double, std::vector<int>>> terms;
      for (const auto& el : *arr) {
        const auto* t = el.as_table();
        if (!t) {
          e.add(&el, "each density term must be a table");
          return std::nullopt;
        }
        Section a(t, "measure.terms[]", e);
        auto coef = a.number("coef");
        auto pw = a.numbers("powers");
        a.finish();
        if (!coef || !pw || pw->size() != dim) {
          e.add(&el, "density term needs coef and " + std::to_string(dim) + " powers");
          return std::nullopt;
        }
        std::vector<int> ip;
        for (double p : *pw) {
          if (p < 0 || p != std::floor(p)) {
            e.add(&el, "density powers must be nonnegative integers");
            return std::nullopt;
          }
          ip.push_back(static_cast<int>(p));
        }
        terms.push_back({*coef, ip});
      }
      auto h = [terms](const Vec& th) {
        double v = 0.0;
        for (const auto& [c, p] : terms) {
          double m = c;
          for (std::size_t j = 0; j < p.size(); ++j) m *= std::pow(th[j], p[j]);
          v += m;
        }
        return v;
      };
      return SpectralMeasure::density(dim, h, res ? default_sphere_rule(dim, res) : std::vector<SphereNode>{});
    }
    e.add(s.node("type"), "measure.type must be one of atoms, density, isotropic");
  } catch (const std::exception& ex) {
    e.add(nullptr, std::string("measure: ") + ex.what());
  }
  return std::nullopt;
}

SymbolKind parse_symbol_kind(const std::string& s, Errors& e, const toml::node* n) {
  if (s == "full") return SymbolKind::Full;
  if (s == "primed") return SymbolKind::Primed;
  if (s == "tilde") return SymbolKind::Tilde;
  if (s == "rescaled") return SymbolKind::Rescaled;
  e.add(n, "experiment.symbol must be full, primed, tilde or rescaled");
  return SymbolKind::Full;
}

Truncation parse_truncation(const std::string& s, Errors& e, const toml::node* n) {
  if (s == "none") return Truncation::None;
  if (s == "inner") return Truncation::Inner;
  if (s == "outer") return Truncation::Outer;
  e.add(n, "experiment.truncation must be none, inner or outer");
  return Truncation::None;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& mode) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& err) {
    std::ostringstream os;
    os << "line " << err.source().begin.line << ": syntax error: " << err.description();
    throw ConfigError({os.str()});
  }
  Errors e;
  ExperimentConfig cfg;
  cfg.text = text;
  static const std::set<std::string> tables = {"problem", "measure", "grid", "time", "initial", "experiment"};
  for (auto&& [k, v] : root) {
    const std::string key(k.str());
    if (!tables.count(key))
      e.add(&v, "unknown key '" + key + "'");
    else if (!v.is_table())
      e.add(&v, "'" + key + "' must be a table");
  }
  auto sect = [&](const char* name) { return Section(root[name].as_table(), name, e); };

  Section exp = sect("experiment");
  auto& ex = cfg.experiment;
  if (auto m = exp.string("mode")) {
    if (std::find(kModes.begin(), kModes.end(), *m) == kModes.end())
      e.add(exp.node("mode"), "experiment.mode '" + *m + "' is not a known mode");
    ex.mode = *m;
  }
  if (!mode.empty()) {
    if (std::find(kModes.begin(), kModes.end(), mode) == kModes.end())
      e.add(nullptr, "mode '" + mode + "' is not a known mode");
    ex.mode = mode;
  }
  const bool needs_run = ex.mode == "simulate" || ex.mode == "fit-decay" || ex.mode == "rescale-sweep";

  // grid first: it fixes N
  Section grid = sect("grid");
  if (!grid.present()) e.add(nullptr, "missing required table [grid]");
  const auto extents = grid.numbers("extents");
  const auto counts = grid.numbers("counts");
  grid.finish();
  std::size_t dim = 0;
  if (grid.present()) {
    if (!extents || !counts)
      e.add(nullptr, "grid needs extents and counts");
    else if (extents->size() != counts->size() || extents->empty())
      e.add(nullptr, "grid.extents and grid.counts must have the same nonzero length");
    else {
      dim = extents->size();
      try {
        std::vector<std::size_t> c;
        for (double v : *counts) {
          if (v != std::floor(v) || v < 0) throw std::invalid_argument("grid: counts must be integers");
          c.push_back(static_cast<std::size_t>(v));
        }
        cfg.solver.grid = PeriodicGrid(*extents, c);
      } catch (const std::exception& err) {
        e.add(grid.node("counts"), err.what());
      }
    }
  }

  Section prob = sect("problem");
  if (!prob.present()) e.add(nullptr, "missing required table [problem]");
  auto& sc = cfg.solver;
  sc.alpha = prob.required("alpha");
  sc.q = prob.number("q", 2.0);
  sc.epsilon = prob.number("epsilon", 0.0);
  sc.convection = prob.boolean("convection").value_or(true);
  sc.convection_coeff = prob.number("convection_coeff", 1.0);
  if (auto op = prob.string("operator")) {
    if (*op == "full")
      sc.op = OperatorKind::Full;
    else if (*op == "primed")
      sc.op = OperatorKind::Primed;
    else if (*op == "rescaled")
      sc.op = OperatorKind::Rescaled;
    else if (*op == "none")
      sc.op = OperatorKind::None;
    else
      e.add(prob.node("operator"), "problem.operator must be full, primed, rescaled or none");
  }
  sc.lambda = prob.number("lambda", 1.0);
  sc.beta = prob.number("beta", 0.0);
  auto drift = prob.numbers("drift");
  prob.finish();
  if (prob.present()) {
    if (!(sc.alpha > 0.0 && sc.alpha < 2.0)) e.add(prob.node("alpha"), "problem.alpha must lie in (0,2)");
    if (dim > 0 && !(sc.q > 1.0 - 1.0 / static_cast<double>(dim)))
      e.add(prob.node("q"), "problem.q must exceed 1 - 1/N = " + std::to_string(1.0 - 1.0 / static_cast<double>(dim)));
    if (!(sc.q > 0.0)) e.add(prob.node("q"), "problem.q must be positive");
    if (!(sc.epsilon >= 0.0)) e.add(prob.node("epsilon"), "problem.epsilon must be nonnegative");
    if (!(sc.convection_coeff > 0.0)) e.add(prob.node("convection_coeff"), "problem.convection_coeff must be positive");
    if (sc.op == OperatorKind::Rescaled && !(sc.lambda > 0.0 && sc.beta > 0.0))
      e.add(prob.node("operator"), "rescaled operator needs problem.lambda > 0 and problem.beta > 0");
  }
  if (dim > 0) {
    cfg.drift.assign(dim, 0.0);
    cfg.drift.back() = 1.0;
    if (drift) {
      if (drift->size() != dim) {
        e.add(nullptr, "problem.drift must have N components");
      } else {
        double n2 = 0.0;
        for (double v : *drift) n2 += v * v;
        if (!(n2 > 0.0))
          e.add(nullptr, "problem.drift must be nonzero");
        else {
          cfg.drift = *drift;
          for (double& v : cfg.drift) v /= std::sqrt(n2);
        }
      }
    }
  }

  Section meas = sect("measure");
  if (!meas.present()) e.add(nullptr, "missing required table [measure]");
  std::optional<SpectralMeasure> mu;
  if (dim > 0 && meas.present()) mu = parse_measure(meas, dim);
  meas.finish();
  if (mu) {
    try {
      sc.measure = rotate_to_canonical_drift(*mu, cfg.drift);
      if (sc.op != OperatorKind::None && sc.alpha > 0.0 && sc.alpha < 2.0 && ex.mode != "project-measure" &&
          ex.mode != "symbol-dump")
        require_nondegenerate(sc.measure, sc.alpha);
    } catch (const std::exception& err) {
      e.add(nullptr, err.what());
    }
  }

  Section time = sect("time");
  if (needs_run && !time.present() && ex.mode != "rescale-sweep") e.add(nullptr, "missing required table [time]");
  sc.horizon = time.present() ? time.required("horizon") : 1.0;
  sc.cfl = time.number("cfl", 0.45);
  sc.dt_max = time.number("dt_max", std::numeric_limits<double>::infinity());
  sc.dt_rel = time.number("dt_rel", 0.05);
  if (auto sp = time.string("splitting")) {
    if (*sp == "strang")
      sc.splitting = Splitting::Strang;
    else if (*sp == "lie")
      sc.splitting = Splitting::Lie;
    else
      e.add(time.node("splitting"), "time.splitting must be strang or lie");
  }
  if (auto snaps = time.numbers("snapshots")) sc.snapshot_times = *snaps;
  if (const auto* d = time.table("diagnostics")) {
    Section ds(d, "time.diagnostics", e);
    if (auto times = ds.numbers("times")) {
      sc.diagnostic_times = *times;
    } else {
      const double start = ds.number("start", 0.0);
      const double stop = ds.number("stop", sc.horizon);
      const auto count = static_cast<std::size_t>(ds.number("count", 100.0));
      const auto spacing = ds.string("spacing").value_or("linear");
      if (spacing != "linear" && spacing != "log") e.add(ds.node("spacing"), "time.diagnostics.spacing must be linear or log");
      if (spacing == "log" && !(start > 0.0)) e.add(ds.node("start"), "log-spaced diagnostics need start > 0");
      if (count < 2) e.add(ds.node("count"), "time.diagnostics.count must be at least 2");
      for (std::size_t i = 0; i < count && count >= 2; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(count - 1);
        sc.diagnostic_times.push_back(spacing == "log" && start > 0.0 ? start * std::pow(stop / start, f)
                                                                       : start + (stop - start) * f);
      }
    }
    ds.finish();
  }
  time.finish();
  if (time.present()) {
    if (!(sc.horizon > 0.0)) e.add(time.node("horizon"), "time.horizon must be positive");
    if (!(sc.cfl > 0.0 && sc.cfl < 1.0)) e.add(time.node("cfl"), "time.cfl must lie in (0,1)");
    for (double t : sc.snapshot_times)
      if (!(t >= 0.0 && t <= sc.horizon)) e.add(time.node("snapshots"), "snapshot times must lie in [0, horizon]");
    for (double t : sc.diagnostic_times)
      if (!(t >= 0.0 && t <= sc.horizon * (1 + 1e-12))) {
        e.add(time.node("diagnostics"), "diagnostic times must lie in [0, horizon]");
        break;
      }
    for (double& t : sc.diagnostic_times) t = std::min(t, sc.horizon);
  }

  Section init = sect("initial");
  if (needs_run && !init.present()) e.add(nullptr, "missing required table [initial]");
  if (const auto* arr = init.array("bumps")) {
    for (const auto& el : *arr) {
      const auto* t = el.as_table();
      if (!t) {
        e.add(&el, "each bump must be a table {mass, width, center}");
        continue;
      }
      Section b(t, "initial.bumps[]", e);
      BumpSpec bs;
      bs.mass = b.number("mass", 1.0);
      bs.width = b.required("width");
      bs.center = b.numbers("center").value_or(Vec(dim, 0.0));
      b.finish();
      if (!(bs.mass > 0.0)) e.add(&el, "bump mass must be positive");
      if (!(bs.width > 0.0)) e.add(&el, "bump width must be positive");
      if (bs.center.size() != dim) e.add(&el, "bump center must have N components");
      if (dim > 0 && bs.width > 0.0 && cfg.solver.grid.dim() == dim)
        for (std::size_t j = 0; j < dim; ++j)
          if (bs.width < 3.0 * cfg.solver.grid.dx(j)) {
            e.add(&el, "bump width under-resolved: needs at least 3 cells");
            break;
          }
      cfg.bumps.push_back(bs);
    }
  }
  init.finish();
  if (needs_run && init.present() && cfg.bumps.empty()) e.add(nullptr, "initial.bumps must list at least one bump");

  if (auto l = exp.numbers("lambdas")) ex.lambdas = *l;
  ex.t_ref = exp.number("t_ref", 1.0);
  if (auto p = exp.numbers("p")) ex.p_list = *p;
  if (auto w = exp.numbers("window")) {
    if (w->size() != 2 || !((*w)[0] < (*w)[1]))
      e.add(exp.node("window"), "experiment.window must be [lo, hi] with lo < hi");
    else {
      ex.window_lo = (*w)[0];
      ex.window_hi = (*w)[1];
    }
  }
  ex.tolerance = exp.number("tolerance", std::numeric_limits<double>::quiet_NaN());
  ex.rho = exp.number("rho", 1.0);
  ex.beta = exp.number("beta", std::numeric_limits<double>::quiet_NaN());
  ex.test_width = exp.number("test_width", 1.0);
  if (auto s = exp.string("symbol")) ex.symbol_kind = parse_symbol_kind(*s, e, exp.node("symbol"));
  if (auto s = exp.string("truncation")) ex.truncation = parse_truncation(*s, e, exp.node("truncation"));
  ex.symbol_lambda = exp.number("symbol_lambda", 1.0);
  ex.symbol_beta = exp.number("symbol_beta", 0.0);
  if (const auto* pts = exp.array("points")) {
    for (const auto& el : *pts)
      if (auto v = exp.to_vec(&el, "experiment.points[]")) ex.points.push_back(*v);
  }
  if (auto s = exp.string("diagnostics_path")) ex.diagnostics_path = *s;
  ex.sample_count = static_cast<unsigned>(exp.number("samples", 4.0));
  exp.finish();

  if (ex.mode == "rescale-sweep" && ex.lambdas.empty()) e.add(nullptr, "rescale-sweep needs experiment.lambdas");
  if (ex.mode == "truncation-report" && ex.lambdas.empty()) e.add(nullptr, "truncation-report needs experiment.lambdas");
  if (ex.mode == "fit-decay")
    for (double p : ex.p_list)
      if (!(p == 0.0 || p == 1.0 || p == 2.0 || std::isinf(p)))
        e.add(exp.node("p"), "experiment.p entries must be 1, 2, inf or 0 (mass)");
  if (!(ex.rho > 0.0)) e.add(exp.node("rho"), "experiment.rho must be positive");
  if ((ex.mode == "lemma21-check" || ex.mode == "truncation-report" || ex.mode == "project-measure") && dim > 0 &&
      dim < 2)
    e.add(nullptr, ex.mode + " needs N >= 2");

  if (!e.list.empty()) throw ConfigError(e.list);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::string& mode) {
  std::ifstream is(path);
  if (!is) throw ConfigError({"cannot open config file " + path});
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), mode);
}

std::string measure_to_toml(const SpectralMeasure& mu) {
  std::ostringstream os;
  os << std::setprecision(17) << "[measure]\n";
  auto vec = [&](const Vec& v) {
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << "]";
  };
  if (mu.kind() == SpectralMeasure::Kind::Isotropic) {
    os << "type = \"isotropic\"\nc = " << mu.isotropic_constant() << "\n";
    return os.str();
  }
  // densities are written through their weighted quadrature nodes
  os << "type = \"atoms\"\natoms = [\n";
  for (const auto& n : mu.nodes()) {
    os << "  { dir = ";
    vec(n.point);
    os << ", w = " << n.weight << " },\n";
  }
  os << "]\n";
  return os.str();
}

}  // namespace anisodiff
