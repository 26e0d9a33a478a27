#include "anisodiff/solver.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

namespace anisodiff {

namespace {
std::mutex audit_mutex;
RunAudit audit_state;

void audit_record(double max0, double drift, double max_seen) {
  std::lock_guard<std::mutex> lock(audit_mutex);
  ++audit_state.runs;
  audit_state.worst_mass_drift = std::max(audit_state.worst_mass_drift, drift);
  if (max0 > 0.0) audit_state.worst_max_excess = std::max(audit_state.worst_max_excess, max_seen / max0 - 1.0);
}
}  // namespace

RunAudit run_audit() {
  std::lock_guard<std::mutex> lock(audit_mutex);
  return audit_state;
}

void reset_run_audit() {
  std::lock_guard<std::mutex> lock(audit_mutex);
  audit_state = RunAudit{};
}

void SolverConfig::validate() const {
  const double n = static_cast<double>(grid.dim());
  if (grid.dim() == 0) throw std::invalid_argument("solver: grid missing");
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("solver: alpha must lie in (0,2)");
  if (!(q > 1.0 - 1.0 / n) || !(q > 0.0))
    throw std::invalid_argument("solver: q must exceed 1 - 1/N (mass conservation)");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("solver: epsilon must be nonnegative");
  if (!(cfl > 0.0 && cfl < 1.0)) throw std::invalid_argument("solver: CFL factor must lie in (0,1)");
  if (!(horizon > 0.0)) throw std::invalid_argument("solver: horizon must be positive");
  if (!(convection_coeff > 0.0)) throw std::invalid_argument("solver: convection coefficient must be positive");
  if (measure.dim() != grid.dim()) throw std::invalid_argument("solver: measure and grid dimensions differ");
  if (op == OperatorKind::Primed && grid.dim() < 2) throw std::invalid_argument("solver: primed operator needs N >= 2");
  if (op == OperatorKind::Rescaled && !(lambda > 0.0 && beta > 0.0))
    throw std::invalid_argument("solver: rescaled operator needs lambda > 0 and beta > 0");
  if (op != OperatorKind::None) require_nondegenerate(measure, alpha, degeneracy_threshold);
  for (double t : snapshot_times)
    if (!(t >= 0.0 && t <= horizon)) throw std::invalid_argument("solver: snapshot time outside [0, T]");
  for (double t : diagnostic_times)
    if (!(t >= 0.0 && t <= horizon)) throw std::invalid_argument("solver: diagnostic time outside [0, T]");
}

SymbolSpec SolverConfig::symbol_spec() const {
  switch (op) {
    case OperatorKind::Primed:
      return SymbolSpec::primed(measure, alpha);
    case OperatorKind::Rescaled:
      return SymbolSpec::rescaled(measure, alpha, lambda, beta);
    default:
      return SymbolSpec::full(measure, alpha);
  }
}

Vec DiagnosticsSeries::column(const std::string& name) const {
  static const char* names[] = {"t", "mass", "l1", "l2", "linf", "min", "energy_frac", "energy_visc", "oleinik", "tail"};
  std::size_t col = 10;
  for (std::size_t i = 0; i < 10; ++i)
    if (name == names[i]) col = i;
  if (col == 10) throw std::invalid_argument("diagnostics: unknown column " + name);
  Vec out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const double* p = &r.t;
    out.push_back(p[col]);
  }
  return out;
}

void write_diagnostics_csv(const DiagnosticsSeries& s, std::ostream& os) {
  os << "t,mass,l1,l2,linf,min,energy_frac,energy_visc,oleinik,tail\n" << std::setprecision(17);
  for (const auto& r : s.records)
    os << r.t << ',' << r.mass << ',' << r.l1 << ',' << r.l2 << ',' << r.linf << ',' << r.min << ','
       << r.energy_frac << ',' << r.energy_visc << ',' << r.oleinik << ',' << r.tail << '\n';
}

DiagnosticsSeries read_diagnostics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t,mass,l1", 0) != 0)
    throw std::runtime_error("diagnostics csv: unexpected header");
  DiagnosticsSeries s;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    DiagnosticsRecord r{};
    double* p = &r.t;
    std::string cell;
    for (int i = 0; i < 10; ++i) {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error("diagnostics csv: short row");
      p[i] = std::stod(cell);
    }
    s.records.push_back(r);
  }
  return s;
}

Field initial_bump(const PeriodicGrid& grid, double mass, double width, const Vec& center) {
  if (center.size() != grid.dim()) throw std::invalid_argument("bump: center dimension mismatch");
  if (!(mass > 0.0)) throw std::invalid_argument("bump: mass must be positive");
  for (std::size_t j = 0; j < grid.dim(); ++j)
    if (width < 3.0 * grid.dx(j) * (1.0 - 1e-12)) throw std::invalid_argument("bump: width under-resolved (< 3 cells)");
  Field u(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec x = grid.point(i);
    double r2 = 0.0;
    for (std::size_t j = 0; j < grid.dim(); ++j) {
      // nearest periodic image of the center
      double d = x[j] - center[j];
      d -= grid.extent(j) * std::round(d / grid.extent(j));
      r2 += d * d;
    }
    const double s = r2 / (width * width);
    u.data[i] = s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
  }
  const double m = u.integral();
  if (!(m > 0.0)) throw std::invalid_argument("bump: no grid point inside the support");
  for (double& v : u.data) v *= mass / m;
  return u;
}

double cfl_dt(const Field& u, const SolverConfig& cfg) {
  const auto& g = u.grid;
  const std::size_t nl = g.count(g.dim() - 1);
  double smax = 0.0;
  if (cfg.convection) {
    if (cfg.q >= 1.0) {
      // convex flux: the largest secant is bounded by f'(max u)
      smax = cfg.q * std::pow(std::max(0.0, u.max()), cfg.q - 1.0);
    } else {
      for (std::size_t r = 0; r < g.size() / nl; ++r)
        for (std::size_t k = 0; k < nl; ++k) {
          const double a = u.data[r * nl + k], b = u.data[r * nl + (k + 1) % nl];
          if (a == b) continue;
          smax = std::max(smax, std::abs(std::pow(a, cfg.q) - std::pow(b, cfg.q)) / std::abs(a - b));
        }
    }
    smax *= cfg.convection_coeff;
  }
  if (!(smax > 0.0)) return cfg.horizon / 1000.0;
  return cfg.cfl * g.dx(g.dim() - 1) / smax;
}

double oleinik_statistic(const Field& u, double q) {
  if (q == 1.0) return 0.0;
  const auto& g = u.grid;
  const std::size_t nl = g.count(g.dim() - 1);
  const double h = g.dx(g.dim() - 1);
  const double p = q > 1.0 ? q - 1.0 : 1.0 - q;
  double best = q > 1.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < g.size() / nl; ++r)
    for (std::size_t k = 0; k < nl; ++k) {
      const double d =
          (std::pow(u.data[r * nl + (k + 1) % nl], p) - std::pow(u.data[r * nl + k], p)) / h;
      best = q > 1.0 ? std::max(best, d) : std::min(best, d);
    }
  return q > 1.0 ? best : -best;
}

double max_slice_mass(const Field& u) {
  const auto& g = u.grid;
  if (g.dim() == 1) return u.integral();
  const std::size_t nl = g.count(g.dim() - 1);
  const double h = g.dx(g.dim() - 1);
  double best = 0.0;
  for (std::size_t r = 0; r < g.size() / nl; ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < nl; ++k) s += u.data[r * nl + k];
    best = std::max(best, s * h);
  }
  return best;
}

Solver::Solver(SolverConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.dt_rel_floor <= 0.0) cfg_.dt_rel_floor = 1e-3 * cfg_.horizon;
  const auto& g = cfg_.grid;
  if (cfg_.op == OperatorKind::None)
    symbol_ = SymbolGrid{g, Vec(g.size(), 0.0), cfg_.alpha, "none"};
  else
    symbol_ = build_symbol_grid(cfg_.symbol_spec(), g);
  half_m_ = symbol_.half_layout();
  SymbolGrid lap{g, Vec(g.size(), 0.0), 2.0, "laplacian"};
  std::vector<std::size_t> idx;
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unflatten(f, idx);
    double k2 = 0.0;
    for (std::size_t j = 0; j < g.dim(); ++j) k2 += std::pow(g.angular_frequency(j, idx[j]), 2);
    lap.values[f] = k2;
  }
  half_visc_ = lap.half_layout();
  fft_ = std::make_unique<RealFft>(g);
}

Solver::~Solver() = default;

void Solver::convect(Field& u, double h) const {
  const auto& g = u.grid;
  const std::size_t nl = g.count(g.dim() - 1);
  const double nu = h / g.dx(g.dim() - 1) * cfg_.convection_coeff;
  const double q = cfg_.q;
  Vec f(nl);
  for (std::size_t r = 0; r < g.size() / nl; ++r) {
    double* row = &u.data[r * nl];
    for (std::size_t k = 0; k < nl; ++k) f[k] = q == 1.0 ? row[k] : std::pow(row[k], q);
    // upwind (left) Godunov flux since f is nondecreasing on u >= 0
    for (std::size_t k = 0; k < nl; ++k) row[k] -= nu * (f[k] - f[(k + nl - 1) % nl]);
  }
}

namespace {

// Bound-preserving conservative limiter: clips v to [0, upper] and returns the
// clipped mass to the support, so the sum is unchanged. Returns the clipped sum.
double clip_conservative(Vec& v, double upper) {
  double neg = 0.0, over = 0.0;
  for (double& x : v) {
    if (x < 0.0) {
      neg -= x;
      x = 0.0;
    } else if (x > upper) {
      over += x - upper;
      x = upper;
    }
  }
  const double add = over - neg;
  if (add < 0.0) {
    // remove in proportion to u: stays inside [0, upper]
    double pos = 0.0;
    for (double x : v) pos += x;
    const double s = pos > 0.0 ? (pos + add) / pos : 0.0;
    for (double& x : v) x *= s;
  } else if (add > 0.0) {
    // add in proportion to u (upper - u): vanishes at both bounds
    double room = 0.0;
    for (double x : v) room += x * (upper - x);
    const double s = add / room;
    if (room > 0.0 && s * upper <= 1.0) {
      for (double& x : v) x += s * x * (upper - x);
    } else {
      // no room below the bound: keep the mass, give up the bound
      double pos = 0.0;
      for (double x : v) pos += x;
      if (pos > 0.0)
        for (double& x : v) x *= (pos + add) / pos;
    }
  }
  return neg + over;
}

}  // namespace

double Solver::diffuse(Field& u, double dt) {
  const bool visc = cfg_.epsilon > 0.0;
  if (cfg_.op == OperatorKind::None && !visc) return 0.0;
  // the exact flow obeys the maximum principle; the truncated multiplier rings
  // slightly at grid-scale features
  const double upper = u.max();
  fft_->forward(u.data, work_);
  for (std::size_t i = 0; i < work_.size(); ++i) {
    double e = half_m_[i];
    if (visc) e += cfg_.epsilon * half_visc_[i];
    work_[i] *= std::exp(-dt * e);
  }
  fft_->backward(work_, u.data);
  const double inv = 1.0 / static_cast<double>(u.grid.size());
  for (double& v : u.data) v *= inv;
  return clip_conservative(u.data, upper) * u.grid.cell_volume();
}

double Solver::step(Field& u, double dt) {
  if (u.grid != cfg_.grid) throw std::invalid_argument("step: field grid differs from solver grid");
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (u.min() < 0.0) throw std::invalid_argument("step: negative input");
  if (cfg_.convection) {
    const double limit = cfl_dt(u, cfg_) / cfg_.cfl;
    if (dt > limit * (1.0 + 1e-12)) throw std::invalid_argument("step: dt exceeds the CFL limit");
  }
  double clipped = 0.0;
  if (cfg_.splitting == Splitting::Strang) {
    if (cfg_.convection) convect(u, 0.5 * dt);
    clipped += diffuse(u, dt);
    if (cfg_.convection) convect(u, 0.5 * dt);
  } else {
    if (cfg_.convection) convect(u, dt);
    clipped += diffuse(u, dt);
  }
  // sublinear fluxes can undershoot near zero
  if (cfg_.convection && cfg_.q < 1.0) clipped += clip_conservative(u.data, INFINITY) * u.grid.cell_volume();
  return clipped;
}

DiagnosticsRecord Solver::diagnostics(const Field& u, double t) {
  const auto& g = u.grid;
  DiagnosticsRecord r{};
  r.t = t;
  r.mass = u.integral();
  r.l1 = u.lp_norm(1.0);
  r.l2 = u.lp_norm(2.0);
  r.linf = u.lp_norm(INFINITY);
  r.min = u.min();
  fft_->forward(u.data, work_);
  const std::size_t nl = g.count(g.dim() - 1), half = nl / 2 + 1;
  double ef = 0.0, ev = 0.0;
  for (std::size_t i = 0; i < work_.size(); ++i) {
    const std::size_t k = i % half;
    const double w = (k == 0 || 2 * k == nl) ? 1.0 : 2.0;
    const double p = std::norm(work_[i]) * w;
    ef += half_m_[i] * p;
    ev += half_visc_[i] * p;
  }
  const double scale = g.cell_volume() / static_cast<double>(g.size());
  r.energy_frac = ef * scale;
  r.energy_visc = cfg_.epsilon * ev * scale;
  r.oleinik = oleinik_statistic(u, cfg_.q);
  double rad = g.extent(0);
  for (std::size_t j = 1; j < g.dim(); ++j) rad = std::min(rad, g.extent(j));
  rad *= 0.25;
  double tail = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec x = g.point(i);
    double n2 = 0.0;
    for (double c : x) n2 += c * c;
    if (n2 > rad * rad) tail += u.data[i];
  }
  r.tail = tail * g.cell_volume();
  return r;
}

namespace {

std::vector<double> event_times(const SolverConfig& cfg) {
  std::vector<double> ev(cfg.snapshot_times);
  ev.insert(ev.end(), cfg.diagnostic_times.begin(), cfg.diagnostic_times.end());
  ev.push_back(cfg.horizon);
  std::sort(ev.begin(), ev.end());
  std::vector<double> out;
  for (double t : ev)
    if (t > 0.0 && (out.empty() || t > out.back() * (1.0 + 1e-14))) out.push_back(t);
  return out;
}

bool contains_time(const std::vector<double>& v, double t) {
  for (double s : v)
    if (std::abs(s - t) <= 1e-12 * std::max(1.0, std::abs(t))) return true;
  return false;
}

}  // namespace

RunResult Solver::run(const Field& u0) {
  if (u0.grid != cfg_.grid) throw std::invalid_argument("run: initial field grid differs from solver grid");
  for (double v : u0.data)
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("run: initial data must be finite and nonnegative");
  RunResult res;
  Field u = u0;
  res.mass0 = u.integral();
  res.max0 = u.max();
  res.max_seen = res.max0;
  res.min_seen = u.min();
  if (!(res.mass0 > 0.0)) throw std::invalid_argument("run: initial data must have positive mass");
  const auto events = event_times(cfg_);
  double t = 0.0;
  if (cfg_.diagnostic_times.empty() || contains_time(cfg_.diagnostic_times, 0.0))
    res.diagnostics.records.push_back(diagnostics(u, 0.0));
  if (contains_time(cfg_.snapshot_times, 0.0)) res.snapshots.push_back({0.0, u});
  for (double next : events) {
    while (t < next) {
      // without convection the diffusion substep is exact for any dt
      double dt = cfg_.convection
                      ? std::min({cfl_dt(u, cfg_), cfg_.dt_max, cfg_.dt_rel * std::max(t, cfg_.dt_rel_floor)})
                      : std::min(cfg_.dt_max, next - t);
      bool land = false;
      if (t + dt >= next * (1.0 - 1e-13)) {
        dt = next - t;
        land = true;
      }
      const double clipped = step(u, dt);
      t = land ? next : t + dt;
      ++res.steps;
      const double m = u.integral();
      res.max_clip_fraction = std::max(res.max_clip_fraction, clipped / res.mass0);
      res.max_mass_drift = std::max(res.max_mass_drift, std::abs(m - res.mass0) / res.mass0);
      const double hi = u.max();
      res.max_seen = std::max(res.max_seen, hi);
      res.min_seen = std::min(res.min_seen, u.min());
      if (!std::isfinite(hi) || hi > cfg_.blowup_factor * res.max0) {
        std::ostringstream os;
        const auto d = diagnostics(u, t);
        os << "sup norm grew from " << res.max0 << " to " << hi << " at t=" << t << " (mass " << d.mass
           << ", min " << d.min << ", step " << res.steps << ")";
        throw SolverError(os.str());
      }
    }
    if (contains_time(cfg_.diagnostic_times, next) || (cfg_.diagnostic_times.empty() && next == cfg_.horizon))
      res.diagnostics.records.push_back(diagnostics(u, t));
    if (contains_time(cfg_.snapshot_times, next)) res.snapshots.push_back({t, u});
  }
  spdlog::debug("run finished: {} steps, max clipped fraction {:.3e}, mass drift {:.3e}", res.steps,
                res.max_clip_fraction, res.max_mass_drift);
  audit_record(res.max0, res.max_mass_drift, res.max_seen);
  res.final_state = std::move(u);
  return res;
}

ContractionSeries contraction_check(const SolverConfig& cfg, const Field& u0, const Field& ubar0) {
  Solver solver(cfg);
  const auto& c = solver.config();
  Field u = u0, w = ubar0;
  ContractionSeries out;
  bool ordered0 = true;
  for (std::size_t i = 0; i < u.data.size(); ++i) ordered0 = ordered0 && u.data[i] <= w.data[i];
  out.ordered = ordered0;
  auto record = [&](double t) {
    double d = 0.0;
    bool ord = true;
    const double slack = 1e-12 * std::max(u.max(), w.max());
    for (std::size_t i = 0; i < u.data.size(); ++i) {
      d += std::abs(u.data[i] - w.data[i]);
      ord = ord && u.data[i] <= w.data[i] + slack;
    }
    out.t.push_back(t);
    out.distance.push_back(d * u.grid.cell_volume());
    if (ordered0) out.ordered = out.ordered && ord;
  };
  const auto events = event_times(c);
  double t = 0.0;
  const double mass_u = u.integral(), mass_w = w.integral(), max_u = u.max(), max_w = w.max();
  double drift_u = 0.0, drift_w = 0.0, seen_u = max_u, seen_w = max_w;
  record(0.0);
  for (double next : events) {
    while (t < next) {
      double dt = c.convection ? std::min({cfl_dt(u, c), cfl_dt(w, c), c.dt_max, c.dt_rel * std::max(t, c.dt_rel_floor)})
                               : std::min(c.dt_max, next - t);
      bool land = false;
      if (t + dt >= next * (1.0 - 1e-13)) {
        dt = next - t;
        land = true;
      }
      solver.step(u, dt);
      solver.step(w, dt);
      t = land ? next : t + dt;
      drift_u = std::max(drift_u, std::abs(u.integral() - mass_u) / mass_u);
      drift_w = std::max(drift_w, std::abs(w.integral() - mass_w) / mass_w);
      seen_u = std::max(seen_u, u.max());
      seen_w = std::max(seen_w, w.max());
    }
    if (contains_time(c.diagnostic_times, next) || c.diagnostic_times.empty()) record(t);
  }
  audit_record(max_u, drift_u, seen_u);
  audit_record(max_w, drift_w, seen_w);
  return out;
}

}  // namespace anisodiff
