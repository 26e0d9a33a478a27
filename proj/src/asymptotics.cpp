#include "anisodiff/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace anisodiff {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Diffusion:
      return "diffusion";
    case Regime::Critical:
      return "critical";
    case Regime::Convection:
      return "convection";
  }
  return "?";
}

double RegimeParams::target_slope(double p) const {
  if (p == 0.0) return 0.0;  // the mass column
  const double frac = std::isinf(p) ? 1.0 : 1.0 - 1.0 / p;
  return -decay_rate * frac;
}

double RegimeParams::convection_exponent() const { return -(1.0 + gamma * (1.0 - q) - beta); }

RegimeParams classify(double alpha, double q, std::size_t dim) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("classify: alpha must lie in (0,2]");
  if (dim < 1) throw std::invalid_argument("classify: N must be at least 1");
  const double n = static_cast<double>(dim);
  if (!(q > 1.0 - 1.0 / n)) throw std::invalid_argument("classify: q must exceed 1 - 1/N");
  RegimeParams p{};
  p.alpha = alpha;
  p.q = q;
  p.dim = dim;
  p.q_star = 1.0 + (alpha - 1.0) / n;
  const double diff_rate = n / alpha, conv_rate = (1.0 / q) * (1.0 + (n - 1.0) / alpha);
  if (std::abs(q - p.q_star) <= 1e-12 * std::max(1.0, p.q_star))
    p.regime = Regime::Critical;
  else
    p.regime = q > p.q_star ? Regime::Diffusion : Regime::Convection;
  if (p.regime == Regime::Convection) {
    p.beta = conv_rate - (n - 1.0) / alpha;
    p.gamma = (n - 1.0) / alpha + p.beta;
  } else {
    p.beta = 1.0 / alpha;
    p.gamma = n / alpha;
  }
  p.decay_rate = std::max(diff_rate, conv_rate);
  p.outside_theory = dim == 1 && alpha < 1.0 && std::abs(q - alpha) < 1e-12;
  return p;
}

void write_regime_table(const std::vector<RegimeParams>& rows, std::ostream& os) {
  os << "alpha,q,N,regime,beta,gamma,target_slope_linf\n" << std::setprecision(17);
  for (const auto& r : rows)
    os << r.alpha << ',' << r.q << ',' << r.dim << ',' << to_string(r.regime) << ',' << r.beta << ',' << r.gamma
       << ',' << r.target_slope(INFINITY) << '\n';
}

namespace {

double axis_scale(const RegimeParams& p, std::size_t axis, std::size_t dim) {
  return axis + 1 == dim ? p.beta : 1.0 / p.alpha;
}

// Cells along each axis where the field exceeds 1% of its maximum.
void check_resolved(const Field& f) {
  const auto& g = f.grid;
  const double top = f.max();
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < g.dim(); ++j) {
    std::vector<char> hit(g.count(j), 0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (f.data[i] > 0.01 * top) {
        g.unflatten(i, idx);
        hit[idx[j]] = 1;
      }
    const auto cells = std::count(hit.begin(), hit.end(), 1);
    if (cells < 6) throw std::invalid_argument("scale_initial_data: scaled support under-resolved (< 6 cells)");
  }
}

}  // namespace

Field scale_initial_data(const std::function<double(const Vec&)>& u0, const PeriodicGrid& grid, double lambda,
                         const RegimeParams& p) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("scale_initial_data: lambda must be >= 1");
  const std::size_t n = grid.dim();
  const Field base = Field::sample(grid, u0);
  const double mass = base.integral();
  if (lambda == 1.0) return base;
  Vec sc(n);
  for (std::size_t j = 0; j < n; ++j) sc[j] = std::pow(lambda, axis_scale(p, j, n));
  const double amp = std::pow(lambda, p.gamma);
  Field out = Field::sample(grid, [&](const Vec& x) {
    Vec y(x);
    for (std::size_t j = 0; j < n; ++j) y[j] *= sc[j];
    return amp * u0(y);
  });
  check_resolved(out);
  const double m = out.integral();
  for (double& v : out.data) v *= mass / m;
  return out;
}

Field scale_initial_data(const Field& u0, double lambda, const RegimeParams& p) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("scale_initial_data: lambda must be >= 1");
  if (lambda == 1.0) return u0;
  const auto& g = u0.grid;
  const std::size_t n = g.dim();
  std::vector<Vec> coords(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = std::pow(lambda, axis_scale(p, j, n));
    for (std::size_t i = 0; i < g.count(j); ++i) coords[j].push_back(s * g.coord(j, i));
  }
  Field out = resample_trig(u0, g, coords);
  // compression would otherwise tile the torus with periodic copies
  std::vector<std::size_t> idx;
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unflatten(f, idx);
    bool inside = true;
    for (std::size_t j = 0; j < n && inside; ++j) inside = std::abs(coords[j][idx[j]]) < 0.5 * g.extent(j);
    out.data[f] = inside ? std::max(0.0, out.data[f]) : 0.0;
  }
  check_resolved(out);
  const double m = out.integral(), mass = u0.integral();
  for (double& v : out.data) v *= mass / m;
  return out;
}

SolverConfig rescaled_config(const SolverConfig& cfg, double lambda, const RegimeParams& p) {
  if (cfg.epsilon > 0.0) throw std::invalid_argument("rescaled runs support epsilon = 0 only");
  SolverConfig c = cfg;
  if (lambda == 1.0) return c;
  if (c.convection) c.convection_coeff *= std::pow(lambda, -p.convection_exponent());
  const double sigma = 1.0 / p.alpha - p.beta;
  if (std::abs(sigma) > 1e-14 && c.op == OperatorKind::Full) {
    c.op = OperatorKind::Rescaled;
    c.lambda = lambda;
    c.beta = p.beta;
  }
  return c;
}

FamilyDistances rescaled_family_distance(const SolverConfig& cfg, const std::function<double(const Vec&)>& u0,
                                         const std::vector<double>& lambdas, double t_ref, unsigned jobs) {
  if (lambdas.empty()) throw std::invalid_argument("family distance: no lambdas");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("family distance: lambdas must increase");
  const auto p = cfg.convection ? classify(cfg.alpha, cfg.q, cfg.grid.dim())
                                : classify(cfg.alpha, 1e9, cfg.grid.dim());  // linear flow: diffusive scaling
  FamilyDistances out;
  out.lambdas = lambdas;
  out.states.resize(lambdas.size());
  auto one = [&](std::size_t i) {
    SolverConfig c = rescaled_config(cfg, lambdas[i], p);
    c.horizon = t_ref;
    c.diagnostic_times = {t_ref};
    c.snapshot_times.clear();
    Solver s(c);
    out.states[i] = s.run(scale_initial_data(u0, cfg.grid, lambdas[i], p)).final_state;
  };
  jobs = std::max(1u, jobs);
  for (std::size_t start = 0; start < lambdas.size(); start += jobs) {
    std::vector<std::future<void>> fs;
    for (std::size_t i = start; i < std::min(lambdas.size(), start + jobs); ++i)
      fs.push_back(std::async(std::launch::async, one, i));
    for (auto& f : fs) f.get();
  }
  const std::size_t m = lambdas.size();
  out.distance.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < out.states[i].data.size(); ++k)
        d += std::abs(out.states[i].data[k] - out.states[j].data[k]);
      out.distance[i][j] = out.distance[j][i] = d * cfg.grid.cell_volume();
    }
  const std::size_t half = m / 2;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      if (j < half) out.bottom_half_max = std::max(out.bottom_half_max, out.distance[i][j]);
      if (i >= m - half) out.top_half_max = std::max(out.top_half_max, out.distance[i][j]);
    }
  return out;
}

FitResult fit_power_law(const Vec& t, const Vec& y, const FitOptions& opt) {
  if (t.size() != y.size()) throw std::invalid_argument("fit: length mismatch");
  if (opt.t_lo < opt.transient) throw std::invalid_argument("fit: window starts inside the initial transient");
  Vec lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= opt.t_lo && t[i] <= opt.t_hi && t[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(t[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < std::max<std::size_t>(opt.min_samples, 3)) throw std::invalid_argument("fit: too few samples in window");
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  FitResult r;
  r.samples = lx.size();
  r.slope = sxy / sxx;
  double sse = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (my + r.slope * (lx[i] - mx));
    sse += e * e;
  }
  r.stderr_ = std::sqrt(sse / std::max(1.0, n - 2.0) / sxx);
  return r;
}

FitResult fit_decay_rate(const DiagnosticsSeries& s, double p, const FitOptions& opt) {
  std::string col;
  if (p == 0.0)
    col = "mass";
  else if (p == 1.0)
    col = "l1";
  else if (p == 2.0)
    col = "l2";
  else if (std::isinf(p))
    col = "linf";
  else
    throw std::invalid_argument("fit: p must be 1, 2 or inf (0 for mass)");
  return fit_power_law(s.times(), s.column(col), opt);
}

DomainCheck domain_doubling_check(const SolverConfig& cfg, const std::function<double(const Vec&)>& u0, double p,
                                  const FitOptions& opt, double tolerance) {
  auto fit_on = [&](const PeriodicGrid& g) {
    SolverConfig c = cfg;
    c.grid = g;
    Solver s(c);
    return fit_decay_rate(s.run(Field::sample(g, u0)).diagnostics, p, opt);
  };
  std::vector<double> ext(cfg.grid.extents());
  std::vector<std::size_t> counts(cfg.grid.counts());
  for (auto& e : ext) e *= 2.0;
  for (auto& n : counts) n *= 2;
  DomainCheck out;
  out.base = fit_on(cfg.grid);
  out.doubled = fit_on(PeriodicGrid(ext, counts));
  out.shift = std::abs(out.base.slope - out.doubled.slope);
  out.certified = out.shift < tolerance;
  return out;
}

double transient_time(double width, double alpha) { return 5.0 * std::pow(width, alpha); }

ProfileResult self_similar_profile(const SolverConfig& cfg, double mass, const std::vector<double>& times,
                                   double width, double escape_tolerance) {
  if (times.size() < 2) throw std::invalid_argument("profile: need two or more times");
  std::vector<double> ts(times);
  std::sort(ts.begin(), ts.end());
  const auto p = cfg.convection ? classify(cfg.alpha, cfg.q, cfg.grid.dim())
                                : classify(cfg.alpha, 1e9, cfg.grid.dim());
  SolverConfig c = cfg;
  c.horizon = ts.back();
  c.snapshot_times = ts;
  c.diagnostic_times = ts;
  const auto& g = cfg.grid;
  const std::size_t n = g.dim();
  Solver solver(c);
  Field u0(g);
  if (width > 0.0) {
    u0 = initial_bump(g, mass, width, Vec(n, 0.0));
  } else {
    // M delta_0: all mass on the node at the origin
    std::size_t flat = 0;
    for (std::size_t j = 0; j < n; ++j) flat += (g.count(j) / 2) * g.stride(j);
    u0.data[flat] = mass / g.cell_volume();
  }
  const auto run = solver.run(u0);

  ProfileResult res;
  res.times = ts;
  std::vector<double> ext(n);
  const double tmax = ts.back();
  for (std::size_t j = 0; j < n; ++j) ext[j] = g.extent(j) / std::pow(tmax, axis_scale(p, j, n));
  res.profile_grid = PeriodicGrid(ext, g.counts());
  std::vector<Field> mapped;
  for (const auto& snap : run.snapshots) {
    const double t = snap.t;
    // escape check: mass outside the central half box
    double outside = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec x = g.point(i);
      bool out = false;
      for (std::size_t j = 0; j < n; ++j) out = out || std::abs(x[j]) > 0.25 * g.extent(j);
      if (out) outside += snap.u.data[i];
    }
    if (outside * g.cell_volume() > escape_tolerance * mass)
      throw std::runtime_error("profile: support escapes the grid");
    const double amp = std::pow(t, p.gamma);
    double own = 0.0;
    for (double v : snap.u.data) own += amp * v;
    double own_cell = 1.0;
    for (std::size_t j = 0; j < n; ++j) own_cell *= g.dx(j) / std::pow(t, axis_scale(p, j, n));
    res.profile_mass.push_back(own * own_cell);

    std::vector<Vec> coords(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double s = std::pow(t, axis_scale(p, j, n));
      for (std::size_t i = 0; i < g.count(j); ++i) coords[j].push_back(s * res.profile_grid.coord(j, i));
    }
    Field f = resample_trig(snap.u, res.profile_grid, coords);
    for (double& v : f.data) v *= amp;
    mapped.push_back(std::move(f));
  }
  res.mean_profile = Field(res.profile_grid);
  for (const auto& f : mapped)
    for (std::size_t i = 0; i < f.data.size(); ++i) res.mean_profile.data[i] += f.data[i] / mapped.size();
  const double dv = res.profile_grid.cell_volume();
  for (std::size_t a = 0; a < mapped.size(); ++a)
    for (std::size_t b = a + 1; b < mapped.size(); ++b) {
      double d = 0.0;
      for (std::size_t i = 0; i < mapped[a].data.size(); ++i) d += std::abs(mapped[a].data[i] - mapped[b].data[i]);
      res.defect = std::max(res.defect, d * dv);
    }
  return res;
}

double oleinik_linf_bound(double c, double k, double l1) {
  if (!(c > 0.0 && k > 0.0 && l1 > 0.0)) throw std::invalid_argument("oleinik bound: inputs must be positive");
  return std::pow(c * (k + 1.0) / k * l1, 1.0 / (k + 1.0));
}

}  // namespace anisodiff
