#include "anisodiff/operators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include "anisodiff/quadrature.hpp"

namespace anisodiff {

Field apply_multiplier(const Field& f, const SymbolGrid& sg) {
  if (f.grid != sg.grid) throw std::invalid_argument("apply_multiplier: grid mismatch");
  RealFft fft(f.grid);
  std::vector<std::complex<double>> spec;
  fft.forward(f.data, spec);
  const Vec m = sg.half_layout();
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= m[i];
  Field out(f.grid);
  fft.backward(spec, out.data);
  const double inv = 1.0 / static_cast<double>(f.grid.size());
  for (double& v : out.data) v *= inv;
  return out;
}

double inner_product(const Field& f, const Field& g) {
  if (f.grid != g.grid) throw std::invalid_argument("inner_product: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.data.size(); ++i) s += f.data[i] * g.data[i];
  return s * f.grid.cell_volume();
}

double spectral_form(const Field& f, const SymbolGrid& sg) {
  if (f.grid != sg.grid) throw std::invalid_argument("spectral_form: grid mismatch");
  const auto c = full_dft(f);
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += sg.values[i] * std::norm(c[i]);
  return s * f.grid.cell_volume() / static_cast<double>(f.grid.size());
}

TestFunction TestFunction::decaying(std::size_t dim, std::function<double(const Vec&)> f, double feature) {
  TestFunction t;
  t.eval = std::move(f);
  t.dim = dim;
  t.feature = feature;
  return t;
}

TestFunction TestFunction::periodic(std::size_t dim, std::function<double(const Vec&)> f, Vec periods,
                                    double mean, double feature) {
  if (periods.size() != dim) throw std::invalid_argument("periodic test function: period count mismatch");
  TestFunction t;
  t.eval = std::move(f);
  t.dim = dim;
  t.periods = std::move(periods);
  t.mean = mean;
  t.feature = feature;
  return t;
}

TestFunction TestFunction::from_field(const Field& f) {
  auto interp = std::make_shared<TrigInterpolant>(f);
  double feature = f.grid.dx(0);
  for (std::size_t j = 1; j < f.grid.dim(); ++j) feature = std::min(feature, f.grid.dx(j));
  double total = 0.0;
  for (double v : f.data) total += v;
  return periodic(
      f.grid.dim(), [interp](const Vec& x) { return (*interp)(x); }, f.grid.extents(),
      total / static_cast<double>(f.grid.size()), feature);
}

namespace {

// Shortest r > 0 with r e in the period lattice, if the orbit closes within a
// modest number of windings.
std::optional<double> closed_period(const Vec& e, const Vec& periods) {
  const std::size_t n = e.size();
  std::size_t jmax = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (std::abs(e[j] / periods[j]) > std::abs(e[jmax] / periods[jmax])) jmax = j;
  const double tmax = std::abs(e[jmax] / periods[jmax]);
  if (tmax == 0.0) return std::nullopt;
  for (int m = 1; m <= 64; ++m) {
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
      const double v = e[j] / periods[j] / tmax * m;
      ok = std::abs(v - std::round(v)) < 1e-9;
    }
    if (ok) return m / tmax;
  }
  return std::nullopt;
}

double length_scale(const TestFunction& phi, const QuadratureOptions& o) {
  if (o.length_scale > 0.0) return o.length_scale;
  if (phi.periods) return *std::max_element(phi.periods->begin(), phi.periods->end());
  return 16.0 * phi.feature;
}

// One direction: returns the split radial integral of the second difference along unit e.
SplitValue radial(const TestFunction& phi, const Vec& x, const Vec& e, double alpha, double rho,
                  const QuadratureOptions& o) {
  const std::size_t n = x.size();
  Vec xp(n), xm(n);
  const double fx = phi.eval(x);
  auto g = [&](double r) {
    for (std::size_t i = 0; i < n; ++i) {
      xp[i] = x[i] + r * e[i];
      xm[i] = x[i] - r * e[i];
    }
    const double a = phi.eval(xp), b = phi.eval(xm);
    if (!std::isfinite(a) || !std::isfinite(b)) throw std::domain_error("quadrature: non-finite function value");
    return 0.5 * (a + b);
  };
  auto d = [&](double r) { return fx - g(r); };

  const double cap = o.panel_factor * phi.feature;
  const double rmin = std::min(o.r_min_factor * phi.feature, rho);
  const double big_l = length_scale(phi, o);
  const double rmax = std::max(o.r_max_factor * big_l, 2.0 * rho);

  // [0, rmin]: D(r) ~ A r^2 + B r^4 matched at rmin and rmin/2
  const double d1 = d(rmin), d2 = d(0.5 * rmin);
  const double b4 = (4.0 / 3.0) * (d1 - 4.0 * d2);
  const double a2 = d1 - b4;
  SplitValue out;
  out.inner = std::pow(rmin, -alpha) * (a2 / (2.0 - alpha) + b4 / (4.0 - alpha));

  auto integrate = [&](double a, double b) {
    const auto q = composite_gauss(graded_breaks(a, b, o.ratio, cap), o.order);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * d(q.nodes[i]) * std::pow(q.nodes[i], -1.0 - alpha);
    return s;
  };
  if (rho > rmin) out.inner += integrate(rmin, rho);
  out.outer = integrate(rho, rmax);

  // analytic tail beyond rmax
  double tail = fx * std::pow(rmax, -alpha) / alpha;
  if (phi.periods) {
    const auto period = closed_period(e, *phi.periods);
    if (period) {
      const double p = *period;
      const auto q = composite_gauss(graded_breaks(0.0, p, o.ratio, cap), o.order);
      Vec gs(q.size());
      double gbar = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        gs[i] = g(rmax + q.nodes[i]);
        gbar += q.weights[i] * gs[i];
      }
      gbar /= p;
      double psi = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) psi += q.weights[i] * (p - q.nodes[i]) * (gs[i] - gbar);
      psi /= p;
      tail -= gbar * std::pow(rmax, -alpha) / alpha + psi * std::pow(rmax, -1.0 - alpha);
    } else {
      tail -= phi.mean * std::pow(rmax, -alpha) / alpha;
    }
  }
  out.outer += tail;
  return out;
}

void check_point(const TestFunction& phi, const SpectralMeasure& mu, const Vec& x) {
  if (phi.dim != mu.dim() || x.size() != mu.dim()) throw std::invalid_argument("quadrature: dimension mismatch");
  if (!phi.eval) throw std::invalid_argument("quadrature: empty test function");
}

// Sum over the measure of |d|^alpha * radial(d/|d|, rho |d|) for displacement map d(theta).
template <class Map>
SplitValue displaced(const TestFunction& phi, const SpectralMeasure& mu, double alpha, const Vec& x, double rho,
                     const QuadratureOptions& o, Map map) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("quadrature: alpha must lie in (0,2)");
  if (!(rho > 0.0)) throw std::invalid_argument("quadrature: rho must be positive");
  check_point(phi, mu, x);
  SplitValue total;
  for (const auto& node : mu.nodes()) {
    Vec dvec = map(node.point);
    double len = 0.0;
    for (double v : dvec) len += v * v;
    len = std::sqrt(len);
    if (len < 1e-7) continue;  // (theta', 0) at a pole: no displacement
    for (double& v : dvec) v /= len;
    const auto r = radial(phi, x, dvec, alpha, rho * len, o);
    const double w = node.weight * std::pow(len, alpha);
    total.inner += w * r.inner;
    total.outer += w * r.outer;
  }
  return total;
}

}  // namespace

SplitValue apply_quadrature(const TestFunction& phi, const SpectralMeasure& mu, double alpha, const Vec& x,
                            double rho, const QuadratureOptions& opt) {
  return displaced(phi, mu, alpha, x, rho, opt, [](const Vec& t) { return t; });
}

SplitValue apply_primed_quadrature(const TestFunction& phi, const SpectralMeasure& mu, double alpha,
                                   const Vec& x, double rho, const QuadratureOptions& opt) {
  return displaced(phi, mu, alpha, x, rho, opt, [](Vec t) {
    t.back() = 0.0;
    return t;
  });
}

SplitValue apply_rescaled_quadrature(const TestFunction& phi, const SpectralMeasure& mu, double alpha,
                                     double lambda, double beta, const Vec& x, double rho,
                                     const QuadratureOptions& opt) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("rescaled quadrature: lambda must be >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("rescaled quadrature: beta must be positive");
  const double s = std::pow(lambda, 1.0 / alpha - beta);
  return displaced(phi, mu, alpha, x, rho, opt, [s](Vec t) {
    t.back() *= s;
    return t;
  });
}

Field integrate_out_last(const Field& f) {
  const auto& g = f.grid;
  if (g.dim() < 2) throw std::invalid_argument("integrate_out_last: needs N >= 2");
  const std::size_t nl = g.count(g.dim() - 1);
  Field v(g.drop_last());
  const double h = g.dx(g.dim() - 1);
  for (std::size_t r = 0; r < v.data.size(); ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < nl; ++k) s += f.data[r * nl + k];
    v.data[r] = s * h;
  }
  return v;
}

Lemma21Result lemma21_residual(const TestFunction& u, const SpectralMeasure& mu, double alpha,
                               const Lemma21Options& opt) {
  const std::size_t n = mu.dim();
  if (n < 2) throw std::invalid_argument("lemma21: needs N >= 2");
  if (u.periods) throw std::invalid_argument("lemma21: u must decay along x_N");
  const double win = opt.window > 0.0 ? opt.window : 16.0 * u.feature;
  const auto qn = composite_gauss(graded_breaks(-win, win, 1.0, 0.5 * u.feature), opt.radial.order);

  Lemma21Result res;
  res.points = opt.points;
  if (res.points.empty())
    for (double s : {0.0, 0.5, 1.0, 2.0}) {
      Vec p(n - 1, 0.0);
      p[0] = s * u.feature;
      res.points.push_back(p);
    }

  auto v_at = [&](const Vec& xp) {
    Vec x(xp);
    x.push_back(0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < qn.size(); ++i) {
      x[n - 1] = qn.nodes[i];
      s += qn.weights[i] * u.eval(x);
    }
    return s;
  };

  // Polar atoms act purely along x_N; their contribution outside the window is
  // -(w/2) int u(x', y) ((win - y)^{-a} + (win + y)^{-a}) / a dy.
  double pole_weight = 0.0;
  for (const auto& node : mu.nodes())
    if (1.0 - node.point[n - 1] * node.point[n - 1] < kPoleCutoff) pole_weight += node.weight;

  QuadratureOptions radial = opt.radial;
  if (radial.length_scale <= 0.0) radial.length_scale = win;
  const auto proj = project(mu, alpha);
  auto v_fn = TestFunction::decaying(n - 1, v_at, u.feature);

  for (const auto& xp : res.points) {
    if (xp.size() != n - 1) throw std::invalid_argument("lemma21: sample point dimension mismatch");
    Vec x(xp);
    x.push_back(0.0);
    double lhs = 0.0, far = 0.0;
    for (std::size_t i = 0; i < qn.size(); ++i) {
      x[n - 1] = qn.nodes[i];
      lhs += qn.weights[i] * apply_quadrature(u, mu, alpha, x, opt.rho, radial).total();
      if (pole_weight > 0.0) {
        const double y = qn.nodes[i];
        far += qn.weights[i] * u.eval(x) * (std::pow(win - y, -alpha) + std::pow(win + y, -alpha)) / alpha;
      }
    }
    lhs -= 0.5 * pole_weight * far;
    const double rhs = proj.nodes().empty() ? 0.0 : apply_quadrature(v_fn, proj, alpha, xp, opt.rho, radial).total();
    res.lhs.push_back(lhs);
    res.rhs.push_back(rhs);
    res.residual = std::max(res.residual, std::abs(lhs - rhs));
  }
  return res;
}

TruncationReport truncated_convergence_report(const Field& phi, const SpectralMeasure& mu, double alpha,
                                              double beta, double rho, const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("truncation report: empty lambda list");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 1.0)) throw std::invalid_argument("truncation report: lambdas must be >= 1");
    if (i && !(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("truncation report: lambdas must increase");
  }
  const auto& g = phi.grid;
  const auto primed_in = build_symbol_grid(SymbolSpec::primed(mu, alpha).inner(rho), g);
  const auto primed_out = build_symbol_grid(SymbolSpec::primed(mu, alpha).outer(rho), g);
  TruncationReport rep;
  rep.target_slope = 1.0 / alpha - beta;
  for (double lam : lambdas) {
    const auto base = SymbolSpec::rescaled(mu, alpha, lam, beta);
    auto in = build_symbol_grid(base.inner(rho), g);
    auto out = build_symbol_grid(base.outer(rho), g);
    for (std::size_t i = 0; i < in.values.size(); ++i) {
      in.values[i] -= primed_in.values[i];
      out.values[i] -= primed_out.values[i];
    }
    const Field din = apply_multiplier(phi, in), dout = apply_multiplier(phi, out);
    rep.rows.push_back({lam, dout.lp_norm(1.0), din.lp_norm(1.0), din.lp_norm(INFINITY)});
  }
  if (rep.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(rep.rows.size());
    for (const auto& r : rep.rows) {
      const double lx = std::log(r.lambda), ly = std::log(r.inner_l1);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    rep.inner_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  rep.outer_monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    rep.outer_monotone = rep.outer_monotone && rep.rows[i].outer_l1 < rep.rows[i - 1].outer_l1;
  return rep;
}

}  // namespace anisodiff
