// End-to-end acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "anisodiff/anisodiff.hpp"

using namespace anisodiff;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Line {
  int id;
  std::string text;
  bool pass;
};
std::vector<Line> lines;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[512];
  std::snprintf(buf, sizeof buf, "criterion %2d %s  %-32s %s  [%.1f s]", id, o.pass ? "PASS" : "FAIL", name,
                o.detail.c_str(), secs);
  std::fprintf(stderr, "%s\n", buf);
  lines.push_back({id, buf, o.pass});
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double c_alpha_closed(double a) {
  return a == 1.0 ? M_PI / 2 : std::tgamma(1.0 - a) * std::cos(M_PI * a / 2) / a;
}

// Measure on S^0 whose symbol is exactly |xi|^alpha.
SpectralMeasure unit_heat_1d(double alpha) { return SpectralMeasure::isotropic(1, 0.5 / c_alpha_closed(alpha)); }

Vec log_times(double a, double b, std::size_t n) {
  Vec t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
  return t;
}

void report(const RunResult& r) {
  std::fprintf(stderr, "  run: %zu steps, mass drift %.2e, max excess %.2e, clipped %.2e\n", r.steps,
               r.max_mass_drift, r.max_seen / r.max0 - 1.0, r.max_clip_fraction);
}

struct DecayRun {
  RunResult result;
  double width;
};

// N = 1 decay harness: bump of width 4 dx, symbol |xi|^alpha, unit convection.
DecayRun decay_run(double alpha, double q, double mass, double length, std::size_t n, double horizon = 200.0) {
  SolverConfig c;
  c.alpha = alpha;
  c.q = q;
  c.measure = unit_heat_1d(alpha);
  c.grid = PeriodicGrid({length}, {n});
  c.horizon = horizon;
  c.diagnostic_times = log_times(1.0, horizon, 100);
  const double w = 4.0 * c.grid.dx(0);
  Solver s(c);
  DecayRun out{s.run(initial_bump(c.grid, mass, w, {-0.42 * length})), w};
  report(out.result);
  return out;
}

FitResult linf_fit(const DecayRun& r, double alpha, double lo, double hi) {
  FitOptions o;
  o.transient = transient_time(r.width, alpha);
  o.t_lo = std::max(lo, o.transient);
  o.t_hi = hi;
  return fit_decay_rate(r.result.diagnostics, INFINITY, o);
}

}  // namespace

int main() {
  constexpr double a15 = 1.5;

  criterion(1, "symbol golden values", [] {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-50.0, 50.0);
    double worst = 0.0;
    for (double a : {0.7, 1.0, 1.3, 1.8}) {
      const auto mu = SpectralMeasure::atoms(2, {{{1, 0}, 1.0}, {{0, 1}, 1.0}});
      const auto spec = SymbolSpec::full(mu, a);
      const double ca = c_alpha_closed(a);
      for (int i = 0; i < 1000; ++i) {
        const Vec xi{U(rng), U(rng)};
        const double ref = ca * (std::pow(std::abs(xi[0]), a) + std::pow(std::abs(xi[1]), a));
        worst = std::max(worst, std::abs(evaluate_symbol(spec, xi) - ref) / ref);
      }
    }
    return Outcome{worst < 1e-10, fmt("max rel err %.2e (tol 1e-10)", worst)};
  });

  criterion(2, "truncation additivity and limit", [] {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-20.0, 20.0);
    const auto mu = SpectralMeasure::atoms(2, {{{1, 0}, 1.0}, {{0.6, 0.8}, 0.5}, {{-0.28, 0.96}, 2.0}});
    double add = 0.0, lim_ratio = 0.0;
    for (double a : {0.7, 1.0, 1.3, 1.8}) {
      for (double rho : {0.3, 1.0, 4.0})
        for (const auto& base : {SymbolSpec::full(mu, a), SymbolSpec::primed(mu, a)})
          for (int i = 0; i < 300; ++i) {
            const Vec xi{U(rng), U(rng)};
            const double m = evaluate_symbol(base, xi);
            const double s = evaluate_symbol(base.inner(rho), xi) + evaluate_symbol(base.outer(rho), xi);
            if (m > 0) add = std::max(add, std::abs(s - m) / m);
          }
      const double dev = std::abs(c_leq(100.0, a) - c_alpha_total(a));
      lim_ratio = std::max(lim_ratio, dev / (2.0 * std::pow(100.0, -a) / a));
    }
    return Outcome{add < 1e-10 && lim_ratio < 1.0,
                   fmt("additivity %.2e (tol 1e-10), |c_leq(100)-C|/bound %.3f (< 1)", add, lim_ratio)};
  });

  criterion(3, "projection identity", [] {
    const auto mu = SpectralMeasure::atoms(2, {{{1, 0}, 1.0}, {{0.6, 0.8}, 0.7}, {{-0.8, 0.6}, 1.3}});
    const double w = 1.0;
    const auto u = TestFunction::decaying(
        2, [w](const Vec& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2 * w * w)); }, w);
    auto residual = [&](std::size_t order) {
      Lemma21Options o;
      if (order) o.radial.order = order;
      return lemma21_residual(u, mu, a15, o);
    };
    const auto def = residual(0);
    const double r_def = def.residual, r_dbl = residual(2 * QuadratureOptions{}.order).residual;
    // below ~1e-10 relative the residual is roundoff; halving is then checked on
    // the coarsest rule instead
    const double floor = 1e-10 * std::abs(def.lhs.front());
    const double r2 = residual(2).residual, r4 = residual(4).residual;
    const bool halves = r_dbl <= 0.5 * r_def || (r_def < floor * 10 && r4 <= 0.5 * r2);
    return Outcome{r_def < 1e-5 && halves,
                   fmt("default %.2e (tol 1e-5), doubled %.2e; order 2 -> 4: %.2e -> %.2e", r_def, r_dbl, r2, r4)};
  });

  criterion(4, "canonical projection", [] {
    const double c = 0.37;
    const auto mu = SpectralMeasure::atoms(3, {{{1, 0, 0}, c}, {{0, 1, 0}, c}, {{0, 0, 1}, c}});
    const auto p = project(mu, a15);
    double err = 0.0;
    bool shape = p.kind() == SpectralMeasure::Kind::Atoms && p.atom_list().size() == 2;
    Vec got(2, 0.0);
    if (shape)
      for (const auto& at : p.atom_list()) {
        const std::size_t j = std::abs(at.dir[0]) > 0.5 ? 0 : 1;
        shape = shape && std::abs(std::abs(at.dir[j]) - 1.0) < 1e-15;
        got[j] += at.weight;
      }
    for (double g : got) err = std::max(err, std::abs(g - c) / c);
    return Outcome{shape && err < 1e-15,
                   std::string(shape ? "two atoms e1, e2" : "wrong atoms") + fmt(", weight err %.1e (tol 1e-15)", err)};
  });

  criterion(6, "L1 contraction", [] {
    SolverConfig c;
    c.alpha = a15;
    c.q = 2.0;
    c.measure = unit_heat_1d(a15);
    c.grid = PeriodicGrid({100.0}, {2048});
    c.horizon = 20.0;
    for (int i = 1; i <= 200; ++i) c.diagnostic_times.push_back(c.horizon * i / 200.0);
    const Field u0 = initial_bump(c.grid, 1.0, 2.0, {-5.0});
    Field ub = initial_bump(c.grid, 0.5, 3.0, {5.0});
    for (std::size_t i = 0; i < ub.data.size(); ++i) ub.data[i] += u0.data[i];
    const auto sr = contraction_check(c, u0, ub);
    double worst = 0.0;
    for (std::size_t i = 1; i < sr.distance.size(); ++i)
      worst = std::max(worst, (sr.distance[i] - sr.distance[i - 1]) / sr.distance[i - 1]);
    return Outcome{worst <= 1e-10 && sr.distance.size() >= 200,
                   fmt("%g samples, max relative increase %.2e (tol 1e-10), ordered %g", sr.distance.size(), worst,
                       sr.ordered)};
  });

  criterion(7, "diffusion-regime decay", [&] {
    const auto r = decay_run(a15, 3.0, 1.0, 500.0, 4096);
    const auto f = linf_fit(r, a15, 1.0, 200.0);
    const double target = classify(a15, 3.0, 1).target_slope(INFINITY);
    return Outcome{std::abs(f.slope - target) <= 0.05,
                   fmt("slope %.4f, target %.4f +- 0.05, %g samples", f.slope, target, f.samples)};
  });

  DecayRun conv;
  criterion(8, "convection-regime decay", [&] {
    conv = decay_run(a15, 1.2, 1e10, 7700.0, 4096);
    const auto f = linf_fit(conv, a15, 1.0, 200.0);
    const double target = classify(a15, 1.2, 1).target_slope(INFINITY);
    return Outcome{std::abs(f.slope - target) <= 0.05,
                   fmt("slope %.4f, target %.4f +- 0.05, window from t=%.0f", f.slope, target,
                       std::max(1.0, transient_time(conv.width, a15)))};
  });

  criterion(9, "regime crossover", [&] {
    const auto lo = decay_run(a15, 1.3, 1e10, 26000.0, 16384);
    const auto hi = decay_run(a15, 1.7, 1.0, 500.0, 4096);
    const double s_lo = linf_fit(lo, a15, 1.0, 200.0).slope, s_hi = linf_fit(hi, a15, 1.0, 200.0).slope;
    const double t_lo = classify(a15, 1.3, 1).target_slope(INFINITY), t_hi = classify(a15, 1.7, 1).target_slope(INFINITY);
    const bool ok = std::abs(s_lo - t_lo) <= 0.07 && std::abs(s_hi - t_hi) <= 0.07 && s_lo < s_hi;
    return Outcome{ok, fmt("q=1.3: %.4f (target %.4f), q=1.7: %.4f (target %.4f), tol 0.07", s_lo, t_lo, s_hi, t_hi)};
  });

  criterion(10, "Oleinik bound", [] {
    SolverConfig c;
    c.alpha = a15;
    c.q = 2.0;
    c.measure = SpectralMeasure::isotropic(1, 1e-3 * 0.5 / c_alpha_closed(a15));
    c.grid = PeriodicGrid({400.0}, {16384});
    c.horizon = 50.0;
    c.diagnostic_times = log_times(1.0, 50.0, 100);
    // Riemann data: a plateau whose right edge is a shock and left edge a fan
    Field u0 = Field::sample(c.grid, [](const Vec& x) { return x[0] > -150.0 && x[0] < -100.0 ? 1.0 : 0.0; });
    Solver s(c);
    const auto r = s.run(u0);
    report(r);
    double worst = 0.0;
    for (const auto& d : r.diagnostics.records)
      if (d.t >= 1.0) worst = std::max(worst, d.oleinik * c.q * d.t);
    return Outcome{worst <= 1.2, fmt("max statistic*q*t %.4f (tol 1.2)", worst)};
  });

  criterion(11, "truncated-operator rates", [] {
    const double q = 1.2;
    const auto mu = SpectralMeasure::atoms(
        2, {{{1, 0}, 1.0}, {{0.5, std::sqrt(3.0) / 2}, 1.0}, {{-0.5, std::sqrt(3.0) / 2}, 1.0}});
    const PeriodicGrid g({40.0, 40.0}, {128, 128});
    const Field phi = Field::sample(g, [](const Vec& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2); });
    const double beta = classify(a15, q, 2).beta;
    const auto rep = truncated_convergence_report(phi, mu, a15, beta, 1.0, {1.0, 10.0, 100.0, 1000.0});
    const double outer_slope = std::log(rep.rows.back().outer_l1 / rep.rows.front().outer_l1) /
                               std::log(rep.rows.back().lambda / rep.rows.front().lambda);
    const bool ok = std::abs(rep.inner_slope - rep.target_slope) <= 0.15 && rep.outer_monotone && outer_slope < 0.0;
    return Outcome{ok, fmt("inner slope %.4f, target %.4f +- 0.15, outer decreasing %g (slope %.4f)",
                           rep.inner_slope, rep.target_slope, rep.outer_monotone, outer_slope)};
  });

  criterion(12, "rescaled-family Cauchy trend", [] {
    SolverConfig c;
    c.alpha = a15;
    c.q = 3.0;
    c.measure = unit_heat_1d(a15);
    c.grid = PeriodicGrid({100.0}, {4096});
    const double w = 2.0;
    auto u0 = [w](const Vec& x) {
      const double s = x[0] * x[0] / (w * w);
      return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
    };
    const auto fam = rescaled_family_distance(c, u0, {1.0, 4.0, 16.0, 64.0}, 1.0, 4);
    const double ratio = fam.top_half_max / fam.bottom_half_max;
    return Outcome{ratio < 1.0 / 3.0, fmt("late %.3e / early %.3e = %.3f (tol 1/3)", fam.top_half_max,
                                          fam.bottom_half_max, ratio)};
  });

  criterion(13, "self-similar linear flow", [] {
    SolverConfig c;
    c.alpha = a15;
    c.convection = false;
    c.measure = unit_heat_1d(a15);
    // the heavy tails wrap around the torus; the defect they cause falls like L^{-3/2}
    c.grid = PeriodicGrid({6000.0}, {4096});
    c.horizon = 100.0;
    const auto prof = self_similar_profile(c, 1.0, {50.0, 100.0});
    double mass_err = 0.0;
    for (double m : prof.profile_mass) mass_err = std::max(mass_err, std::abs(m - 1.0));
    return Outcome{prof.defect < 1e-3 && mass_err < 1e-8,
                   fmt("L1 defect %.2e (tol 1e-3), profile mass error %.1e", prof.defect, mass_err)};
  });

  criterion(14, "interpolation consistency", [&] {
    if (conv.result.diagnostics.records.empty()) return Outcome{false, "criterion 8 run missing"};
    const double k = 1.2 - 1.0;
    double worst = 0.0;
    for (const auto& d : conv.result.diagnostics.records) {
      if (d.t <= 0.0 || !(d.oleinik > 0.0)) continue;
      // N = 1: the largest slice mass is the total mass
      const double bound = oleinik_linf_bound(d.oleinik, k, d.l1);
      worst = std::max(worst, d.linf / bound);
    }
    return Outcome{worst <= 1.1, fmt("max linf / bound %.4f (tol 1.1)", worst)};
  });

  criterion(5, "conservation and max principle", [] {
    const auto a = run_audit();
    return Outcome{a.worst_mass_drift < 1e-12 && a.worst_max_excess <= 1e-12,
                   fmt("%g runs: mass drift %.2e (tol 1e-12), max excess %.2e (tol 1e-12)",
                       static_cast<double>(a.runs), a.worst_mass_drift, a.worst_max_excess)};
  });

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  int failures = 0;
  for (const auto& l : lines) {
    std::printf("%s\n", l.text.c_str());
    failures += l.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failures, lines.size());
  return failures == 0 ? 0 : 1;
}
