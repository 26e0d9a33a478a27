#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "anisodiff/asymptotics.hpp"
#include "anisodiff/kernel.hpp"

using namespace anisodiff;

namespace {

SolverConfig linear_heat(double len, std::size_t n) {
  SolverConfig c;
  c.alpha = 1.5;
  c.measure = SpectralMeasure::isotropic(1, 0.5 / c_alpha_total(1.5));
  c.convection = false;
  c.grid = PeriodicGrid({len}, {n});
  return c;
}

}  // namespace

TEST_CASE("regime classification") {
  auto d = classify(1.5, 3.0, 1);
  CHECK(d.q_star == doctest::Approx(1.5));
  CHECK(d.regime == Regime::Diffusion);
  CHECK(d.beta == doctest::Approx(2.0 / 3.0));
  CHECK(d.gamma == doctest::Approx(2.0 / 3.0));
  CHECK(d.target_slope(INFINITY) == doctest::Approx(-2.0 / 3.0));
  CHECK(d.target_slope(2.0) == doctest::Approx(-1.0 / 3.0));

  auto c = classify(1.5, 1.2, 1);
  CHECK(c.regime == Regime::Convection);
  CHECK(c.beta == doctest::Approx(1 / 1.2));
  CHECK(c.gamma == doctest::Approx(c.beta));
  CHECK(c.target_slope(INFINITY) == doctest::Approx(-1 / 1.2));

  CHECK(classify(1.5, 1.5, 1).regime == Regime::Critical);
  auto local = classify(2.0, 2.0, 1);
  CHECK(local.q_star == 2.0);
  CHECK(local.regime == Regime::Critical);

  CHECK(classify(0.5, 0.5, 1).outside_theory);
  CHECK_FALSE(classify(0.5, 0.6, 1).outside_theory);
  CHECK_FALSE(classify(1.5, 1.5, 1).outside_theory);

  CHECK_THROWS(classify(1.5, 0.5, 2));
  CHECK_THROWS(classify(1.5, 0.0, 1));
  CHECK_THROWS(classify(2.5, 2.0, 1));

  std::ostringstream os;
  write_regime_table({d, c}, os);
  CHECK(os.str().rfind("alpha,q,N,regime,beta,gamma,target_slope_linf\n", 0) == 0);
  CHECK(os.str().find("convection") != std::string::npos);
}

TEST_CASE("property: the two decay exponents coincide on the critical line") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> a(0.05, 1.95);
  std::uniform_int_distribution<int> dim(1, 3);
  for (int k = 0; k < 50; ++k) {
    const double alpha = a(rng);
    const std::size_t n = dim(rng);
    const double qs = 1.0 + (alpha - 1.0) / n;
    if (!(qs > 1.0 - 1.0 / n)) continue;
    const double lhs = n / alpha, rhs = (1.0 / qs) * (1.0 + (n - 1.0) / alpha);
    CHECK(std::abs(lhs - rhs) < 1e-14 * lhs);
    // continuity across the critical line
    auto below = classify(alpha, qs * (1 - 1e-13), n);
    CHECK(std::abs(below.beta - 1.0 / alpha) < 1e-12);
  }
}

TEST_CASE("property: convection regime has alpha beta > 1") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> a(0.1, 1.9), u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double alpha = a(rng);
    const std::size_t n = 1 + k % 3;
    const double qs = 1.0 + (alpha - 1.0) / n, qmin = 1.0 - 1.0 / n;
    const double q = qmin + (qs - qmin) * (0.01 + 0.98 * u(rng));
    if (q <= 0.0) continue;
    auto p = classify(alpha, q, n);
    REQUIRE(p.regime == Regime::Convection);
    CHECK(alpha * p.beta > 1.0);
    CHECK(p.gamma == doctest::Approx((n - 1.0) / alpha + p.beta));
  }
}

TEST_CASE("scaled initial data") {
  PeriodicGrid g({40.0}, {1024});
  auto gauss = [](const Vec& x) { return std::exp(-x[0] * x[0]); };
  const auto p = classify(1.5, 3.0, 1);
  const Field base = Field::sample(g, gauss);
  const Field same = scale_initial_data(gauss, g, 1.0, p);
  CHECK(same.data == base.data);

  for (double lambda : {2.0, 8.0, 30.0}) {
    const Field s = scale_initial_data(gauss, g, lambda, p);
    CHECK(std::abs(s.integral() - base.integral()) < 1e-10 * base.integral());
    // width shrinks by lambda^{1/alpha}
    const double w = std::pow(lambda, 1 / 1.5);
    const double xs = g.coord(0, 540);
    CHECK(s.data[540] / s.max() == doctest::Approx(std::exp(-w * w * xs * xs)).epsilon(1e-6));
  }
  // the field version agrees with the callable one
  const Field viaf = scale_initial_data(base, 8.0, p);
  const Field viac = scale_initial_data(gauss, g, 8.0, p);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(viaf.data[i] - viac.data[i]));
  CHECK(err < 1e-8 * viac.max());

  CHECK_THROWS(scale_initial_data(gauss, g, 1e4, p));
  CHECK_THROWS(scale_initial_data(gauss, g, 0.5, p));
}

TEST_CASE("rescaled configuration") {
  SolverConfig c;
  c.alpha = 1.5;
  c.q = 1.2;
  c.grid = PeriodicGrid({10.0, 10.0}, {16, 16});
  c.measure = SpectralMeasure::isotropic(2, 1.0);
  const auto p = classify(1.5, 1.2, 2);
  auto r = rescaled_config(c, 16.0, p);
  CHECK(r.op == OperatorKind::Rescaled);
  CHECK(r.lambda == 16.0);
  CHECK(r.beta == doctest::Approx(p.beta));
  CHECK(r.convection_coeff == doctest::Approx(std::pow(16.0, -p.convection_exponent())));
  // in the diffusive regime the operator is unchanged and the convection weakens
  c.q = 3.0;
  const auto pd = classify(1.5, 3.0, 2);
  auto rd = rescaled_config(c, 16.0, pd);
  CHECK(rd.op == OperatorKind::Full);
  CHECK(rd.convection_coeff < 1.0);
  c.epsilon = 0.1;
  CHECK_THROWS(rescaled_config(c, 2.0, pd));
}

TEST_CASE("power-law fits") {
  Vec t, y;
  for (int i = 0; i < 40; ++i) {
    t.push_back(std::pow(10.0, i / 20.0));
    y.push_back(3.0 * std::pow(t.back(), -0.5));
  }
  FitOptions o;
  const auto f = fit_power_law(t, y, o);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(f.stderr_ < 1e-12);
  CHECK(f.samples == 40);

  o.t_lo = 50.0;  // 7 samples (50 .. 89)
  CHECK_THROWS(fit_power_law(t, y, o));
  o.t_lo = 1.0;
  o.transient = 2.0;
  CHECK_THROWS(fit_power_law(t, y, o));
  CHECK_THROWS(fit_power_law(t, {1.0}, {}));

  DiagnosticsSeries s;
  for (std::size_t i = 0; i < t.size(); ++i) s.records.push_back({t[i], 1.0, 1.0, y[i], y[i], 0, 0, 0, 0, 0});
  CHECK(fit_decay_rate(s, 2.0, {}).slope == doctest::Approx(-0.5));
  CHECK(fit_decay_rate(s, 0.0, {}).slope == doctest::Approx(0.0));
  CHECK_THROWS(fit_decay_rate(s, 3.0, {}));
  CHECK(transient_time(2.0, 1.5) == doctest::Approx(5.0 * std::pow(2.0, 1.5)));
}

TEST_CASE("mass fitted as a decay has slope zero") {
  SolverConfig c = linear_heat(500.0, 1024);
  c.convection = true;
  c.q = 3.0;
  c.horizon = 20.0;
  for (int i = 0; i < 30; ++i) c.diagnostic_times.push_back(2.0 * std::pow(10.0, i / 29.0));
  Solver s(c);
  const auto r = s.run(initial_bump(c.grid, 1.0, 2.0, {0.0}));
  FitOptions o;
  o.t_lo = 2.0;
  CHECK(std::abs(fit_decay_rate(r.diagnostics, 0.0, o).slope) < 1e-10);
}

TEST_CASE("domain doubling certification") {
  SolverConfig c = linear_heat(1000.0, 2048);
  c.horizon = 50.0;
  for (int i = 0; i < 20; ++i) c.diagnostic_times.push_back(5.0 * std::pow(10.0, i / 19.0));
  FitOptions o;
  o.t_lo = 5.0;
  const auto u0 = [](const Vec& x) { return std::exp(-x[0] * x[0]); };
  const auto d = domain_doubling_check(c, u0, INFINITY, o);
  CHECK(d.certified);
  CHECK(d.shift < 0.01);
  CHECK(d.base.slope == doctest::Approx(-1 / 1.5).epsilon(0.05));
}

TEST_CASE("self-similar profile of the linear flow") {
  SolverConfig c = linear_heat(3000.0, 4096);
  const auto r = self_similar_profile(c, 2.0, {20.0, 40.0});
  REQUIRE(r.profile_mass.size() == 2);
  for (double m : r.profile_mass) CHECK(std::abs(m - 2.0) < 1e-8);
  CHECK(r.defect < 1e-2);
  // the earlier snapshot loses its heavy tail beyond the common window
  CHECK(r.mean_profile.integral() == doctest::Approx(2.0).epsilon(1e-3));
  CHECK_THROWS(self_similar_profile(c, 1.0, {20.0}));

  // a grid that is too small lets the profile escape
  SolverConfig tiny = linear_heat(20.0, 256);
  CHECK_THROWS(self_similar_profile(tiny, 1.0, {50.0, 100.0}));
}

TEST_CASE("rescaled family of the linear flow") {
  SolverConfig c = linear_heat(400.0, 4096);
  const auto u0 = [](const Vec& x) { return std::exp(-x[0] * x[0] / 16); };
  const auto f = rescaled_family_distance(c, u0, {1.0, 4.0, 16.0, 64.0}, 1.0, 2);
  for (std::size_t i = 0; i < 4; ++i) CHECK(f.distance[i][i] == 0.0);
  CHECK(f.distance[0][1] == f.distance[1][0]);
  // successive distances shrink
  CHECK(f.distance[1][2] < f.distance[0][1]);
  CHECK(f.distance[2][3] < f.distance[1][2]);
  CHECK(f.top_half_max < f.bottom_half_max);
  CHECK_THROWS(rescaled_family_distance(c, u0, {4.0, 2.0}));
  CHECK_THROWS(rescaled_family_distance(c, u0, {}));
}

TEST_CASE("interpolation bound") {
  CHECK(oleinik_linf_bound(1, 1, 1) == doctest::Approx(std::sqrt(2.0)));
  // C = 1/(q t), q = 2, t = 4: bound scales like M^{1/2}
  const double c = 1.0 / 8.0;
  CHECK(oleinik_linf_bound(c, 1, 4.0) / oleinik_linf_bound(c, 1, 1.0) == doctest::Approx(2.0));
  CHECK_THROWS(oleinik_linf_bound(0, 1, 1));
  CHECK_THROWS(oleinik_linf_bound(1, -1, 1));
}
