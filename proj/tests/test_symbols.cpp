#include <doctest.h>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "anisodiff/kernel.hpp"
#include "anisodiff/symbols.hpp"

using namespace anisodiff;

namespace {

constexpr double kPi = std::numbers::pi;

// int_0^s 2 sin^2(t/2) t^{-1-a} dt by tanh-sinh.
double leq_oracle(double s, double a) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([a](double t) {
    if (t < 1e-6) return 0.5 * std::pow(t, 1.0 - a) * (1.0 - t * t / 12.0);
    const double h = std::sin(0.5 * t);
    return 2.0 * h * h * std::pow(t, -1.0 - a);
  }, 0.0, s);
}

// C_alpha with the oscillatory tail done by Ooura's rule over [1, inf).
double c_alpha_oracle(double a) {
  boost::math::quadrature::ooura_fourier_cos<double> oc;
  boost::math::quadrature::ooura_fourier_sin<double> os;
  auto g = [a](double s) { return std::pow(s + 1.0, -1.0 - a); };
  const double cos_tail = std::cos(1.0) * oc.integrate(g, 1.0).first - std::sin(1.0) * os.integrate(g, 1.0).first;
  return leq_oracle(1.0, a) + 1.0 / a - cos_tail;
}

double c_closed(double a) {
  if (a == 1.0) return kPi / 2;
  return std::tgamma(1 - a) * std::cos(kPi * a / 2) / a;
}

SpectralMeasure mixed2() { return SpectralMeasure::atoms(2, {{{1, 0}, 1.0}, {{1, 2}, 0.5}, {{-1, 1}, 2.0}}); }

SpectralMeasure mixed3() {
  return SpectralMeasure::atoms(3, {{{1, 0, 0}, 1.0}, {{0, 1, 1}, 0.5}, {{1, -1, 2}, 2.0}, {{0, 0, 1}, 1.0}});
}

}  // namespace

TEST_CASE("kernel constants") {
  CHECK(c_alpha_total(1.0) == doctest::Approx(kPi / 2).epsilon(1e-14));
  for (double a : {0.1, 0.3, 0.7, 1.0, 1.3, 1.5, 1.9}) {
    CAPTURE(a);
    const double c = c_alpha_total(a);
    CHECK(std::isfinite(c));
    CHECK(c > 0.0);
    CHECK(std::abs(c - c_closed(a)) < 1e-12 * c);
    CHECK(std::abs(c - c_alpha_oracle(a)) < 1e-9 * c);
  }
  CHECK_THROWS(c_alpha_total(2.0));
  CHECK_THROWS(c_alpha_total(0.0));
}

TEST_CASE("truncated kernel integrals") {
  CHECK(c_leq(0.0, 1.2) == 0.0);
  CHECK(c_leq(1.0, 1.0) == doctest::Approx(leq_oracle(1.0, 1.0)).epsilon(1e-13));
  for (double a : {0.2, 0.9, 1.0, 1.6, 1.95}) {
    CAPTURE(a);
    for (double s : {0.1, 1.0, 10.0}) {
      CAPTURE(s);
      CHECK(std::abs(c_leq(s, a) + c_gt(s, a) - c_alpha_total(a)) < 1e-13 * c_alpha_total(a));
      CHECK(c_gt(s, a) <= 2.0 * std::pow(s, -a) / a);
      CHECK(c_leq(s, a) == doctest::Approx(leq_oracle(s, a)).epsilon(1e-11));
    }
  }
  // across the internal breakpoints: monotone in s
  for (double a : {0.5, 1.5}) {
    double prev = 0.0;
    for (double s = 0.05; s < 120.0; s *= 1.07) {
      const double v = c_leq(s, a);
      CHECK(v >= prev);
      prev = v;
    }
  }
  CHECK_THROWS(c_leq(-1.0, 1.0));
}

TEST_CASE("isotropic symbols are radial") {
  for (std::size_t dim : {1u, 2u, 3u}) {
    auto spec = SymbolSpec::full(SpectralMeasure::isotropic(dim, 0.8), 1.3);
    std::mt19937_64 rng(dim);
    std::normal_distribution<double> g;
    double lo = 1e300, hi = 0.0;
    for (int k = 0; k < 40; ++k) {
      Vec xi(dim);
      double len = 0.0;
      for (double& x : xi) {
        x = g(rng);
        len += x * x;
      }
      const double ratio = evaluate_symbol(spec, xi) / std::pow(std::sqrt(len), 1.3);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    CHECK((hi - lo) / hi < 1e-10);
  }
  // N = 1: weight c at +-1 gives 2 c C_alpha |xi|^alpha
  auto one = SymbolSpec::full(SpectralMeasure::isotropic(1, 0.8), 1.3);
  CHECK(evaluate_symbol(one, {2.0}) == doctest::Approx(2 * 0.8 * c_alpha_total(1.3) * std::pow(2.0, 1.3)));
}

TEST_CASE("canonical atoms give a separable symbol") {
  const double a = 1.3;
  auto spec = SymbolSpec::full(SpectralMeasure::atoms(2, {{{1, 0}, 1.0}, {{0, 1}, 1.0}}), a);
  const Vec xi{0.7, -2.1};
  const double expect = c_alpha_total(a) * (std::pow(0.7, a) + std::pow(2.1, a));
  CHECK(std::abs(evaluate_symbol(spec, xi) - expect) < 1e-10);
  CHECK(evaluate_symbol(spec, {0.0, 0.0}) == 0.0);
}

TEST_CASE("inner plus outer equals the full symbol") {
  for (const auto& mu : {mixed2(), SpectralMeasure::isotropic(2, 1.0)}) {
    auto full = SymbolSpec::full(mu, 1.4);
    for (double rho : {0.1, 1.0, 7.0}) {
      for (const Vec& xi : {Vec{0.3, 0.2}, Vec{5.0, -1.0}, Vec{0.0, 12.0}}) {
        const double f = evaluate_symbol(full, xi);
        const double s = evaluate_symbol(full.inner(rho), xi) + evaluate_symbol(full.outer(rho), xi);
        CHECK(std::abs(f - s) < 1e-10 * std::max(1.0, f));
      }
    }
  }
}

TEST_CASE("primed, projected and rescaled symbols") {
  const double a = 1.2;
  for (const auto& mu : {mixed3(), SpectralMeasure::isotropic(3, 0.5)}) {
    auto primed = SymbolSpec::primed(mu, a);
    auto tilde = SymbolSpec::tilde(mu, a);
    auto full = SymbolSpec::full(mu, a);
    for (const Vec& xi : {Vec{0.4, -1.0, 3.0}, Vec{2.0, 0.5, -7.0}}) {
      const double p = evaluate_symbol(primed, xi);
      const double t = evaluate_symbol(tilde, {xi[0], xi[1]});
      CHECK(std::abs(p - t) < 1e-10 * p);
      // lambda = 1 and beta = 1/alpha reduce to the full operator
      const double r = evaluate_symbol(SymbolSpec::rescaled(mu, a, 1.0, 1.0 / a), xi);
      CHECK(std::abs(r - evaluate_symbol(full, xi)) < 1e-12 * r);
    }
  }
  CHECK_THROWS(evaluate_symbol(SymbolSpec::tilde(SpectralMeasure::isotropic(1, 1.0), a), {}));
  CHECK_THROWS(evaluate_symbol(SymbolSpec::full(mixed2(), a), {1.0}));
}

TEST_CASE("property: homogeneity of degree alpha") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3), t(0.1, 10);
  for (double a : {0.4, 1.0, 1.8}) {
    for (const auto& spec : {SymbolSpec::full(mixed2(), a), SymbolSpec::full(SpectralMeasure::isotropic(2, 1), a),
                             SymbolSpec::primed(mixed2(), a)}) {
      for (int k = 0; k < 10; ++k) {
        Vec xi{u(rng), u(rng)};
        const double s = t(rng);
        const double lhs = evaluate_symbol(spec, {s * xi[0], s * xi[1]});
        const double rhs = std::pow(s, a) * evaluate_symbol(spec, xi);
        CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1e-300, std::abs(rhs)) + 1e-300);
      }
    }
  }
}

TEST_CASE("property: two-sided bound by the nondegeneracy constant and the total mass") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const double a = 1.5;
  for (const auto& mu : {mixed2(), SpectralMeasure::isotropic(2, 0.4)}) {
    const double lam = nondegeneracy_constant(mu, a, 4096);
    const double mass = total_mass(mu);
    auto spec = SymbolSpec::full(mu, a);
    for (int k = 0; k < 50; ++k) {
      Vec xi{g(rng), g(rng)};
      const double r = std::pow(std::hypot(xi[0], xi[1]), a);
      const double m = evaluate_symbol(spec, xi);
      CHECK(m >= c_alpha_total(a) * lam * r * (1 - 1e-4));
      CHECK(m <= c_alpha_total(a) * mass * r * (1 + 1e-12));
    }
  }
}

TEST_CASE("property: inner truncation grows with rho") {
  auto spec = SymbolSpec::full(mixed2(), 0.8);
  const Vec xi{1.3, -0.4};
  double prev = 0.0;
  for (double rho = 0.01; rho < 1000; rho *= 1.5) {
    const double v = evaluate_symbol(spec.inner(rho), xi);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(prev <= evaluate_symbol(spec, xi) * (1 + 1e-12));
}

TEST_CASE("property: rescaled symbol tends to the primed one") {
  const double a = 1.5, beta = 1.0;  // beta > 1/alpha
  auto mu = mixed2();
  const Vec xi{0.8, 2.0};
  const double primed = evaluate_symbol(SymbolSpec::primed(mu, a), xi);
  std::vector<double> err;
  for (double lambda : {1e2, 1e4, 1e6}) err.push_back(std::abs(evaluate_symbol(SymbolSpec::rescaled(mu, a, lambda, beta), xi) - primed));
  // displacement scale lambda^{1/a - beta} = lambda^{-1/3}; |.|^a is C^1 here, so error ~ lambda^{-1/3}
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double rate = std::log(err[i - 1] / err[i]) / std::log(100.0);
    CHECK(rate == doctest::Approx(1.0 / 3.0).epsilon(0.05));
  }
}

TEST_CASE("symbol grids") {
  const double a = 1.5, c = 0.5;
  PeriodicGrid g({2 * kPi}, {64});
  auto sg = build_symbol_grid(SymbolSpec::full(SpectralMeasure::isotropic(1, c), a), g);
  for (std::size_t i = 0; i < 64; ++i) {
    const double k = static_cast<double>(g.wavenumber(0, i));
    CHECK(std::abs(sg.values[i] - 2 * c * c_alpha_total(a) * std::pow(std::abs(k), a)) < 1e-12 * (1 + sg.values[i]));
  }
  CHECK(sg.values[0] == 0.0);
  CHECK(std::isfinite(sg.values[32]));
  CHECK(sg.values[32] > 0.0);

  PeriodicGrid g2({10.0, 6.0}, {16, 12});
  auto s2 = build_symbol_grid(SymbolSpec::full(mixed2(), 1.1), g2);
  for (std::size_t i = 1; i < 16; ++i)
    for (std::size_t j = 1; j < 12; ++j) {
      if (i == 8 || j == 6) continue;  // Nyquist rows have no mirror on the lattice
      const double v = s2.values[i * 12 + j];
      const double mirrored = s2.values[(16 - i) * 12 + (12 - j)];
      CHECK(std::abs(v - mirrored) < 1e-12 * v);
    }
  for (double v : s2.values) CHECK(std::isfinite(v));
  CHECK(s2.half_layout().size() == 16 * 7);

  std::ostringstream os;
  write_symbol_csv(sg, os);
  CHECK(os.str().rfind("k0,xi0,value", 0) == 0);
  CHECK_THROWS(build_symbol_grid(SymbolSpec::full(mixed2(), 1.1), g));
}
