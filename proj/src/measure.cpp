#include "anisodiff/measure.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include "anisodiff/quadrature.hpp"

namespace anisodiff {

namespace {

double norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec matvec(const std::vector<Vec>& m, const Vec& v) {
  Vec out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = dot(m[i], v);
  return out;
}

Vec transpose_matvec(const std::vector<Vec>& m, const Vec& v) {
  Vec out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) out[j] += m[i][j] * v[i];
  return out;
}

// |S^{N-1}|-normalized constant in int |xi.theta|^alpha dtheta = k |xi|^alpha.
double isotropic_moment_factor(std::size_t dim, double alpha) {
  const double n = static_cast<double>(dim);
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (n - 1.0)) * std::tgamma(0.5 * (alpha + 1.0)) /
         std::tgamma(0.5 * (n + alpha));
}

}  // namespace

SpectralMeasure SpectralMeasure::atoms(std::size_t dim, std::vector<Atom> atoms) {
  if (dim < 1) throw MeasureError("measure dimension must be at least 1");
  SpectralMeasure m;
  m.kind_ = Kind::Atoms;
  m.dim_ = dim;
  for (auto& a : atoms) {
    if (a.dir.size() != dim) throw MeasureError("atom direction has wrong dimension");
    const double n = norm(a.dir);
    if (!(n > 0.0) || !std::isfinite(n)) throw MeasureError("atom direction must be nonzero");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight))
      throw MeasureError("atom weight must be positive and finite");
    for (double& x : a.dir) x /= n;
  }
  m.atoms_ = std::move(atoms);
  for (const auto& a : m.atoms_) m.weighted_.push_back({a.dir, a.weight});
  return m;
}

SpectralMeasure SpectralMeasure::density(std::size_t dim, DensityFn h, std::vector<SphereNode> rule) {
  if (dim < 1) throw MeasureError("measure dimension must be at least 1");
  if (!h) throw MeasureError("density evaluator missing");
  SpectralMeasure m;
  m.kind_ = Kind::Density;
  m.dim_ = dim;
  m.h_ = std::move(h);
  m.rule_ = rule.empty() ? default_sphere_rule(dim) : std::move(rule);
  m.weighted_.reserve(m.rule_.size());
  for (const auto& node : m.rule_) {
    if (!(node.weight > 0.0)) throw MeasureError("quadrature weights must be positive");
    const double v = m.h_(node.point);
    if (!(v >= 0.0) || !std::isfinite(v)) throw MeasureError("density must be finite and nonnegative");
    if (v > 0.0) m.weighted_.push_back({node.point, v * node.weight});
  }
  return m;
}

SpectralMeasure SpectralMeasure::isotropic(std::size_t dim, double c) {
  if (dim < 1) throw MeasureError("measure dimension must be at least 1");
  if (!(c > 0.0) || !std::isfinite(c)) throw MeasureError("isotropic constant must be positive");
  SpectralMeasure m;
  m.kind_ = Kind::Isotropic;
  m.dim_ = dim;
  m.c_ = c;
  if (dim <= 3) {
    m.weighted_ = default_sphere_rule(dim);
    for (auto& n : m.weighted_) n.weight *= c;
  }
  return m;
}

std::string SpectralMeasure::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Atoms:
      os << "atoms(N=" << dim_ << ", count=" << atoms_.size() << ")";
      break;
    case Kind::Density:
      os << "density(N=" << dim_ << ", nodes=" << rule_.size() << ")";
      break;
    case Kind::Isotropic:
      os << "isotropic(N=" << dim_ << ", c=" << c_ << ")";
      break;
  }
  return os.str();
}

double sphere_area(std::size_t dim) {
  if (dim == 1) return 2.0;
  const double n = static_cast<double>(dim);
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

std::vector<SphereNode> default_sphere_rule(std::size_t dim, std::size_t resolution) {
  std::vector<SphereNode> out;
  if (dim == 1) {
    out.push_back({{1.0}, 1.0});
    out.push_back({{-1.0}, 1.0});
  } else if (dim == 2) {
    const std::size_t n = resolution ? resolution : 256;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      out.push_back({{std::cos(t), std::sin(t)}, 2.0 * std::numbers::pi / static_cast<double>(n)});
    }
  } else if (dim == 3) {
    const std::size_t nz = resolution ? resolution : 48;
    const std::size_t nphi = 2 * nz;
    const auto gl = gauss_legendre(nz, -1.0, 1.0);
    for (std::size_t i = 0; i < nz; ++i) {
      const double z = gl.nodes[i], s = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (std::size_t j = 0; j < nphi; ++j) {
        const double p = 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(nphi);
        out.push_back({{s * std::cos(p), s * std::sin(p), z},
                       gl.weights[i] * 2.0 * std::numbers::pi / static_cast<double>(nphi)});
      }
    }
  } else {
    throw MeasureError("default sphere rule available for N <= 3 only");
  }
  return out;
}

std::vector<Vec> sample_directions(std::size_t dim, std::size_t per_circle) {
  std::vector<Vec> out;
  if (dim == 1) {
    out.push_back({1.0});
  } else if (dim == 2) {
    for (std::size_t j = 0; j < per_circle; ++j) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(per_circle);
      out.push_back({std::cos(t), std::sin(t)});
    }
  } else if (dim == 3) {
    const std::size_t n = std::max<std::size_t>(per_circle * per_circle / 2, 8);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z)), p = golden * static_cast<double>(i);
      out.push_back({r * std::cos(p), r * std::sin(p), z});
    }
  } else {
    throw MeasureError("direction sampling available for N <= 3 only");
  }
  return out;
}

double total_mass(const SpectralMeasure& mu) {
  if (mu.kind() == SpectralMeasure::Kind::Isotropic) return mu.isotropic_constant() * sphere_area(mu.dim());
  double s = 0.0;
  for (const auto& n : mu.nodes()) s += n.weight;
  return s;
}

double directional_moment(const SpectralMeasure& mu, double alpha, const Vec& xi) {
  if (xi.size() != mu.dim()) throw MeasureError("frequency dimension mismatch");
  if (mu.kind() == SpectralMeasure::Kind::Isotropic)
    return mu.isotropic_constant() * isotropic_moment_factor(mu.dim(), alpha) * std::pow(norm(xi), alpha);
  double s = 0.0;
  for (const auto& n : mu.nodes()) s += n.weight * std::pow(std::abs(dot(n.point, xi)), alpha);
  return s;
}

double nondegeneracy_constant(const SpectralMeasure& mu, double alpha, std::size_t per_circle) {
  if (per_circle < 8) throw MeasureError("need at least 8 sample directions per great circle");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& xi : sample_directions(mu.dim(), per_circle))
    best = std::min(best, directional_moment(mu, alpha, xi));
  return best;
}

void require_nondegenerate(const SpectralMeasure& mu, double alpha, double threshold,
                           std::size_t per_circle) {
  const double l1 = nondegeneracy_constant(mu, alpha, per_circle);
  if (!(l1 >= threshold)) {
    std::ostringstream os;
    os << "degenerate spectral measure: sampled nondegeneracy constant " << l1 << " below " << threshold;
    throw MeasureError(os.str());
  }
}

SpectralMeasure project(const SpectralMeasure& mu, double alpha) {
  const std::size_t n = mu.dim();
  if (n < 2) throw MeasureError("projection needs N >= 2");
  switch (mu.kind()) {
    case SpectralMeasure::Kind::Atoms: {
      std::vector<Atom> out;
      for (const auto& a : mu.atom_list()) {
        const double s2 = 1.0 - a.dir[n - 1] * a.dir[n - 1];
        if (s2 < kPoleCutoff) continue;
        Vec d(a.dir.begin(), a.dir.end() - 1);
        const double len = norm(d);
        const double w = a.weight * std::pow(len, alpha);
        for (double& x : d) x /= len;
        auto same = std::find_if(out.begin(), out.end(), [&](const Atom& b) {
          double e = 0.0;
          for (std::size_t i = 0; i < d.size(); ++i) e = std::max(e, std::abs(b.dir[i] - d[i]));
          return e < 1e-12;
        });
        if (same != out.end())
          same->weight += w;
        else
          out.push_back({d, w});
      }
      return SpectralMeasure::atoms(n - 1, std::move(out));
    }
    case SpectralMeasure::Kind::Isotropic: {
      const double b = std::beta(0.5 * (static_cast<double>(n) - 1.0 + alpha), 0.5);
      return SpectralMeasure::isotropic(n - 1, mu.isotropic_constant() * b);
    }
    case SpectralMeasure::Kind::Density: {
      auto h = mu.density_fn();
      const double power = static_cast<double>(n) - 2.0 + alpha;
      // s = sin(phi) turns the (1 - s^2)^{-1/2} endpoint factor into a smooth weight.
      auto pushed = [h, n, power](const Vec& sigma) {
        double total = 0.0;
        for (double sign : {1.0, -1.0}) {
          auto f = [&](double phi) {
            const double s = std::sin(phi);
            Vec theta(n);
            for (std::size_t i = 0; i + 1 < n; ++i) theta[i] = s * sigma[i];
            theta[n - 1] = sign * std::cos(phi);
            return std::pow(s, power) * h(theta);
          };
          total += integrate_endpoint_singular(f, 0.0, 0.5 * std::numbers::pi, 1e-13);
        }
        return total;
      };
      return SpectralMeasure::density(n - 1, pushed);
    }
  }
  throw MeasureError("unknown measure kind");
}

std::vector<Vec> rotation_to_last_axis(const Vec& a) {
  const std::size_t n = a.size();
  const double len = norm(a);
  if (std::abs(len - 1.0) > 1e-12) throw MeasureError("drift direction must be a unit vector");
  std::vector<Vec> r(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = 1.0;
  const double c = a[n - 1];
  if (n == 1) {
    r[0][0] = c > 0 ? 1.0 : -1.0;
    return r;
  }
  if (c < -1.0 + 1e-15) {
    // half turn in the (e_1, e_N) plane
    r[0][0] = -1.0;
    r[n - 1][n - 1] = -1.0;
    return r;
  }
  // R = I + K + K^2/(1+c), K = e_N a^T - a e_N^T
  std::vector<Vec> k(n, Vec(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    k[n - 1][j] += a[j];
    k[j][n - 1] -= a[j];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double kk = 0.0;
      for (std::size_t l = 0; l < n; ++l) kk += k[i][l] * k[l][j];
      r[i][j] += k[i][j] + kk / (1.0 + c);
    }
  return r;
}

SpectralMeasure rotate_to_canonical_drift(const SpectralMeasure& mu, const Vec& a) {
  if (a.size() != mu.dim()) throw MeasureError("drift dimension mismatch");
  const auto r = rotation_to_last_axis(a);
  switch (mu.kind()) {
    case SpectralMeasure::Kind::Isotropic:
      return mu;
    case SpectralMeasure::Kind::Atoms: {
      std::vector<Atom> out;
      for (const auto& at : mu.atom_list()) out.push_back({matvec(r, at.dir), at.weight});
      return SpectralMeasure::atoms(mu.dim(), std::move(out));
    }
    case SpectralMeasure::Kind::Density: {
      auto h = mu.density_fn();
      auto h_rot = [h, r](const Vec& theta) { return h(transpose_matvec(r, theta)); };
      std::vector<SphereNode> rule;
      for (const auto& node : mu.rule()) rule.push_back({matvec(r, node.point), node.weight});
      return SpectralMeasure::density(mu.dim(), h_rot, std::move(rule));
    }
  }
  throw MeasureError("unknown measure kind");
}

}  // namespace anisodiff
