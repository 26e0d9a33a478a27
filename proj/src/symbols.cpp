#include "anisodiff/symbols.hpp"

#include <cmath>
#include <future>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "anisodiff/quadrature.hpp"

namespace anisodiff {

SymbolSpec SymbolSpec::primed(SpectralMeasure mu, double a) {
  SymbolSpec s(std::move(mu), a);
  s.kind = SymbolKind::Primed;
  return s;
}

SymbolSpec SymbolSpec::tilde(SpectralMeasure mu, double a) {
  SymbolSpec s(std::move(mu), a);
  s.kind = SymbolKind::Tilde;
  return s;
}

SymbolSpec SymbolSpec::rescaled(SpectralMeasure mu, double a, double lambda, double beta) {
  SymbolSpec s(std::move(mu), a);
  s.kind = SymbolKind::Rescaled;
  s.lambda = lambda;
  s.beta = beta;
  return s;
}

SymbolSpec SymbolSpec::inner(double r) const {
  SymbolSpec s = *this;
  s.truncation = Truncation::Inner;
  s.rho = r;
  return s;
}

SymbolSpec SymbolSpec::outer(double r) const {
  SymbolSpec s = *this;
  s.truncation = Truncation::Outer;
  s.rho = r;
  return s;
}

std::size_t SymbolSpec::frequency_dim() const {
  return kind == SymbolKind::Tilde ? measure.dim() - 1 : measure.dim();
}

void SymbolSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("symbol: alpha must lie in (0,2)");
  if (truncation != Truncation::None && !(rho > 0.0))
    throw std::invalid_argument("symbol: truncation radius must be positive");
  if (kind == SymbolKind::Rescaled && !(lambda > 0.0 && beta > 0.0))
    throw std::invalid_argument("symbol: rescaling needs lambda > 0 and beta > 0");
  if ((kind == SymbolKind::Tilde || kind == SymbolKind::Primed) && measure.dim() < 2)
    throw std::invalid_argument("symbol: primed and projected symbols need N >= 2");
}

std::string SymbolSpec::describe() const {
  std::ostringstream os;
  static const char* kinds[] = {"full", "primed", "tilde", "rescaled"};
  static const char* truncs[] = {"none", "inner", "outer"};
  os << std::setprecision(17) << kinds[static_cast<int>(kind)] << "/" << truncs[static_cast<int>(truncation)]
     << " alpha=" << alpha << " measure=" << measure.describe();
  if (truncation != Truncation::None) os << " rho=" << rho;
  if (kind == SymbolKind::Rescaled) os << " lambda=" << lambda << " beta=" << beta;
  return os.str();
}

namespace {

struct Radial {
  Truncation trunc;
  double alpha, rho;
  const TruncationKernel* k;

  // s^alpha K(s); for Tilde the kernel argument differs from s (see caller).
  double weight(double s, double kernel_arg) const {
    if (s == 0.0) return 0.0;
    const double p = std::pow(s, alpha);
    switch (trunc) {
      case Truncation::None:
        return p * k->total();
      case Truncation::Inner:
        return p * k->leq(rho * kernel_arg);
      case Truncation::Outer:
        return p * k->gt(rho * kernel_arg);
    }
    return 0.0;
  }
};

// Isotropic measure c dtheta on S^{N-1} : int |theta.eta|^a K(|theta.eta|) dtheta.
double isotropic_full(double c, std::size_t dim, const Radial& r, const Vec& eta) {
  double n2 = 0.0;
  for (double x : eta) n2 += x * x;
  const double len = std::sqrt(n2);
  if (len == 0.0) return 0.0;
  if (dim == 1) return 2.0 * c * r.weight(len, len);
  if (r.trunc == Truncation::None) {
    const double n = static_cast<double>(dim);
    const double k = 2.0 * std::pow(std::numbers::pi, 0.5 * (n - 1.0)) * std::tgamma(0.5 * (r.alpha + 1.0)) /
                     std::tgamma(0.5 * (n + r.alpha));
    return c * k * std::pow(len, r.alpha) * r.k->total();
  }
  // zonal reduction: |S^{N-2}| int_{-1}^{1} F(|eta| |z|) (1 - z^2)^{(N-3)/2} dz, with z = sin(phi)
  const double expo = static_cast<double>(dim) - 2.0;
  auto f = [&](double phi) {
    const double s = len * std::sin(phi);
    const double w = expo == 0.0 ? 1.0 : std::pow(std::cos(phi), expo);
    return r.weight(s, s) * w;
  };
  return c * sphere_area(dim - 1) * 2.0 * integrate_endpoint_singular(f, 0.0, 0.5 * std::numbers::pi, 1e-15);
}

double dot(const Vec& a, const Vec& b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double evaluate_symbol(const SymbolSpec& spec, const Vec& xi) {
  spec.validate();
  const std::size_t n = spec.measure.dim();
  if (xi.size() != spec.frequency_dim()) throw std::invalid_argument("symbol: frequency dimension mismatch");
  const auto kernel = TruncationKernel::get(spec.alpha);
  const Radial r{spec.truncation, spec.alpha, spec.rho, kernel.get()};
  const double sigma_scale =
      spec.kind == SymbolKind::Rescaled ? std::pow(spec.lambda, 1.0 / spec.alpha - spec.beta) : 1.0;

  if (spec.measure.kind() == SpectralMeasure::Kind::Isotropic) {
    const double c = spec.measure.isotropic_constant();
    switch (spec.kind) {
      case SymbolKind::Full:
        return isotropic_full(c, n, r, xi);
      case SymbolKind::Primed: {
        Vec eta = xi;
        eta[n - 1] = 0.0;
        return isotropic_full(c, n, r, eta);
      }
      case SymbolKind::Rescaled: {
        Vec eta = xi;
        eta[n - 1] *= sigma_scale;
        return isotropic_full(c, n, r, eta);
      }
      case SymbolKind::Tilde: {
        const auto proj = project(spec.measure, spec.alpha);
        return isotropic_full(proj.isotropic_constant(), n - 1, r, xi);
      }
    }
  }

  double total = 0.0;
  for (const auto& node : spec.measure.nodes()) {
    const auto& t = node.point;
    double s = 0.0, arg = 0.0;
    switch (spec.kind) {
      case SymbolKind::Full:
        s = arg = std::abs(dot(t, xi, n));
        break;
      case SymbolKind::Primed:
        s = arg = std::abs(dot(t, xi, n - 1));
        break;
      case SymbolKind::Rescaled:
        s = arg = std::abs(dot(t, xi, n - 1) + sigma_scale * t[n - 1] * xi[n - 1]);
        break;
      case SymbolKind::Tilde: {
        const double s2 = 1.0 - t[n - 1] * t[n - 1];
        if (s2 < kPoleCutoff) continue;
        s = std::abs(dot(t, xi, n - 1));
        arg = s / std::sqrt(s2);
        break;
      }
    }
    total += node.weight * r.weight(s, arg);
  }
  return total;
}

Vec SymbolGrid::half_layout() const {
  const std::size_t nlast = grid.count(grid.dim() - 1);
  const std::size_t half = nlast / 2 + 1;
  const std::size_t rows = grid.size() / nlast;
  Vec out(rows * half);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < half; ++k) out[r * half + k] = values[r * nlast + k];
  return out;
}

SymbolGrid build_symbol_grid(const SymbolSpec& spec, const PeriodicGrid& grid) {
  spec.validate();
  if (grid.dim() != spec.frequency_dim()) throw std::invalid_argument("symbol grid: dimension mismatch");
  SymbolGrid sg{grid, Vec(grid.size(), 0.0), spec.alpha, spec.describe()};
  // the zonal/quadrature path is costly enough to split across threads
  const std::size_t total = grid.size();
  const unsigned hw = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  const std::size_t chunks = total >= 2048 ? hw : 1;
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx;
    Vec xi(grid.dim());
    for (std::size_t f = begin; f < end; ++f) {
      grid.unflatten(f, idx);
      bool zero = true;
      for (std::size_t j = 0; j < grid.dim(); ++j) {
        xi[j] = grid.angular_frequency(j, idx[j]);
        zero = zero && idx[j] == 0;
      }
      sg.values[f] = zero ? 0.0 : evaluate_symbol(spec, xi);
    }
  };
  if (chunks == 1) {
    work(0, total);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t c = 0; c < chunks; ++c)
      jobs.push_back(std::async(std::launch::async, work, total * c / chunks, total * (c + 1) / chunks));
    for (auto& j : jobs) j.get();
  }
  return sg;
}

void write_symbol_csv(const SymbolGrid& sg, std::ostream& os) {
  const auto& g = sg.grid;
  os << std::setprecision(17);
  for (std::size_t j = 0; j < g.dim(); ++j) os << "k" << j << ",";
  for (std::size_t j = 0; j < g.dim(); ++j) os << "xi" << j << ",";
  os << "value\n";
  std::vector<std::size_t> idx;
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unflatten(f, idx);
    for (std::size_t j = 0; j < g.dim(); ++j) os << g.wavenumber(j, idx[j]) << ",";
    for (std::size_t j = 0; j < g.dim(); ++j) os << g.angular_frequency(j, idx[j]) << ",";
    os << sg.values[f] << "\n";
  }
}

}  // namespace anisodiff
