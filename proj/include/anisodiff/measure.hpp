#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace anisodiff {

using Vec = std::vector<double>;

class MeasureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Atom {
  Vec dir;
  double weight;
};

// A point of a sphere quadrature with its (positive) weight.
struct SphereNode {
  Vec point;
  double weight;
};

// Nonnegative finite measure on the unit sphere of R^N.
class SpectralMeasure {
 public:
  enum class Kind { Atoms, Density, Isotropic };
  using DensityFn = std::function<double(const Vec&)>;

  // Directions are normalized; zero vectors and nonpositive weights throw.
  static SpectralMeasure atoms(std::size_t dim, std::vector<Atom> atoms);
  // rule empty -> default_sphere_rule(dim).
  static SpectralMeasure density(std::size_t dim, DensityFn h, std::vector<SphereNode> rule = {});
  static SpectralMeasure isotropic(std::size_t dim, double c);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const std::vector<Atom>& atom_list() const { return atoms_; }
  const DensityFn& density_fn() const { return h_; }
  const std::vector<SphereNode>& rule() const { return rule_; }
  double isotropic_constant() const { return c_; }

  // Weighted nodes representing the measure. Exact for atoms; for densities the
  // stored rule times h; for the isotropic case c times the default rule.
  const std::vector<SphereNode>& nodes() const { return weighted_; }

  std::string describe() const;

 private:
  SpectralMeasure() = default;
  Kind kind_ = Kind::Atoms;
  std::size_t dim_ = 1;
  std::vector<Atom> atoms_;
  DensityFn h_;
  std::vector<SphereNode> rule_;
  std::vector<SphereNode> weighted_;
  double c_ = 0.0;
};

// Surface area of S^{N-1}; |S^0| = 2 (counting measure).
double sphere_area(std::size_t dim);

// Default quadrature on S^{N-1}: the two points of S^0, equispaced angles on S^1,
// Gauss-Legendre in z times equispaced longitude on S^2.
std::vector<SphereNode> default_sphere_rule(std::size_t dim, std::size_t resolution = 0);

// Quasi-uniform direction sample: uniform angles (N=2), Fibonacci lattice (N=3).
std::vector<Vec> sample_directions(std::size_t dim, std::size_t per_circle);

double total_mass(const SpectralMeasure& mu);

// int |xi . theta|^alpha dmu(theta), closed form for the isotropic case.
double directional_moment(const SpectralMeasure& mu, double alpha, const Vec& xi);

double nondegeneracy_constant(const SpectralMeasure& mu, double alpha, std::size_t per_circle = 64);

// Throws MeasureError when the sampled constant falls below threshold.
void require_nondegenerate(const SpectralMeasure& mu, double alpha, double threshold = 1e-10,
                           std::size_t per_circle = 64);

// Measure on S^{N-2} obtained by weighting with (1 - theta_N^2)^{alpha/2} and
// pushing forward under theta -> theta' / |theta'|.
SpectralMeasure project(const SpectralMeasure& mu, double alpha);

// Push-forward under a rotation taking a to e_N.
SpectralMeasure rotate_to_canonical_drift(const SpectralMeasure& mu, const Vec& a);

// Rotation matrix (row-major, NxN) taking unit a to e_N.
std::vector<Vec> rotation_to_last_axis(const Vec& a);

// Atoms closer to the poles than this (in 1 - theta_N^2) are treated as polar.
inline constexpr double kPoleCutoff = 1e-14;

}  // namespace anisodiff
