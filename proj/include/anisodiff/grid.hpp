#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace anisodiff {

using Vec = std::vector<double>;

// Uniform torus [-L_j/2, L_j/2)^N; node i sits at (i - n/2) dx. The last axis is
// the drift axis and is stored contiguously.
class PeriodicGrid {
 public:
  PeriodicGrid() = default;
  PeriodicGrid(std::vector<double> extents, std::vector<std::size_t> counts);

  std::size_t dim() const { return counts_.size(); }
  std::size_t size() const { return total_; }
  std::size_t count(std::size_t axis) const { return counts_[axis]; }
  double extent(std::size_t axis) const { return extents_[axis]; }
  double dx(std::size_t axis) const { return extents_[axis] / static_cast<double>(counts_[axis]); }
  double cell_volume() const;
  double coord(std::size_t axis, std::size_t i) const {
    return (static_cast<double>(i) - 0.5 * static_cast<double>(counts_[axis])) * dx(axis);
  }
  // Signed integer wavenumber of DFT index i along axis, Nyquist counted positive.
  long wavenumber(std::size_t axis, std::size_t i) const;
  double angular_frequency(std::size_t axis, std::size_t i) const;

  const std::vector<double>& extents() const { return extents_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }

  // Multi-index of a flat index (row-major).
  void unflatten(std::size_t flat, std::vector<std::size_t>& idx) const;
  Vec point(std::size_t flat) const;

  // Grid of the first N-1 axes.
  PeriodicGrid drop_last() const;

  bool operator==(const PeriodicGrid& o) const {
    return counts_ == o.counts_ && extents_ == o.extents_;
  }
  bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }

 private:
  std::vector<double> extents_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 0;
};

struct Field {
  PeriodicGrid grid;
  Vec data;

  Field() = default;
  explicit Field(PeriodicGrid g) : grid(std::move(g)), data(grid.size(), 0.0) {}
  Field(PeriodicGrid g, Vec d);

  static Field sample(const PeriodicGrid& g, const std::function<double(const Vec&)>& f);

  double integral() const;   // sum * cell volume
  double lp_norm(double p) const;  // p = infinity for the max norm
  double max() const;
  double min() const;
};

// Forward/backward real transforms on one grid (FFTW, estimate planning).
// Not copyable; each instance owns its buffers. Planning is serialized.
class RealFft {
 public:
  explicit RealFft(const PeriodicGrid& g);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // Number of complex coefficients in the half layout (last axis n/2+1).
  std::size_t spectral_size() const { return spectral_size_; }
  const PeriodicGrid& grid() const { return grid_; }

  void forward(const Vec& in, std::vector<std::complex<double>>& out);
  // Unnormalized inverse; divide by grid().size() for the true inverse.
  void backward(const std::vector<std::complex<double>>& in, Vec& out);

  // Flat full-lattice index corresponding to half-layout index h.
  std::size_t full_index(std::size_t h) const;

 private:
  PeriodicGrid grid_;
  std::size_t spectral_size_;
  void* plan_f_ = nullptr;
  void* plan_b_ = nullptr;
  double* rbuf_ = nullptr;
  void* cbuf_ = nullptr;
};

std::vector<std::complex<double>> full_dft(const Field& f);

// Band-limited (trigonometric) interpolation of a field at tensor-product
// target coordinates, one coordinate list per axis. Periodic wrap is implicit.
Field resample_trig(const Field& f, const PeriodicGrid& target, const std::vector<Vec>& coords);

// Point evaluation of the trigonometric interpolant.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const Field& f);
  double operator()(const Vec& x) const;
  const PeriodicGrid& grid() const { return grid_; }

 private:
  PeriodicGrid grid_;
  std::vector<std::complex<double>> coef_;
};

// Binary layout: "ANISOFLD", u32 version, u32 N, N f64 extents, N u64 counts,
// then the values as little-endian f64, row-major.
void write_field_binary(const Field& f, const std::string& path);
Field read_field_binary(const std::string& path);
void write_field_csv(const Field& f, std::ostream& os);

}  // namespace anisodiff
