#include "anisodiff/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace anisodiff {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<int> int_dims(const PeriodicGrid& g) {
  std::vector<int> d;
  for (std::size_t c : g.counts()) d.push_back(static_cast<int>(c));
  return d;
}

}  // namespace

PeriodicGrid::PeriodicGrid(std::vector<double> extents, std::vector<std::size_t> counts)
    : extents_(std::move(extents)), counts_(std::move(counts)) {
  if (counts_.empty() || counts_.size() != extents_.size())
    throw std::invalid_argument("grid: extents and counts must be nonempty and of equal length");
  for (std::size_t j = 0; j < counts_.size(); ++j) {
    if (counts_[j] < 8 || counts_[j] % 2 != 0)
      throw std::invalid_argument("grid: point counts must be even and at least 8");
    if (!(extents_[j] > 0.0) || !std::isfinite(extents_[j]))
      throw std::invalid_argument("grid: extents must be positive");
  }
  strides_.assign(counts_.size(), 1);
  for (std::size_t j = counts_.size() - 1; j > 0; --j) strides_[j - 1] = strides_[j] * counts_[j];
  total_ = strides_[0] * counts_[0];
}

double PeriodicGrid::cell_volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < dim(); ++j) v *= dx(j);
  return v;
}

long PeriodicGrid::wavenumber(std::size_t axis, std::size_t i) const {
  const long n = static_cast<long>(counts_[axis]);
  const long k = static_cast<long>(i);
  return k <= n / 2 ? k : k - n;
}

double PeriodicGrid::angular_frequency(std::size_t axis, std::size_t i) const {
  return 2.0 * std::numbers::pi * static_cast<double>(wavenumber(axis, i)) / extents_[axis];
}

void PeriodicGrid::unflatten(std::size_t flat, std::vector<std::size_t>& idx) const {
  idx.resize(dim());
  for (std::size_t j = 0; j < dim(); ++j) {
    idx[j] = flat / strides_[j];
    flat %= strides_[j];
  }
}

Vec PeriodicGrid::point(std::size_t flat) const {
  std::vector<std::size_t> idx;
  unflatten(flat, idx);
  Vec x(dim());
  for (std::size_t j = 0; j < dim(); ++j) x[j] = coord(j, idx[j]);
  return x;
}

PeriodicGrid PeriodicGrid::drop_last() const {
  if (dim() < 2) throw std::invalid_argument("grid: cannot drop the only axis");
  return PeriodicGrid(std::vector<double>(extents_.begin(), extents_.end() - 1),
                      std::vector<std::size_t>(counts_.begin(), counts_.end() - 1));
}

Field::Field(PeriodicGrid g, Vec d) : grid(std::move(g)), data(std::move(d)) {
  if (data.size() != grid.size()) throw std::invalid_argument("field: data size does not match grid");
}

Field Field::sample(const PeriodicGrid& g, const std::function<double(const Vec&)>& f) {
  Field out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out.data[i] = f(g.point(i));
  return out;
}

double Field::integral() const {
  double s = 0.0;
  for (double v : data) s += v;
  return s * grid.cell_volume();
}

double Field::lp_norm(double p) const {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (double v : data) s += std::pow(std::abs(v), p);
  return std::pow(s * grid.cell_volume(), 1.0 / p);
}

double Field::max() const { return *std::max_element(data.begin(), data.end()); }
double Field::min() const { return *std::min_element(data.begin(), data.end()); }

RealFft::RealFft(const PeriodicGrid& g) : grid_(g) {
  const std::size_t nlast = g.count(g.dim() - 1);
  spectral_size_ = g.size() / nlast * (nlast / 2 + 1);
  rbuf_ = fftw_alloc_real(g.size());
  cbuf_ = fftw_alloc_complex(spectral_size_);
  const auto dims = int_dims(g);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_f_ = fftw_plan_dft_r2c(static_cast<int>(dims.size()), dims.data(), rbuf_,
                              static_cast<fftw_complex*>(cbuf_), FFTW_ESTIMATE);
  plan_b_ = fftw_plan_dft_c2r(static_cast<int>(dims.size()), dims.data(),
                              static_cast<fftw_complex*>(cbuf_), rbuf_, FFTW_ESTIMATE);
  if (!plan_f_ || !plan_b_) throw std::runtime_error("fft: planning failed");
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_f_) fftw_destroy_plan(static_cast<fftw_plan>(plan_f_));
  if (plan_b_) fftw_destroy_plan(static_cast<fftw_plan>(plan_b_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

void RealFft::forward(const Vec& in, std::vector<std::complex<double>>& out) {
  std::copy(in.begin(), in.end(), rbuf_);
  fftw_execute(static_cast<fftw_plan>(plan_f_));
  out.resize(spectral_size_);
  std::memcpy(out.data(), cbuf_, spectral_size_ * sizeof(fftw_complex));
}

void RealFft::backward(const std::vector<std::complex<double>>& in, Vec& out) {
  // c2r destroys its input, so it always works on the internal copy
  std::memcpy(cbuf_, in.data(), spectral_size_ * sizeof(fftw_complex));
  fftw_execute(static_cast<fftw_plan>(plan_b_));
  out.assign(rbuf_, rbuf_ + grid_.size());
}

std::size_t RealFft::full_index(std::size_t h) const {
  const std::size_t nlast = grid_.count(grid_.dim() - 1);
  const std::size_t half = nlast / 2 + 1;
  return (h / half) * nlast + (h % half);
}

std::vector<std::complex<double>> full_dft(const Field& f) {
  const auto& g = f.grid;
  const auto dims = int_dims(g);
  fftw_complex* buf = fftw_alloc_complex(g.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    buf[i][0] = f.data[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(plan);
  std::vector<std::complex<double>> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = {buf[i][0], buf[i][1]};
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return out;
}

namespace {

// Basis row for evaluating the interpolant along one axis at coordinate x:
// e^{i k (x - x0) 2 pi / L}, with the Nyquist mode taken as a cosine.
void axis_basis(const PeriodicGrid& g, std::size_t axis, double x, std::vector<std::complex<double>>& row) {
  const std::size_t n = g.count(axis);
  row.resize(n);
  const double x0 = g.coord(axis, 0);
  const double w = 2.0 * std::numbers::pi * (x - x0) / g.extent(axis);
  for (std::size_t i = 0; i < n; ++i) {
    const long k = g.wavenumber(axis, i);
    if (static_cast<std::size_t>(std::abs(k)) * 2 == n)
      row[i] = std::cos(static_cast<double>(k) * w);
    else
      row[i] = std::polar(1.0, static_cast<double>(k) * w);
  }
}

}  // namespace

Field resample_trig(const Field& f, const PeriodicGrid& target, const std::vector<Vec>& coords) {
  const auto& g = f.grid;
  const std::size_t nd = g.dim();
  if (coords.size() != nd || target.dim() != nd) throw std::invalid_argument("resample: dimension mismatch");
  for (std::size_t j = 0; j < nd; ++j)
    if (coords[j].size() != target.count(j)) throw std::invalid_argument("resample: coordinate count mismatch");

  // cur holds coefficients with axes [0, j) already evaluated at target coords
  std::vector<std::complex<double>> cur = full_dft(f);
  std::vector<std::size_t> shape(g.counts().begin(), g.counts().end());
  std::vector<std::complex<double>> row;
  for (std::size_t j = 0; j < nd; ++j) {
    std::size_t outer = 1, inner = 1;
    for (std::size_t a = 0; a < j; ++a) outer *= shape[a];
    for (std::size_t a = j + 1; a < nd; ++a) inner *= shape[a];
    const std::size_t nsrc = shape[j], ntgt = coords[j].size();
    std::vector<std::complex<double>> next(outer * ntgt * inner);
    for (std::size_t t = 0; t < ntgt; ++t) {
      axis_basis(g, j, coords[j][t], row);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t s = 0; s < nsrc; ++s) {
          const auto b = row[s];
          const auto* src = &cur[(o * nsrc + s) * inner];
          auto* dst = &next[(o * ntgt + t) * inner];
          for (std::size_t i = 0; i < inner; ++i) dst[i] += b * src[i];
        }
    }
    cur.swap(next);
    shape[j] = ntgt;
  }
  Field out(target);
  const double inv = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = cur[i].real() * inv;
  return out;
}

TrigInterpolant::TrigInterpolant(const Field& f) : grid_(f.grid), coef_(full_dft(f)) {
  const double inv = 1.0 / static_cast<double>(grid_.size());
  for (auto& c : coef_) c *= inv;
}

double TrigInterpolant::operator()(const Vec& x) const {
  const std::size_t nd = grid_.dim();
  std::vector<std::complex<double>> cur = coef_, next, row;
  // contract the last axis first so the remaining block stays contiguous
  std::size_t len = grid_.size();
  for (std::size_t jj = nd; jj-- > 0;) {
    const std::size_t n = grid_.count(jj);
    axis_basis(grid_, jj, x[jj], row);
    const std::size_t outer = len / n;
    next.assign(outer, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      std::complex<double> s = 0.0;
      const auto* src = &cur[o * n];
      for (std::size_t i = 0; i < n; ++i) s += row[i] * src[i];
      next[o] = s;
    }
    cur.swap(next);
    len = outer;
  }
  return cur[0].real();
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("field file truncated");
  return v;
}

constexpr char kMagic[8] = {'A', 'N', 'I', 'S', 'O', 'F', 'L', 'D'};

}  // namespace

void write_field_binary(const Field& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kMagic, 8);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.dim()));
  for (double e : f.grid.extents()) put<double>(os, e);
  for (std::size_t c : f.grid.counts()) put<std::uint64_t>(os, c);
  for (double v : f.data) put<double>(os, v);
  if (!os) throw std::runtime_error("write failed: " + path);
}

Field read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("not a field file: " + path);
  if (get<std::uint32_t>(is) != 1) throw std::runtime_error("unsupported field file version");
  const auto nd = get<std::uint32_t>(is);
  std::vector<double> ext(nd);
  std::vector<std::size_t> cnt(nd);
  for (auto& e : ext) e = get<double>(is);
  for (auto& c : cnt) c = static_cast<std::size_t>(get<std::uint64_t>(is));
  Field f{PeriodicGrid(ext, cnt)};
  for (auto& v : f.data) v = get<double>(is);
  return f;
}

void write_field_csv(const Field& f, std::ostream& os) {
  const auto& g = f.grid;
  os << std::setprecision(17);
  for (std::size_t j = 0; j < g.dim(); ++j) os << "x" << j << ",";
  os << "u\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    for (double c : x) os << c << ",";
    os << f.data[i] << "\n";
  }
}

}  // namespace anisodiff
