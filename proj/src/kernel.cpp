#include "anisodiff/kernel.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "anisodiff/quadrature.hpp"

namespace anisodiff {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0,2)");
}

void check_s(double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("truncation argument must be nonnegative");
}

}  // namespace

TruncationKernel::TruncationKernel(double alpha) : alpha_(alpha) {
  check_alpha(alpha);
  const auto ref = gauss_legendre(16, -1.0, 1.0);
  for (int i = 0; i < 16; ++i) {
    gx_[i] = ref.nodes[i];
    gw_[i] = ref.weights[i];
  }
  prefix_[0] = series(kSeriesEnd);
  for (int j = 0; j < kPanels; ++j)
    prefix_[j + 1] = prefix_[j] + panel(kSeriesEnd + j, kSeriesEnd + j + 1);
  total_ = prefix_[kPanels] + tail_asymptotic(kAsymptoticStart);
}

// sum_k (-1)^{k+1} s^{2k-alpha} / ((2k)! (2k - alpha)); no cancellation for s <= 2.
double TruncationKernel::series(double s) const {
  if (s == 0.0) return 0.0;
  // s^{2-alpha} sum_k (-1)^{k+1} s^{2k-2} / ((2k)! (2k - alpha)), factored to avoid 0 * inf
  const double s2 = s * s;
  double term = 0.5;  // s^{2k-2}/(2k)!
  double sum = 0.0;
  for (int k = 1; k < 60; ++k) {
    if (k > 1) term *= s2 / ((2.0 * k - 1.0) * (2.0 * k));
    const double c = term / (2.0 * k - alpha_);
    sum += (k % 2 == 1) ? c : -c;
    if (c < 1e-18 * std::abs(sum)) break;
  }
  return sum * std::pow(s, 2.0 - alpha_);
}

double TruncationKernel::panel(double a, double b) const {
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  double s = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double t = c + h * gx_[i];
    s += gw_[i] * (1.0 - std::cos(t)) * std::pow(t, -1.0 - alpha_);
  }
  return h * s;
}

// int_s^inf (1 - cos t) t^{-1-alpha} dt = s^{-alpha}/alpha - Re J(s) with
// J(s) = int_s^inf e^{it} t^{-a} dt ~ i e^{is} sum_k (-i)^k (a)_k s^{-a-k}, a = 1 + alpha.
double TruncationKernel::tail_asymptotic(double s) const {
  const double a = 1.0 + alpha_;
  std::complex<double> sum = 0.0;
  std::complex<double> factor = 1.0;  // (-i)^k (a)_k s^{-k}
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    const double mag = std::abs(factor);
    if (mag > prev) break;  // asymptotic series: stop at the smallest term
    sum += factor;
    if (mag < 1e-18) break;
    prev = mag;
    factor *= std::complex<double>(0.0, -1.0) * (a + k) / s;
  }
  const std::complex<double> j = std::complex<double>(0.0, 1.0) * std::exp(std::complex<double>(0.0, s)) *
                                 std::pow(s, -a) * sum;
  return std::pow(s, -alpha_) / alpha_ - j.real();
}

double TruncationKernel::leq(double s) const {
  check_s(s);
  if (std::isinf(s)) return total_;
  if (s <= kSeriesEnd) return series(s);
  if (s >= kAsymptoticStart) return total_ - tail_asymptotic(s);
  const double off = s - kSeriesEnd;
  const int j = static_cast<int>(off);
  return prefix_[j] + panel(kSeriesEnd + j, s);
}

double TruncationKernel::gt(double s) const {
  check_s(s);
  if (std::isinf(s)) return 0.0;
  if (s >= kAsymptoticStart) return tail_asymptotic(s);
  return total_ - leq(s);
}

std::shared_ptr<const TruncationKernel> TruncationKernel::get(double alpha) {
  check_alpha(alpha);
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const TruncationKernel>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(alpha);
  if (it != cache.end()) return it->second;
  auto k = std::make_shared<const TruncationKernel>(alpha);
  cache.emplace(alpha, k);
  return k;
}

double c_alpha_total(double alpha) { return TruncationKernel::get(alpha)->total(); }
double c_leq(double s, double alpha) {
  if (std::isinf(s)) return c_alpha_total(alpha);
  return TruncationKernel::get(alpha)->leq(s);
}
double c_gt(double s, double alpha) { return TruncationKernel::get(alpha)->gt(s); }

}  // namespace anisodiff
