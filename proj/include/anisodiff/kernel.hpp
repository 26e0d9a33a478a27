#pragma once

#include <array>
#include <memory>

namespace anisodiff {

// The radial integrals c_leq(s) = int_0^s (1 - cos t) t^{-1-alpha} dt,
// c_gt(s) = int_s^inf (same), and their sum C_alpha, for one fixed alpha.
class TruncationKernel {
 public:
  explicit TruncationKernel(double alpha);

  double alpha() const { return alpha_; }
  double total() const { return total_; }
  double leq(double s) const;
  double gt(double s) const;

  // Shared instance for alpha; cheap after the first call.
  static std::shared_ptr<const TruncationKernel> get(double alpha);

 private:
  static constexpr double kSeriesEnd = 2.0;
  static constexpr double kAsymptoticStart = 40.0;
  static constexpr int kPanels = 38;  // unit panels covering [2, 40]

  double series(double s) const;
  double panel(double a, double b) const;
  double tail_asymptotic(double s) const;

  double alpha_;
  double total_;
  std::array<double, kPanels + 1> prefix_{};  // c_leq(2 + j)
  std::array<double, 16> gx_{}, gw_{};         // Gauss-Legendre on [-1, 1]
};

double c_alpha_total(double alpha);
double c_leq(double s, double alpha);
double c_gt(double s, double alpha);

}  // namespace anisodiff
