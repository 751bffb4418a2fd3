#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stark {

/// Natural cubic spline through (knots[i], values[i]); knots strictly increasing.
/// V may be double or std::complex<double>. Outside the knot range the end
/// cubic pieces are extrapolated; callers clamp if they need otherwise.
template <class V>
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> knots, std::vector<V> values)
      : x_(std::move(knots)), y_(std::move(values)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("CubicSpline: need >= 2 matching knots");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("CubicSpline: knots must increase");
    m_.assign(n, V{});
    if (n == 2) return;
    // Tridiagonal solve for second derivatives with natural end conditions.
    std::vector<double> diag(n, 0.0), upper(n, 0.0);
    std::vector<V> rhs(n, V{});
    diag[0] = 1.0;
    diag[n - 1] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      const double lower = h0 / 6.0;
      diag[i] = (h0 + h1) / 3.0;
      upper[i] = h1 / 6.0;
      rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
      // eliminate the sub-diagonal entry against row i-1
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= rhs[i - 1] * w;
    }
    m_[n - 1] = V{};
    for (std::size_t i = n - 1; i-- > 1;) m_[i] = (rhs[i] - m_[i + 1] * upper[i]) / diag[i];
    m_[0] = V{};
  }

  V operator()(double t) const {
    const std::size_t n = x_.size();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
    i = std::clamp<std::size_t>(i, 1, n - 1);
    const double h = x_[i] - x_[i - 1];
    const double a = (x_[i] - t) / h;
    const double b = (t - x_[i - 1]) / h;
    return y_[i - 1] * a + y_[i] * b +
           (m_[i - 1] * (a * a * a - a) + m_[i] * (b * b * b - b)) * (h * h / 6.0);
  }

  V derivative(double t) const {
    const std::size_t n = x_.size();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
    i = std::clamp<std::size_t>(i, 1, n - 1);
    const double h = x_[i] - x_[i - 1];
    const double a = (x_[i] - t) / h;
    const double b = (t - x_[i - 1]) / h;
    return (y_[i] - y_[i - 1]) / h + (m_[i] * (3 * b * b - 1) - m_[i - 1] * (3 * a * a - 1)) * (h / 6.0);
  }

  V second_derivative(double t) const {
    const std::size_t n = x_.size();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
    i = std::clamp<std::size_t>(i, 1, n - 1);
    const double h = x_[i] - x_[i - 1];
    const double b = (t - x_[i - 1]) / h;
    return m_[i - 1] * (1 - b) + m_[i] * b;
  }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  bool empty() const { return x_.empty(); }

 private:
  std::vector<double> x_;
  std::vector<V> y_;
  std::vector<V> m_;
};

}  // namespace stark
