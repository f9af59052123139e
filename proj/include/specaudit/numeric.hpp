#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace specaudit {

/// Neumaier's variant of Kahan summation. The running compensation is kept
/// separately so callers can persist both parts (see PrefixPowerSums).
class NeumaierSum {
 public:
  constexpr NeumaierSum() = default;
  constexpr NeumaierSum(double sum, double compensation) : sum_(sum), comp_(compensation) {}

  constexpr void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  constexpr NeumaierSum& operator+=(double x) {
    add(x);
    return *this;
  }

  constexpr double value() const { return sum_ + comp_; }
  constexpr double sum() const { return sum_; }
  constexpr double compensation() const { return comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Exact binomial coefficient C(n, k) for small arguments.
constexpr std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Truncated Taylor series (jet) of order N around a point. Coefficient c[n]
/// is f^{(n)}(x0) / n!. Supports the operations needed to differentiate
/// exp(-1/u)-type bumps to high order without symbolic algebra.
template <int N>
struct Jet {
  std::array<double, N + 1> c{};

  static constexpr Jet constant(double v) {
    Jet j;
    j.c[0] = v;
    return j;
  }
  /// Jet of u(x) = value + slope * (x - x0).
  static constexpr Jet affine(double value, double slope) {
    Jet j;
    j.c[0] = value;
    if constexpr (N >= 1) j.c[1] = slope;
    return j;
  }

  constexpr double value() const { return c[0]; }
  /// n-th derivative at the expansion point.
  constexpr double derivative(int n) const {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return c[n] * f;
  }
  constexpr bool is_zero() const {
    for (double v : c)
      if (v != 0.0) return false;
    return true;
  }

  friend constexpr Jet operator+(Jet a, const Jet& b) {
    for (int i = 0; i <= N; ++i) a.c[i] += b.c[i];
    return a;
  }
  friend constexpr Jet operator-(Jet a, const Jet& b) {
    for (int i = 0; i <= N; ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend constexpr Jet operator-(Jet a) {
    for (double& v : a.c) v = -v;
    return a;
  }
  friend constexpr Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= N; ++i)
      for (int j = 0; i + j <= N; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
  }
  friend constexpr Jet operator*(double s, Jet a) {
    for (double& v : a.c) v *= s;
    return a;
  }
  friend constexpr Jet operator/(const Jet& a, const Jet& b) {
    Jet q;
    for (int n = 0; n <= N; ++n) {
      double s = a.c[n];
      for (int k = 1; k <= n; ++k) s -= b.c[k] * q.c[n - k];
      q.c[n] = s / b.c[0];
    }
    return q;
  }
};

template <int N>
constexpr Jet<N> exp(const Jet<N>& a) {
  Jet<N> e;
  e.c[0] = std::exp(a.c[0]);
  for (int n = 1; n <= N; ++n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += k * a.c[k] * e.c[n - k];
    e.c[n] = s / n;
  }
  return e;
}

/// Cubic Hermite interpolation on [0, h] at offset s, given end values and slopes.
constexpr double hermite(double s, double h, double f0, double d0, double f1, double d1) {
  const double x = s / h;
  const double x2 = x * x;
  const double x3 = x2 * x;
  return (2 * x3 - 3 * x2 + 1) * f0 + (x3 - 2 * x2 + x) * h * d0 + (-2 * x3 + 3 * x2) * f1 +
         (x3 - x2) * h * d1;
}

/// Derivative of the Hermite cubic above.
constexpr double hermite_slope(double s, double h, double f0, double d0, double f1, double d1) {
  const double x = s / h;
  const double x2 = x * x;
  return ((6 * x2 - 6 * x) * f0 + (6 * x2 - 6 * x) * -f1) / h + (3 * x2 - 4 * x + 1) * d0 +
         (3 * x2 - 2 * x) * d1;
}

/// Exact integral over one cell of the Hermite cubic through (f0, d0), (f1, d1).
constexpr double hermite_cell_integral(double h, double f0, double d0, double f1, double d1) {
  return h * (f0 + f1) / 2 + h * h * (d0 - d1) / 12;
}

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2 * std::numbers::pi;

}  // namespace specaudit
