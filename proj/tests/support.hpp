#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "specaudit/models.hpp"
#include "specaudit/numeric.hpp"
#include "specaudit/spectrum.hpp"

namespace testing {

inline constexpr std::uint64_t kSeed = 20240611;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(kSeed);
  return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

/// Square torus of side 2 pi: frequencies are |m|, m in Z^2.
inline specaudit::Spectrum square_torus(double lambda_max) {
  return specaudit::torus_spectrum(specaudit::FlatTorus::cubic(2, specaudit::two_pi), lambda_max);
}

/// Brute-force oracle: squared norm -> number of m in Z^2 with |m|^2 = n, n < r2max.
inline std::map<std::int64_t, std::int64_t> lattice_norms(std::int64_t r2max) {
  std::map<std::int64_t, std::int64_t> out;
  const auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(r2max))) + 1;
  for (std::int64_t a = -r; a <= r; ++a)
    for (std::int64_t b = -r; b <= r; ++b)
      if (a * a + b * b < r2max) ++out[a * a + b * b];
  return out;
}

/// Plateau Fourier profile written out independently of the library.
inline long double plateau_hat_oracle(long double xi) {
  const long double a = std::fabs(xi);
  if (a <= 0.5L) return 1.0L;
  if (a >= 1.0L) return 0.0L;
  const long double u = 2.0L * (a - 0.5L);
  const long double b0 = std::exp(-1.0L / u);
  const long double b1 = std::exp(-1.0L / (1.0L - u));
  return b1 / (b0 + b1);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("specaudit_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testing

namespace testing {

/// Phi(s) = 1/2 + (1/pi) int_0^1 rho-hat(xi) sin(s xi) / xi dxi by the trapezoidal
/// rule in long double. The integrand is smooth and compactly supported, so the
/// rule is exact up to aliasing at distance 2 pi / delta = `period` >> |s|.
class PhiOracle {
 public:
  explicit PhiOracle(long double period = 6000.0L) {
    const auto m = static_cast<std::size_t>(std::ceil(period / (2.0L * 3.14159265358979323846264338327950288L)));
    delta_ = 1.0L / static_cast<long double>(m);
    for (std::size_t j = 0; j < m; ++j) {
      xi_.push_back(static_cast<long double>(j) * delta_);
      hat_.push_back(plateau_hat_oracle(xi_.back()));
    }
  }

  long double operator()(long double s) const {
    if (s > 700.0L) return 1.0L;
    if (s < -700.0L) return 0.0L;
    // sin(s xi_j) by the angle-addition recurrence; no per-term libm calls.
    const long double c1 = std::cos(s * delta_);
    const long double s1 = std::sin(s * delta_);
    long double c = 1.0L;
    long double sn = 0.0L;
    long double acc = 0.5L * hat_[0] * s;  // xi = 0 node: sin(s xi)/xi -> s
    for (std::size_t j = 1; j < xi_.size(); ++j) {
      const long double next_c = c * c1 - sn * s1;
      sn = sn * c1 + c * s1;
      c = next_c;
      if (hat_[j] != 0.0L) acc += hat_[j] * sn / xi_[j];
    }
    return 0.5L + acc * delta_ / 3.14159265358979323846264338327950288L;
  }

 private:
  long double delta_;
  std::vector<long double> xi_;
  std::vector<long double> hat_;
};

}  // namespace testing
