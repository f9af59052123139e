#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "specaudit/spectrum.hpp"

namespace specaudit {

/// Exact fraction with 64-bit parts, always in lowest terms with den > 0.
/// Arithmetic throws ValidationError on overflow.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string to_string() const;

  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// k! (d - i)! / (d - i + k)!, the Riesz transform factor of the i-th term.
/// Requires 0 <= i <= d and k >= 0.
Rational riesz_factor(int dimension, int index, int order);

/// Volume of the unit ball in R^d (d >= 1).
double unit_ball_volume(int dimension);

/// A_0 = Vol(M) omega_d / (2 pi)^d.
double leading_coefficient(int dimension, double volume);

/// A_0 / Vol(M) = rational * pi^pi_power, exactly.
struct ExactLeading {
  Rational rational;
  int pi_power = 0;
};
ExactLeading leading_coefficient_exact(int dimension);

enum class Provenance { known, fitted, unknown };

const char* to_string(Provenance p);

/// Integrated expansion coefficients A_0..A_m (m <= d) of N(lambda) ~ sum A_i lambda^{d-i}.
struct WeylCoefficients {
  int dimension = 1;
  std::vector<double> values;
  std::vector<Provenance> provenance;
  /// Closed manifold: A_1 = 0.
  bool closed = true;

  /// Throws ValidationError on d < 1, m > d, mismatched sizes, non-finite values,
  /// or a closed manifold whose A_1 is not a known zero.
  void validate() const;
  int exponent(std::size_t index) const { return dimension - static_cast<int>(index); }
};

/// (A_0, 0, ..., 0) up to index d, all known.
WeylCoefficients torus_coefficients(int dimension, double volume);
/// A_0 and A_1 = 0 known; A_2..A_d unknown (value 0 until fitted).
WeylCoefficients sphere_coefficients(int dimension);

struct RieszTerm {
  int exponent = 0;
  double coefficient = 0.0;
};

/// Polynomial sum coefficient * lambda^exponent predicting R_k N.
struct RieszPrediction {
  int order = 0;
  std::vector<RieszTerm> terms;  ///< exponents strictly decreasing
};

/// Multiplies A_i by riesz_factor(d, i, k). Only the supplied terms are used.
RieszPrediction riesz_transform_coeffs(const WeylCoefficients& coeffs, int order);

double predict_counting(const WeylCoefficients& coeffs, double lambda);
double predict_riesz(const RieszPrediction& prediction, double lambda);

/// Least-squares estimate of every coefficient not marked known, from
/// R_k N - prediction on the given points. Fitted entries are marked fitted.
WeylCoefficients fit_unknown_coefficients(const Spectrum& spectrum, const WeylCoefficients& coeffs, int order,
                                          std::span<const double> lambdas);

// --- persistence ---------------------------------------------------------

WeylCoefficients read_coefficients(std::istream& in);
void write_coefficients(std::ostream& out, const WeylCoefficients& coeffs);
WeylCoefficients load_coefficients(const std::filesystem::path& path);
void save_coefficients(const WeylCoefficients& coeffs, const std::filesystem::path& path);

}  // namespace specaudit
