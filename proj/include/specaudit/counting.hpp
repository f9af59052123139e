#pragma once

#include <cstdint>
#include <vector>

#include "specaudit/numeric.hpp"
#include "specaudit/spectrum.hpp"

namespace specaudit {

/// N(lambda) = sum of multiplicities of frequencies strictly below lambda.
/// Throws CompletenessError if lambda exceeds spectrum.lambda_max().
std::int64_t counting_function(const Spectrum& spectrum, double lambda);

/// Order k and evaluation point lambda of a Riesz mean R_k N(lambda).
struct RieszQuery {
  int order = 1;
  double lambda = 1.0;

  /// Throws ValidationError unless order >= 0 and lambda > 0.
  void validate() const;
};

/// Largest order served from power sums; higher orders fall back to direct
/// summation because the binomial expansion cancels badly.
inline constexpr int kFastRieszOrder = 8;

/// Prefix tables S_j(i) = sum_{n < i} mult_n * lambda_n^j for j = 0..min(max_order, 8),
/// kept as compensated (sum, error) pairs. Immutable after construction.
class PrefixPowerSums {
 public:
  explicit PrefixPowerSums(const Spectrum& spectrum, int max_order = kFastRieszOrder);

  int max_order() const noexcept { return max_order_; }
  int table_order() const noexcept { return table_order_; }
  double lambda_max() const noexcept { return lambda_max_; }
  const std::vector<double>& frequencies() const noexcept { return frequencies_; }
  const std::vector<std::int64_t>& multiplicities() const noexcept { return multiplicities_; }

  /// Compensated prefix sum S_j over the first `count` entries.
  NeumaierSum prefix(int j, std::size_t count) const;
  /// S_j over the first `count` entries, rounded to double.
  double power_sum(int j, std::size_t count) const;
  /// Number of entries with frequency strictly below lambda.
  std::size_t count_below_index(double lambda) const;

  friend bool operator==(const PrefixPowerSums&, const PrefixPowerSums&) = default;

 private:
  int max_order_;
  int table_order_;
  double lambda_max_;
  std::vector<double> frequencies_;
  std::vector<std::int64_t> multiplicities_;
  // Row-major [(count) * (table_order + 1) + j], count = 0..n.
  std::vector<double> sum_;
  std::vector<double> comp_;
};

/// R_k N(lambda) = sum_{lambda_i < lambda} mult_i (1 - lambda_i / lambda)^k from the
/// prefix tables via the binomial identity (direct summation above order 8).
/// Throws ValidationError if k > max_order, CompletenessError beyond lambda_max.
double riesz_mean(const PrefixPowerSums& sums, RieszQuery query);

/// Brute-force O(n) evaluation of the same sum.
double riesz_direct(const Spectrum& spectrum, RieszQuery query);

/// R_k N(lambda) = k / lambda * int_0^lambda (1 - tau/lambda)^{k-1} N(tau) dtau evaluated
/// exactly over the intervals where N is constant. Requires k >= 1.
double riesz_via_integral(const Spectrum& spectrum, RieszQuery query);

struct AntiderivativeCheck {
  double lhs = 0.0;  ///< lambda^{-k} k! times the k-fold antiderivative of N at lambda
  double rhs = 0.0;  ///< riesz_direct
  double deviation = 0.0;
};

/// Evaluates lambda^{-k} k! (chi_+^{k-1} * N)(lambda) as a k-fold repeated integral of N
/// from 0 on a uniform grid of roughly `grid_step` and compares it with R_k N(lambda).
/// The first integration is exact on the step function (the trapezoidal rule on the
/// grid refined by the jump points); the remaining k-1 use the plain trapezoidal rule,
/// so the deviation is second order in the step.
AntiderivativeCheck repeated_antiderivative_check(const Spectrum& spectrum, int k, double lambda,
                                                  double grid_step);

}  // namespace specaudit
