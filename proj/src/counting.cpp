#include "specaudit/counting.hpp"

#include <algorithm>
#include <cmath>

#include "specaudit/error.hpp"
#include "specaudit/grid.hpp"

namespace specaudit {
namespace {

void require_complete(double lambda, double lambda_max) {
  if (lambda > lambda_max)
    throw CompletenessError("lambda " + format_double(lambda) + " is beyond the completeness bound " +
                            format_double(lambda_max));
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

std::int64_t counting_function(const Spectrum& spectrum, double lambda) {
  if (std::isnan(lambda)) throw ValidationError("lambda is NaN");
  require_complete(lambda, spectrum.lambda_max());
  return spectrum.cumulative(spectrum.count_below_index(lambda));
}

void RieszQuery::validate() const {
  if (order < 0) throw ValidationError("Riesz order must be >= 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("Riesz mean needs a finite lambda > 0");
}

PrefixPowerSums::PrefixPowerSums(const Spectrum& spectrum, int max_order)
    : max_order_(max_order),
      table_order_(std::min(max_order, kFastRieszOrder)),
      lambda_max_(spectrum.lambda_max()) {
  if (max_order < 0) throw ValidationError("max_order must be >= 0");
  const std::size_t n = spectrum.size();
  const auto width = static_cast<std::size_t>(table_order_ + 1);
  frequencies_.reserve(n);
  multiplicities_.reserve(n);
  sum_.assign((n + 1) * width, 0.0);
  comp_.assign((n + 1) * width, 0.0);

  std::vector<NeumaierSum> acc(width);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = spectrum.entries()[i];
    frequencies_.push_back(e.frequency);
    multiplicities_.push_back(e.multiplicity);
    double term = static_cast<double>(e.multiplicity);
    for (std::size_t j = 0; j < width; ++j) {
      acc[j].add(term);
      sum_[(i + 1) * width + j] = acc[j].sum();
      comp_[(i + 1) * width + j] = acc[j].compensation();
      term *= e.frequency;
    }
  }
}

NeumaierSum PrefixPowerSums::prefix(int j, std::size_t count) const {
  const auto width = static_cast<std::size_t>(table_order_ + 1);
  const std::size_t at = count * width + static_cast<std::size_t>(j);
  return {sum_[at], comp_[at]};
}

double PrefixPowerSums::power_sum(int j, std::size_t count) const {
  if (j < 0 || j > table_order_) throw ValidationError("power sum order out of range");
  return prefix(j, count).value();
}

std::size_t PrefixPowerSums::count_below_index(double lambda) const {
  return static_cast<std::size_t>(std::lower_bound(frequencies_.begin(), frequencies_.end(), lambda) -
                                  frequencies_.begin());
}

double riesz_mean(const PrefixPowerSums& sums, RieszQuery query) {
  query.validate();
  if (query.order > sums.max_order())
    throw ValidationError("Riesz order " + std::to_string(query.order) + " exceeds table order " +
                          std::to_string(sums.max_order()));
  require_complete(query.lambda, sums.lambda_max());
  const std::size_t count = sums.count_below_index(query.lambda);
  const int k = query.order;

  if (k > sums.table_order()) {
    NeumaierSum total;
    for (std::size_t i = 0; i < count; ++i)
      total.add(static_cast<double>(sums.multiplicities()[i]) *
                ipow(1.0 - sums.frequencies()[i] / query.lambda, k));
    return total.value();
  }

  NeumaierSum total;
  const double inv = 1.0 / query.lambda;
  double scale = 1.0;
  for (int j = 0; j <= k; ++j) {
    const double c = static_cast<double>(binomial(k, j)) * ((j % 2) ? -scale : scale);
    const NeumaierSum s = sums.prefix(j, count);
    total.add(c * s.sum());
    total.add(c * s.compensation());
    scale *= inv;
  }
  return total.value();
}

double riesz_direct(const Spectrum& spectrum, RieszQuery query) {
  query.validate();
  require_complete(query.lambda, spectrum.lambda_max());
  const std::size_t count = spectrum.count_below_index(query.lambda);
  NeumaierSum total;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& e = spectrum.entries()[i];
    total.add(static_cast<double>(e.multiplicity) * ipow(1.0 - e.frequency / query.lambda, query.order));
  }
  return total.value();
}

double riesz_via_integral(const Spectrum& spectrum, RieszQuery query) {
  query.validate();
  if (query.order == 0) throw ValidationError("the integral representation needs order k >= 1");
  require_complete(query.lambda, spectrum.lambda_max());
  const std::size_t count = spectrum.count_below_index(query.lambda);
  const auto& entries = spectrum.entries();
  const double lambda = query.lambda;

  // On [a, b) the counting function equals N_i; integrating the weight gives
  // (lambda / k) * [(1 - a/lambda)^k - (1 - b/lambda)^k].
  NeumaierSum total;
  std::int64_t running = 0;
  for (std::size_t i = 0; i < count; ++i) {
    running += entries[i].multiplicity;
    const double a = entries[i].frequency;
    const double b = i + 1 < count ? entries[i + 1].frequency : lambda;
    const double piece = ipow(1.0 - a / lambda, query.order) - ipow(1.0 - b / lambda, query.order);
    total.add(static_cast<double>(running) * piece);
  }
  return total.value();
}

AntiderivativeCheck repeated_antiderivative_check(const Spectrum& spectrum, int k, double lambda,
                                                  double grid_step) {
  if (k < 1) throw ValidationError("repeated antiderivative check needs k >= 1");
  if (!(grid_step > 0.0)) throw ValidationError("grid_step must be positive");
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  require_complete(lambda, spectrum.lambda_max());

  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(lambda / grid_step)));
  std::vector<double> x(n + 1);
  for (std::size_t j = 0; j <= n; ++j) x[j] = lambda * static_cast<double>(j) / static_cast<double>(n);
  x[n] = lambda;

  // Stage 1: exact cell integrals of the step function N.
  const auto& entries = spectrum.entries();
  std::vector<double> level(n + 1, 0.0);
  {
    NeumaierSum acc;
    std::size_t next = 0;          // first entry with frequency > x[j]
    std::int64_t settled = 0;      // multiplicity with frequency <= x[j]
    while (next < entries.size() && entries[next].frequency <= x[0]) settled += entries[next++].multiplicity;
    for (std::size_t j = 0; j < n; ++j) {
      const double width = x[j + 1] - x[j];
      acc.add(static_cast<double>(settled) * width);
      while (next < entries.size() && entries[next].frequency < x[j + 1]) {
        acc.add(static_cast<double>(entries[next].multiplicity) * (x[j + 1] - entries[next].frequency));
        settled += entries[next++].multiplicity;
      }
      while (next < entries.size() && entries[next].frequency <= x[j + 1]) settled += entries[next++].multiplicity;
      level[j + 1] = acc.value();
    }
  }

  // Stages 2..k: trapezoidal rule.
  for (int stage = 2; stage <= k; ++stage) {
    std::vector<double> next(n + 1, 0.0);
    NeumaierSum acc;
    for (std::size_t j = 0; j < n; ++j) {
      acc.add((x[j + 1] - x[j]) * (level[j] + level[j + 1]) / 2);
      next[j + 1] = acc.value();
    }
    level = std::move(next);
  }

  double factor = 1.0;
  for (int i = 1; i <= k; ++i) factor *= static_cast<double>(i) / lambda;
  AntiderivativeCheck out;
  out.lhs = factor * level[n];
  out.rhs = riesz_direct(spectrum, {k, lambda});
  out.deviation = std::abs(out.lhs - out.rhs);
  return out;
}

}  // namespace specaudit
