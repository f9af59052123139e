#include <cmath>
#include <ostream>

#include "specaudit/error.hpp"
#include "specaudit/grid.hpp"
#include "specaudit/mollify.hpp"
#include "specaudit/numeric.hpp"
#include "specaudit/parallel.hpp"

namespace specaudit {
namespace {

void require_scale(const ScaledKernel& kernel) {
  if (!(kernel.scale > 0.0) || !std::isfinite(kernel.scale))
    throw ValidationError("kernel scale T must be positive and finite");
}

}  // namespace

ConvolutionValue convolve_counting(const Spectrum& spectrum, const ScaledKernel& kernel, double lambda) {
  require_scale(kernel);
  const double reach = kernel.reach();
  const std::size_t lo = spectrum.count_below_index(lambda - reach);
  const auto& entries = spectrum.entries();

  // Entries more than `reach` below lambda sit where Phi has saturated.
  NeumaierSum acc;
  acc.add(kernel.base.mass() * static_cast<double>(spectrum.cumulative(lo)));
  for (std::size_t i = lo; i < entries.size() && entries[i].frequency <= lambda + reach; ++i)
    acc.add(static_cast<double>(entries[i].multiplicity) * kernel.antiderivative(lambda - entries[i].frequency));
  return {acc.value(), lambda + reach <= spectrum.lambda_max()};
}

ConvolutionValue convolve_density(const Spectrum& spectrum, const ScaledKernel& kernel, double lambda) {
  require_scale(kernel);
  const double reach = kernel.reach();
  const auto& entries = spectrum.entries();
  NeumaierSum acc;
  for (std::size_t i = spectrum.count_below_index(lambda - reach);
       i < entries.size() && entries[i].frequency <= lambda + reach; ++i)
    acc.add(static_cast<double>(entries[i].multiplicity) * kernel.value(lambda - entries[i].frequency));
  return {acc.value(), lambda + reach <= spectrum.lambda_max()};
}

std::vector<GapPoint> tauberian_gap_check(const Spectrum& spectrum, const ScaledKernel& kernel,
                                          const GridSpec& grid) {
  require_scale(kernel);
  grid.validate();
  const double reach = kernel.reach();
  if (grid.stop + reach > spectrum.lambda_max())
    throw CompletenessError("gap check at " + format_double(grid.stop) + " needs the spectrum up to " +
                            format_double(grid.stop + reach) + ", beyond lambda_max " +
                            format_double(spectrum.lambda_max()));

  const auto& entries = spectrum.entries();
  // Prefix sums of mult * lambda_i for the saturated block.
  std::vector<double> first_moment(entries.size() + 1, 0.0);
  {
    NeumaierSum acc;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      acc.add(static_cast<double>(entries[i].multiplicity) * entries[i].frequency);
      first_moment[i + 1] = acc.value();
    }
  }

  const Kernel& base = kernel.base;
  const double T = kernel.scale;
  const double mass = base.mass();
  const double cut = base.t_cut();
  // Psi(s) = Psi(t_cut) + I (s - t_cut) for s > t_cut.
  const double saturated_offset = (base.second_antiderivative(cut) - mass * cut) / T;

  std::vector<GapPoint> out(grid.size());
  parallel_for(out.size(), [&](std::size_t j) {
    const double lambda = grid.at(j);
    const std::size_t lo = spectrum.count_below_index(lambda - reach);
    const auto count = static_cast<double>(spectrum.cumulative(lo));
    NeumaierSum acc;
    // Saturated entries: (lambda - lambda_i) - Psi(T (lambda - lambda_i)) / T.
    acc.add((1.0 - mass) * (count * lambda - first_moment[lo]));
    acc.add(-count * saturated_offset);
    for (std::size_t i = lo; i < entries.size() && entries[i].frequency <= lambda + reach; ++i) {
      const double x = lambda - entries[i].frequency;
      const double integral_n = x > 0.0 ? x : 0.0;
      acc.add(static_cast<double>(entries[i].multiplicity) * (integral_n - base.second_antiderivative(T * x) / T));
    }
    out[j] = {lambda, acc.value()};
  });
  return out;
}

}  // namespace specaudit
