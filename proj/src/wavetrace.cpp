#include "specaudit/wavetrace.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "specaudit/error.hpp"
#include "specaudit/mollify.hpp"
#include "specaudit/numeric.hpp"
#include "specaudit/parallel.hpp"

namespace specaudit {
namespace {

constexpr double kWindowTail = 1e-8;

// int_a^b plateau_fourier((x - c) / w) dx by composite Simpson on a fine grid.
double plateau_mass(double a, double b, const Window& w) {
  if (!(b > a)) return 0.0;
  const int n = 20000;
  const double h = (b - a) / n;
  NeumaierSum acc;
  for (int i = 0; i <= n; ++i) {
    const double coef = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc.add(coef * w.weight(a + i * h));
  }
  return acc.value() * h / 3;
}

}  // namespace

const char* to_string(WindowShape shape) { return shape == WindowShape::gaussian ? "gaussian" : "plateau"; }

void Window::validate() const {
  if (!std::isfinite(center)) throw ValidationError("window center must be finite");
  if (!(width > 0.0) || !std::isfinite(width)) throw ValidationError("window width must be positive");
}

double Window::weight(double lambda) const {
  const double x = (lambda - center) / width;
  if (shape == WindowShape::gaussian) return std::exp(-0.5 * x * x);
  return plateau_fourier(x);
}

double Window::mass_fraction_above(double lambda) const {
  validate();
  if (shape == WindowShape::gaussian) {
    const double s = width * std::sqrt(2.0);
    const double total = std::erfc(-center / s);
    return total == 0.0 ? 0.0 : std::erfc((lambda - center) / s) / total;
  }
  const double lo = std::max(0.0, center - width);
  const double hi = center + width;
  if (lambda >= hi) return 0.0;
  const double total = plateau_mass(lo, hi, *this);
  return total == 0.0 ? 0.0 : plateau_mass(std::max(lo, lambda), hi, *this) / total;
}

TraceSeries spectral_wave_trace(const Spectrum& spectrum, const Window& window, const GridSpec& t_grid) {
  window.validate();
  t_grid.validate();
  const double above = window.mass_fraction_above(spectrum.lambda_max());
  if (above > kWindowTail)
    throw CompletenessError("window puts " + format_double(above) + " of its mass above lambda_max " +
                            format_double(spectrum.lambda_max()) + " (limit 1e-8)");

  std::vector<double> freq;
  std::vector<double> amp;
  for (const auto& e : spectrum.entries()) {
    const double w = window.weight(e.frequency);
    if (w == 0.0) continue;
    freq.push_back(e.frequency);
    amp.push_back(static_cast<double>(e.multiplicity) * w);
  }

  TraceSeries out{t_grid, std::vector<double>(t_grid.size()), window};
  parallel_for(out.values.size(), [&](std::size_t i) {
    const double t = t_grid.at(i);
    NeumaierSum acc;
    for (std::size_t j = 0; j < freq.size(); ++j) acc.add(amp[j] * std::cos(t * freq[j]));
    out.values[i] = acc.value();
  });
  return out;
}

std::vector<LengthPeak> detect_length_peaks(const TraceSeries& trace, double min_separation, std::size_t count,
                                            double relative_floor) {
  if (count < 1) throw ValidationError("peak count must be >= 1");
  if (!(min_separation >= 0.0)) throw ValidationError("min_separation must be >= 0");
  const auto& f = trace.values;
  const std::size_t n = f.size();
  std::vector<std::size_t> candidates;
  double tallest = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = std::abs(f[i]);
    if (trace.t_grid.at(i) < min_separation) continue;
    if (a > 0.0 && a >= std::abs(f[i - 1]) && a > std::abs(f[i + 1])) {
      candidates.push_back(i);
      tallest = std::max(tallest, a);
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(f[a]) > std::abs(f[b]); });

  std::vector<LengthPeak> kept;
  for (std::size_t i : candidates) {
    const double a = std::abs(f[i]);
    if (a < relative_floor * tallest) break;
    const double step = trace.t_grid.step;
    // Parabola through log|F| at i-1, i, i+1; vertex offset in steps.
    double t = trace.t_grid.at(i);
    double height = a;
    const double l0 = std::log(std::abs(f[i - 1]));
    const double l1 = std::log(a);
    const double l2 = std::log(std::abs(f[i + 1]));
    const double curvature = l0 - 2 * l1 + l2;
    if (std::isfinite(l0) && std::isfinite(l2) && curvature < 0.0) {
      const double offset = 0.5 * (l0 - l2) / curvature;
      t += offset * step;
      height = std::exp(l1 - 0.25 * (l0 - l2) * offset);
    }
    const bool separated = std::all_of(kept.begin(), kept.end(), [&](const LengthPeak& p) {
      return std::abs(p.t - t) >= min_separation;
    });
    if (separated) kept.push_back({t, height});
  }
  std::sort(kept.begin(), kept.end(), [](const LengthPeak& a, const LengthPeak& b) { return a.t < b.t; });
  if (kept.size() > count) kept.resize(count);
  return kept;
}

void write_trace(std::ostream& out, const TraceSeries& trace) {
  for (std::size_t i = 0; i < trace.values.size(); ++i)
    out << format_double(trace.t_grid.at(i)) << ' ' << format_double(trace.values[i]) << '\n';
}

}  // namespace specaudit
