#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "specaudit/grid.hpp"
#include "specaudit/spectrum.hpp"

namespace specaudit {

enum class WindowShape {
  gaussian,  ///< exp(-(lambda - center)^2 / (2 width^2))
  plateau,   ///< plateau_fourier((lambda - center) / width): flat on |.| <= width/2, 0 beyond width
};

const char* to_string(WindowShape shape);

/// Spectral weight w(lambda) applied before the cosine sum.
struct Window {
  WindowShape shape = WindowShape::gaussian;
  double center = 0.0;
  double width = 1.0;

  void validate() const;
  double weight(double lambda) const;
  /// Fraction of the window's mass on [0, inf) that lies above `lambda`.
  double mass_fraction_above(double lambda) const;
};

struct TraceSeries {
  GridSpec t_grid;
  std::vector<double> values;  ///< F(t) at t_grid.at(i)
  Window window;
};

/// F(t) = sum mult_i w(lambda_i) cos(t lambda_i). Throws CompletenessError when more
/// than 1e-8 of the window mass lies above lambda_max.
TraceSeries spectral_wave_trace(const Spectrum& spectrum, const Window& window, const GridSpec& t_grid);

struct LengthPeak {
  double t = 0.0;
  double height = 0.0;  ///< |F| at the refined location
};

/// Peaks of |F| read as closed-geodesic lengths.
///
/// Candidates are interior local maxima with t >= min_separation whose height is at
/// least relative_floor times the largest such maximum. They are kept greedily by
/// height subject to pairwise separation >= min_separation, and the `count` shortest
/// survivors are returned in increasing t, each refined by a parabola through
/// log|F| at three grid points.
std::vector<LengthPeak> detect_length_peaks(const TraceSeries& trace, double min_separation, std::size_t count,
                                            double relative_floor = 0.1);

/// Two columns "t F".
void write_trace(std::ostream& out, const TraceSeries& trace);

}  // namespace specaudit
