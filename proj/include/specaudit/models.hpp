#pragma once

#include <cstdint>
#include <vector>

#include "specaudit/spectrum.hpp"

namespace specaudit {

/// Flat torus R^d / L Z^d. `basis` is the d x d matrix L in row-major order;
/// its columns generate the lattice.
struct FlatTorus {
  int dimension = 2;
  std::vector<double> basis;

  /// Torus with basis side * Identity.
  static FlatTorus cubic(int dimension, double side);
  /// Torus with a diagonal basis diag(sides).
  static FlatTorus rectangular(std::vector<double> sides);

  /// Throws ValidationError for d < 1, wrong basis size or singular basis.
  void validate() const;
  double volume() const;
};

/// Unit round sphere S^d.
struct RoundSphere {
  int dimension = 2;

  void validate() const;
  double volume() const;
};

struct EnumerationLimits {
  /// Upper bound on lattice candidates visited in the bounding box.
  std::uint64_t point_budget = 100'000'000;
};

/// Exact torus spectrum below lambda_max: norms of the dual lattice 2 pi L^{-T} Z^d
/// with multiplicities. Integer-valued (up to a common scale) Gram matrices are
/// handled in exact integer arithmetic; otherwise equal norms are merged with a
/// tolerance of 1e-9 * lambda_max.
Spectrum torus_spectrum(const FlatTorus& torus, double lambda_max, EnumerationLimits limits = {});

/// Sphere spectrum: frequencies sqrt(l (l + d - 1)) with multiplicity
/// (2l + d - 1) / (d - 1) * C(l + d - 2, l).
Spectrum sphere_spectrum(const RoundSphere& sphere, double lambda_max);

struct LengthCount {
  double length = 0.0;
  std::int64_t count = 0;

  friend bool operator==(const LengthCount&, const LengthCount&) = default;
};

/// Distinct closed-geodesic lengths |L m|, m != 0, below length_max, with the
/// number of lattice vectors of each length.
std::vector<LengthCount> torus_geodesic_lengths(const FlatTorus& torus, double length_max,
                                                EnumerationLimits limits = {});

}  // namespace specaudit
