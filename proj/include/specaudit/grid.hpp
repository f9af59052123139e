#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace specaudit {

/// Uniform grid start, start+step, ..., up to and including stop when it
/// falls on the lattice (within a relative 1e-9 of a step).
struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  /// Throws ValidationError unless start <= stop and step > 0 (all finite).
  void validate() const;
  std::size_t size() const;
  double at(std::size_t i) const { return start + static_cast<double>(i) * step; }
  std::vector<double> points() const;

  /// Parses "start:stop:step" with full double precision.
  static GridSpec parse(std::string_view text);
  /// Inverse of parse using shortest round-trip formatting.
  std::string to_string() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Strict full-string double parse; throws ValidationError on junk.
double parse_double(std::string_view text);

}  // namespace specaudit
