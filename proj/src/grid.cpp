#include "specaudit/grid.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "specaudit/error.hpp"

namespace specaudit {

void GridSpec::validate() const {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
    throw ValidationError("grid bounds must be finite");
  if (step <= 0.0) throw ValidationError("grid step must be positive");
  if (stop < start) throw ValidationError("grid stop must not precede start");
}

std::size_t GridSpec::size() const {
  validate();
  const double n = std::floor((stop - start) / step + 1e-9);
  return static_cast<std::size_t>(n) + 1;
}

std::vector<double> GridSpec::points() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i);
  return out;
}

GridSpec GridSpec::parse(std::string_view text) {
  const auto first = text.find(':');
  const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (first == std::string_view::npos || second == std::string_view::npos ||
      text.find(':', second + 1) != std::string_view::npos)
    throw ValidationError("grid must have the form start:stop:step, got '" + std::string(text) + "'");
  GridSpec g{parse_double(text.substr(0, first)),
             parse_double(text.substr(first + 1, second - first - 1)),
             parse_double(text.substr(second + 1))};
  g.validate();
  return g;
}

std::string GridSpec::to_string() const {
  return format_double(start) + ":" + format_double(stop) + ":" + format_double(step);
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ValidationError("not a number: '" + std::string(text) + "'");
  return v;
}

}  // namespace specaudit
