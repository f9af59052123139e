#include <charconv>
#include <cmath>
#include <optional>
#include <istream>
#include <ostream>
#include <sstream>

#include "specaudit/error.hpp"
#include "specaudit/grid.hpp"
#include "specaudit/io.hpp"
#include "specaudit/spectrum.hpp"

namespace specaudit {
namespace {

constexpr std::string_view kFormatTag = "specaudit-spectrum";

std::string escape_label(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      out += c;
    }
  }
  return out;
}

std::string unescape_label(std::string_view s, std::size_t line) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw ParseError(line, "dangling escape in label");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: throw ParseError(line, "unknown escape in label");
    }
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

SpectralEntry parse_data_line(std::string_view text, std::size_t line) {
  const auto tokens = split_ws(text);
  if (tokens.empty() || tokens.size() > 2)
    throw ParseError(line, "expected 'frequency [multiplicity]'");
  SpectralEntry e;
  try {
    e.frequency = parse_double(tokens[0]);
  } catch (const ValidationError&) {
    throw ParseError(line, "not a number: '" + std::string(tokens[0]) + "'");
  }
  if (!std::isfinite(e.frequency)) throw ParseError(line, "value is not finite");
  if (e.frequency < 0.0) throw ParseError(line, "negative value " + std::string(tokens[0]));
  if (tokens.size() == 2) {
    auto [ptr, ec] = std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), e.multiplicity);
    if (ec != std::errc{} || ptr != tokens[1].data() + tokens[1].size())
      throw ParseError(line, "bad multiplicity '" + std::string(tokens[1]) + "'");
    if (e.multiplicity < 1) throw ParseError(line, "multiplicity must be >= 1");
  }
  return e;
}

struct Header {
  bool structured = false;
  std::optional<double> lambda_max;
  std::optional<SpectrumUnit> unit;
  std::string label;
};

void parse_directive(std::string_view body, std::size_t line, Header& h) {
  const auto space = body.find_first_of(" \t");
  const std::string_view key = body.substr(0, space);
  const std::string_view value = space == std::string_view::npos ? std::string_view{} : body.substr(space + 1);
  if (key == "format") {
    const auto tokens = split_ws(value);
    if (tokens.size() != 2 || tokens[0] != kFormatTag || tokens[1] != "1")
      throw ParseError(line, "unsupported format directive");
    h.structured = true;
  } else if (key == "unit") {
    const auto v = trim(value);
    if (v == "frequency") {
      h.unit = SpectrumUnit::frequency;
    } else if (v == "eigenvalue") {
      h.unit = SpectrumUnit::eigenvalue;
    } else {
      throw ParseError(line, "unit must be 'frequency' or 'eigenvalue'");
    }
  } else if (key == "lambda_max") {
    try {
      h.lambda_max = parse_double(value);
    } catch (const ValidationError&) {
      throw ParseError(line, "bad lambda_max");
    }
  } else if (key == "label") {
    h.label = unescape_label(value, line);
  } else {
    throw ParseError(line, "unknown directive '%" + std::string(key) + "'");
  }
}

}  // namespace

Spectrum read_spectrum(std::istream& in, SpectrumFormat format, const PlainReadOptions& plain) {
  Header header;
  std::vector<SpectralEntry> values;
  std::string raw;
  std::size_t line = 0;
  bool seen_data = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    if (text.front() == '%') {
      if (format == SpectrumFormat::plain) throw ParseError(line, "directive in plain-format input");
      if (seen_data) throw ParseError(line, "directive after data");
      parse_directive(text.substr(1), line, header);
      continue;
    }
    if (format == SpectrumFormat::structured && !header.structured)
      throw ParseError(line, "missing '%format specaudit-spectrum 1' header");
    seen_data = true;
    SpectralEntry e = parse_data_line(text, line);
    if (format == SpectrumFormat::structured && !values.empty() &&
        !(e.frequency > values.back().frequency))
      throw ValidationError("line " + std::to_string(line) + ": values are not strictly increasing");
    values.push_back(e);
  }

  if (format == SpectrumFormat::structured) {
    if (!header.structured) throw ParseError(line, "missing '%format specaudit-spectrum 1' header");
    if (!header.lambda_max) throw ParseError(0, "structured spectrum lacks %lambda_max");
    if (header.unit.value_or(SpectrumUnit::frequency) == SpectrumUnit::eigenvalue)
      return Spectrum::from_laplace_eigenvalues(values, *header.lambda_max, 0.0, header.label);
    return Spectrum::from_frequencies(values, *header.lambda_max, 0.0, header.label);
  }

  if (!plain.lambda_max)
    throw ValidationError("plain spectrum input needs an explicit completeness bound (lambda_max)");
  if (plain.unit == SpectrumUnit::eigenvalue)
    return Spectrum::from_laplace_eigenvalues(values, *plain.lambda_max, plain.merge_tol, plain.label);
  return Spectrum::from_frequencies(values, *plain.lambda_max, plain.merge_tol, plain.label);
}

void write_spectrum(std::ostream& out, const Spectrum& spectrum, SpectrumFormat format) {
  if (format == SpectrumFormat::structured) {
    out << '%' << "format " << kFormatTag << " 1\n";
    out << "%unit frequency\n";
    out << "%lambda_max " << format_double(spectrum.lambda_max()) << '\n';
    out << "%label " << escape_label(spectrum.label()) << '\n';
  } else {
    out << "# lambda_max " << format_double(spectrum.lambda_max()) << '\n';
  }
  for (const auto& e : spectrum.entries())
    out << format_double(e.frequency) << ' ' << e.multiplicity << '\n';
}

Spectrum load_spectrum(const std::filesystem::path& path, const PlainReadOptions& plain) {
  const std::string content = read_file(path);
  std::istringstream probe(content);
  std::string raw;
  SpectrumFormat format = SpectrumFormat::plain;
  while (std::getline(probe, raw)) {
    const auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    if (text.front() == '%') format = SpectrumFormat::structured;
    break;
  }
  std::istringstream in(content);
  return read_spectrum(in, format, plain);
}

Spectrum load_spectrum(const std::filesystem::path& path, SpectrumFormat format,
                       const PlainReadOptions& plain) {
  std::istringstream in(read_file(path));
  return read_spectrum(in, format, plain);
}

void save_spectrum(const Spectrum& spectrum, const std::filesystem::path& path, SpectrumFormat format) {
  std::ostringstream out;
  write_spectrum(out, spectrum, format);
  write_file_atomic(path, out.str());
}

}  // namespace specaudit
