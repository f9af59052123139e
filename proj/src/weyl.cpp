#include "specaudit/weyl.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "specaudit/counting.hpp"
#include "specaudit/error.hpp"
#include "specaudit/grid.hpp"
#include "specaudit/io.hpp"
#include "specaudit/models.hpp"
#include "specaudit/numeric.hpp"

namespace specaudit {
namespace {

std::int64_t narrow(__int128 v) {
  if (v > INT64_MAX || v < -INT64_MAX) throw ValidationError("rational arithmetic overflow");
  return static_cast<std::int64_t>(v);
}

Rational factorial(int n) {
  Rational r(1);
  for (int i = 2; i <= n; ++i) r = r * Rational(i);
  return r;
}

void require_dimension(int d) {
  if (d < 1) throw ValidationError("dimension must be >= 1");
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw ValidationError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

std::string Rational::to_string() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  // Cross-cancel first to keep the parts small.
  const std::int64_t g1 = std::gcd(a.num_, b.den_);
  const std::int64_t g2 = std::gcd(b.num_, a.den_);
  const __int128 num = static_cast<__int128>(a.num_ / (g1 ? g1 : 1)) * (b.num_ / (g2 ? g2 : 1));
  const __int128 den = static_cast<__int128>(a.den_ / (g2 ? g2 : 1)) * (b.den_ / (g1 ? g1 : 1));
  return {narrow(num), narrow(den)};
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw ValidationError("division by zero");
  return a * Rational(b.den_, b.num_);
}

Rational riesz_factor(int dimension, int index, int order) {
  require_dimension(dimension);
  if (index < 0 || index > dimension) throw ValidationError("coefficient index must lie in [0, d]");
  if (order < 0) throw ValidationError("Riesz order must be >= 0");
  // k! e! / (e + k)! = 1 / C(e + k, k)
  const int e = dimension - index;
  const std::int64_t c = binomial(e + order, order);
  if (c <= 0) throw ValidationError("Riesz factor overflows");
  return Rational(1, c);
}

double unit_ball_volume(int dimension) {
  require_dimension(dimension);
  // V_d = V_{d-2} * 2 pi / d
  double v = dimension % 2 ? 2.0 : 1.0;
  for (int d = dimension % 2 ? 3 : 2; d <= dimension; d += 2) v *= two_pi / d;
  return v;
}

double leading_coefficient(int dimension, double volume) {
  require_dimension(dimension);
  if (!(volume > 0.0) || !std::isfinite(volume)) throw ValidationError("volume must be positive");
  return volume * unit_ball_volume(dimension) / std::pow(two_pi, dimension);
}

ExactLeading leading_coefficient_exact(int dimension) {
  require_dimension(dimension);
  const int m = dimension / 2;
  // omega_d = pi^m / m! (d = 2m) or 2^d m! pi^m / d! (d = 2m + 1).
  Rational omega = dimension % 2 ? Rational(std::int64_t{1} << dimension) * factorial(m) / factorial(dimension)
                                 : Rational(1) / factorial(m);
  return {omega / Rational(std::int64_t{1} << dimension), m - dimension};
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::known: return "known";
    case Provenance::fitted: return "fitted";
    case Provenance::unknown: return "unknown";
  }
  return "?";
}

void WeylCoefficients::validate() const {
  require_dimension(dimension);
  if (values.empty()) throw ValidationError("at least A_0 is required");
  if (values.size() > static_cast<std::size_t>(dimension) + 1)
    throw ValidationError("at most d + 1 coefficients (A_0..A_d) are allowed");
  if (provenance.size() != values.size()) throw ValidationError("one provenance per coefficient is required");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("coefficients must be finite");
  if (closed && values.size() > 1 && (values[1] != 0.0 || provenance[1] != Provenance::known))
    throw ValidationError("closed manifold requires A_1 = 0 (known)");
}

WeylCoefficients torus_coefficients(int dimension, double volume) {
  WeylCoefficients c;
  c.dimension = dimension;
  c.values.assign(static_cast<std::size_t>(dimension) + 1, 0.0);
  c.values[0] = leading_coefficient(dimension, volume);
  c.provenance.assign(c.values.size(), Provenance::known);
  return c;
}

WeylCoefficients sphere_coefficients(int dimension) {
  const RoundSphere sphere{dimension};
  sphere.validate();
  WeylCoefficients c;
  c.dimension = dimension;
  c.values.assign(static_cast<std::size_t>(dimension) + 1, 0.0);
  c.values[0] = leading_coefficient(dimension, sphere.volume());
  c.provenance.assign(c.values.size(), Provenance::unknown);
  c.provenance[0] = Provenance::known;
  c.provenance[1] = Provenance::known;
  return c;
}

RieszPrediction riesz_transform_coeffs(const WeylCoefficients& coeffs, int order) {
  coeffs.validate();
  if (order < 0) throw ValidationError("Riesz order must be >= 0");
  RieszPrediction p{order, {}};
  for (std::size_t i = 0; i < coeffs.values.size(); ++i) {
    const double factor = order == 0 ? 1.0 : riesz_factor(coeffs.dimension, static_cast<int>(i), order).value();
    p.terms.push_back({coeffs.exponent(i), factor * coeffs.values[i]});
  }
  return p;
}

double predict_riesz(const RieszPrediction& prediction, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("prediction needs lambda > 0");
  if (prediction.terms.empty()) return 0.0;
  // Horner over the full run of exponents from the highest down to the lowest.
  const int top = prediction.terms.front().exponent;
  const int bottom = prediction.terms.back().exponent;
  double acc = 0.0;
  std::size_t next = 0;
  for (int e = top; e >= bottom; --e) {
    acc *= lambda;
    if (next < prediction.terms.size() && prediction.terms[next].exponent == e) acc += prediction.terms[next++].coefficient;
  }
  return acc * std::pow(lambda, bottom);
}

double predict_counting(const WeylCoefficients& coeffs, double lambda) {
  return predict_riesz(riesz_transform_coeffs(coeffs, 0), lambda);
}

WeylCoefficients fit_unknown_coefficients(const Spectrum& spectrum, const WeylCoefficients& coeffs, int order,
                                          std::span<const double> lambdas) {
  coeffs.validate();
  if (lambdas.empty()) throw ValidationError("fit grid is empty");
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < coeffs.values.size(); ++i)
    if (coeffs.provenance[i] != Provenance::known) free.push_back(i);
  if (free.empty()) return coeffs;
  if (lambdas.size() < free.size())
    throw ValidationError("fit needs at least as many grid points as unknown coefficients");

  WeylCoefficients pinned = coeffs;
  for (std::size_t i : free) pinned.values[i] = 0.0;
  const RieszPrediction base = riesz_transform_coeffs(pinned, order);
  const PrefixPowerSums sums(spectrum, std::max(order, 0));

  const auto rows = static_cast<Eigen::Index>(lambdas.size());
  const auto cols = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd target(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double lambda = lambdas[static_cast<std::size_t>(r)];
    target(r) = riesz_mean(sums, {order, lambda}) - predict_riesz(base, lambda);
    for (Eigen::Index c = 0; c < cols; ++c) {
      const int i = static_cast<int>(free[static_cast<std::size_t>(c)]);
      const double factor = order == 0 ? 1.0 : riesz_factor(coeffs.dimension, i, order).value();
      design(r, c) = factor * std::pow(lambda, coeffs.dimension - i);
    }
  }
  Eigen::VectorXd scale = design.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (scale(c) == 0.0) throw ValidationError("rank-deficient fit: empty design column");
    design.col(c) /= scale(c);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < cols) throw ValidationError("rank-deficient fit design");
  const Eigen::VectorXd solution = qr.solve(target);

  WeylCoefficients out = coeffs;
  for (Eigen::Index c = 0; c < cols; ++c) {
    const std::size_t i = free[static_cast<std::size_t>(c)];
    out.values[i] = solution(c) / scale(c);
    out.provenance[i] = Provenance::fitted;
  }
  return out;
}

// --- persistence ---------------------------------------------------------

namespace {

constexpr std::string_view kCoeffTag = "specaudit-coefficients";

Provenance parse_provenance(std::string_view s, std::size_t line) {
  if (s == "known") return Provenance::known;
  if (s == "fitted") return Provenance::fitted;
  if (s == "unknown") return Provenance::unknown;
  throw ParseError(line, "provenance must be known, fitted or unknown");
}

}  // namespace

WeylCoefficients read_coefficients(std::istream& in) {
  WeylCoefficients c;
  bool have_format = false;
  bool have_dimension = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream tokens(raw);
    std::string head;
    if (!(tokens >> head) || head.front() == '#') continue;
    std::string rest;
    std::vector<std::string> fields;
    while (tokens >> rest) fields.push_back(rest);
    if (head == "%format") {
      if (fields.size() != 2 || fields[0] != kCoeffTag || fields[1] != "1")
        throw ParseError(line, "unsupported format directive");
      have_format = true;
    } else if (head == "%dimension") {
      if (fields.size() != 1) throw ParseError(line, "expected '%dimension d'");
      try {
        c.dimension = static_cast<int>(parse_double(fields[0]));
      } catch (const ValidationError&) {
        throw ParseError(line, "bad dimension");
      }
      have_dimension = true;
    } else if (head == "%closed") {
      if (fields.size() != 1 || (fields[0] != "yes" && fields[0] != "no"))
        throw ParseError(line, "expected '%closed yes|no'");
      c.closed = fields[0] == "yes";
    } else if (head.front() == '%') {
      throw ParseError(line, "unknown directive '" + head + "'");
    } else {
      if (!have_format || !have_dimension) throw ParseError(line, "coefficient line before the header");
      if (fields.size() != 3) throw ParseError(line, "expected 'index exponent value provenance'");
      double index = 0;
      double exponent = 0;
      double value = 0;
      try {
        index = parse_double(head);
        exponent = parse_double(fields[0]);
        value = parse_double(fields[1]);
      } catch (const ValidationError&) {
        throw ParseError(line, "bad number");
      }
      if (index != static_cast<double>(c.values.size()))
        throw ParseError(line, "coefficient indices must run 0, 1, 2, ...");
      if (exponent != static_cast<double>(c.dimension) - index)
        throw ParseError(line, "exponent must equal dimension - index");
      c.values.push_back(value);
      c.provenance.push_back(parse_provenance(fields[2], line));
    }
  }
  if (!have_format) throw ParseError(0, "missing '%format specaudit-coefficients 1' header");
  c.validate();
  return c;
}

void write_coefficients(std::ostream& out, const WeylCoefficients& coeffs) {
  coeffs.validate();
  out << "%format " << kCoeffTag << " 1\n";
  out << "%dimension " << coeffs.dimension << '\n';
  out << "%closed " << (coeffs.closed ? "yes" : "no") << '\n';
  out << "# index exponent value provenance\n";
  for (std::size_t i = 0; i < coeffs.values.size(); ++i)
    out << i << ' ' << coeffs.exponent(i) << ' ' << format_double(coeffs.values[i]) << ' '
        << to_string(coeffs.provenance[i]) << '\n';
}

WeylCoefficients load_coefficients(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_coefficients(in);
}

void save_coefficients(const WeylCoefficients& coeffs, const std::filesystem::path& path) {
  std::ostringstream out;
  write_coefficients(out, coeffs);
  write_file_atomic(path, out.str());
}

}  // namespace specaudit
