#include "specaudit/audit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "specaudit/counting.hpp"
#include "specaudit/error.hpp"
#include "specaudit/numeric.hpp"
#include "specaudit/parallel.hpp"

namespace specaudit {
namespace {

constexpr double kDefaultStep = 0.1;
constexpr std::size_t kMinGridSteps = 20;

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double median_abs(std::vector<double> v) {
  if (v.empty()) return 0.0;
  for (double& x : v) x = std::abs(x);
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return (lower + upper) / 2;
}

double dot(const std::vector<double>& a, const std::vector<double>& b, std::size_t from = 0) {
  NeumaierSum acc;
  for (std::size_t i = from; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

// Orthonormal basis (columns) of the trend space on the grid.
Eigen::MatrixXd trend_basis(const WeylCoefficients& baseline, const std::vector<double>& lambdas) {
  std::vector<int> exponents;
  for (std::size_t i = 0; i < baseline.values.size(); ++i)
    if (baseline.provenance[i] != Provenance::known) exponents.push_back(baseline.exponent(i));
  const auto rows = static_cast<Eigen::Index>(lambdas.size());
  const auto cols = static_cast<Eigen::Index>(exponents.size());
  if (cols == 0) return Eigen::MatrixXd(rows, 0);
  if (cols >= rows) throw ValidationError("audit grid is too short for the trend model");
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r)
      a(r, c) = std::pow(lambdas[static_cast<std::size_t>(r)], exponents[static_cast<std::size_t>(c)]);
    a.col(c).normalize();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

std::vector<double> project_out(const Eigen::MatrixXd& q, const std::vector<double>& x) {
  if (q.cols() == 0) return x;
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd p = v - q * (q.transpose() * v);
  return {p.data(), p.data() + p.size()};
}

}  // namespace

void AuditConfig::validate() const {
  if (order < 0) throw ValidationError("audit order must be >= 0");
  if (order == 0 && !allow_order_zero)
    throw ValidationError("audit order 0 is rejected: its residual carries the full Weyl remainder");
  grid.validate();
  if (grid.size() < 3) throw ValidationError("audit grid needs at least 3 points");
  if (!(grid.start > 0.0)) throw ValidationError("audit grid must start above 0");
  if (!(threshold > 0.0)) throw ValidationError("threshold must be positive");
  if (max_anomalies < 1) throw ValidationError("max_anomalies must be >= 1");
  baseline.validate();
  const GridSpec c = candidate_grid();
  c.validate();
  const double last = c.at(c.size() - 1);
  if (!(c.start > grid.start) || last > grid.stop - 10 * grid.step + 1e-9 * grid.step)
    throw ValidationError("candidate grid " + c.to_string() + " must lie inside (" + format_double(grid.start) +
                          ", " + format_double(grid.stop - 10 * grid.step) + "]");
}

GridSpec AuditConfig::candidate_grid() const { return candidates ? *candidates : default_candidates(grid); }

GridSpec default_candidates(const GridSpec& grid) {
  grid.validate();
  const double margin = std::max(10 * grid.step, 0.25 * (grid.stop - grid.start));
  return {grid.start + grid.step, grid.stop - margin, grid.step};
}

AuditConfig default_audit_config(const WeylCoefficients& baseline, double start, double stop) {
  AuditConfig c;
  c.grid = {start, stop, kDefaultStep};
  c.baseline = baseline;
  return c;
}

const char* to_string(DefectSign sign) { return sign == DefectSign::missing ? "missing" : "extra"; }

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::clean: return "clean";
    case Verdict::anomalies_found: return "anomalies-found";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::vector<ResidualPoint> residual_series(const Spectrum& spectrum, const WeylCoefficients& coeffs, int order,
                                           const GridSpec& grid) {
  grid.validate();
  if (order < 0) throw ValidationError("order must be >= 0");
  const PrefixPowerSums sums(spectrum, order);
  const RieszPrediction prediction = riesz_transform_coeffs(coeffs, order);
  std::vector<ResidualPoint> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double lambda = grid.at(i);
    out[i] = {lambda, riesz_mean(sums, {order, lambda}) - predict_riesz(prediction, lambda)};
  }
  return out;
}

AuditReport detect_defects(const Spectrum& spectrum, const AuditConfig& config) {
  config.validate();
  AuditReport report;
  report.config = config;
  report.residual = residual_series(spectrum, config.baseline, config.order, config.grid);

  const std::size_t n = report.residual.size();
  std::vector<double> lambdas(n);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    lambdas[i] = report.residual[i].lambda;
    r[i] = report.residual[i].residual;
  }

  const Eigen::MatrixXd q = trend_basis(config.baseline, lambdas);
  const GridSpec cand = config.candidate_grid();
  const std::size_t m = cand.size();
  const int k = config.order;

  auto template_of = [&](double mu) {
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (lambdas[i] > mu) g[i] = -ipow(1.0 - mu / lambdas[i], k);
    return g;
  };

  // Projected templates are recomputed on demand; only their norms are cached.
  std::vector<double> norm2(m);
  parallel_for(m, [&](std::size_t j) {
    const std::vector<double> pg = project_out(q, template_of(cand.at(j)));
    norm2[j] = dot(pg, pg);
  });

  std::vector<double> work = project_out(q, r);
  std::vector<double> corr(m);
  for (std::size_t iter = 0; iter < config.max_anomalies; ++iter) {
    parallel_for(m, [&](std::size_t j) {
      // work is already trend-free, so <work, P g> = <work, g>.
      corr[j] = dot(work, template_of(cand.at(j)));
    });
    std::size_t best = m;
    double best_z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!(norm2[j] > 0.0)) continue;
      const double z = std::abs(corr[j]) / std::sqrt(norm2[j]);
      if (z > best_z) {
        best_z = z;
        best = j;
      }
    }
    if (best == m) break;
    const double amplitude = corr[best] / norm2[best];
    if (!(std::abs(amplitude) > config.threshold)) break;
    report.anomalies.push_back({cand.at(best), amplitude > 0 ? DefectSign::missing : DefectSign::extra,
                                std::abs(amplitude), best_z});
    const std::vector<double> pg = project_out(q, template_of(cand.at(best)));
    for (std::size_t i = 0; i < n; ++i) work[i] -= amplitude * pg[i];
  }
  std::stable_sort(report.anomalies.begin(), report.anomalies.end(),
                   [](const Anomaly& a, const Anomaly& b) { return a.score > b.score; });

  ResidualStats& s = report.stats;
  s.points = n;
  NeumaierSum sq;
  for (double v : r) {
    s.max_abs = std::max(s.max_abs, std::abs(v));
    sq.add(v * v);
  }
  s.rms = std::sqrt(sq.value() / static_cast<double>(n));
  s.median_abs = median_abs(r);
  s.noise_floor = median_abs(work);
  const double mid = (config.grid.start + config.grid.stop) / 2;
  s.unit_response = ipow(1.0 - config.grid.start / mid, k);

  if (s.noise_floor > s.unit_response) {
    report.verdict = Verdict::inconclusive;
  } else {
    report.verdict = report.anomalies.empty() ? Verdict::clean : Verdict::anomalies_found;
  }
  return report;
}

Certificate completeness_certificate(const Spectrum& spectrum, const WeylCoefficients& coeffs, double start,
                                     double stop) {
  Certificate c;
  if (!(stop - start >= kMinGridSteps * kDefaultStep)) {
    c.verdict = Verdict::inconclusive;
    c.summary = "inconclusive: range [" + format_double(start) + ", " + format_double(stop) +
                "] is shorter than " + std::to_string(kMinGridSteps) + " grid steps of " +
                format_double(kDefaultStep);
    return c;
  }
  c.report = detect_defects(spectrum, default_audit_config(coeffs, start, stop));
  const AuditReport& r = *c.report;
  c.verdict = r.verdict;
  std::ostringstream out;
  out << to_string(r.verdict) << ": ";
  if (r.verdict == Verdict::inconclusive) {
    out << "residual noise floor " << format_double(r.stats.noise_floor) << " exceeds the unit-jump response "
        << format_double(r.stats.unit_response);
  } else if (r.anomalies.empty()) {
    out << "no defect of amplitude above " << format_double(r.config.threshold) << " on ["
        << format_double(start) << ", " << format_double(stop) << "]";
  } else {
    out << r.anomalies.size() << " defect(s);";
    for (const auto& a : r.anomalies)
      out << ' ' << to_string(a.sign) << " near " << format_double(a.location) << " (amplitude "
          << format_double(a.amplitude) << ")";
  }
  c.summary = out.str();
  return c;
}

std::string format_report(const AuditReport& report) {
  std::ostringstream out;
  const AuditConfig& c = report.config;
  out << "[config]\n";
  out << "order = " << c.order << '\n';
  out << "grid = " << c.grid.to_string() << '\n';
  out << "candidates = " << c.candidate_grid().to_string() << '\n';
  out << "threshold = " << format_double(c.threshold) << '\n';
  out << "max_anomalies = " << c.max_anomalies << '\n';
  out << "dimension = " << c.baseline.dimension << '\n';
  out << "closed = " << (c.baseline.closed ? "yes" : "no") << '\n';
  for (std::size_t i = 0; i < c.baseline.values.size(); ++i)
    out << "coefficient = " << i << ' ' << c.baseline.exponent(i) << ' ' << format_double(c.baseline.values[i])
        << ' ' << to_string(c.baseline.provenance[i]) << '\n';
  out << "\n[residual]\n";
  const ResidualStats& s = report.stats;
  out << "points = " << s.points << '\n';
  out << "max_abs = " << format_double(s.max_abs) << '\n';
  out << "median_abs = " << format_double(s.median_abs) << '\n';
  out << "rms = " << format_double(s.rms) << '\n';
  out << "noise_floor = " << format_double(s.noise_floor) << '\n';
  out << "unit_response = " << format_double(s.unit_response) << '\n';
  out << "\n[anomalies]\n";
  out << "# location sign amplitude score\n";
  for (const auto& a : report.anomalies)
    out << format_double(a.location) << ' ' << to_string(a.sign) << ' ' << format_double(a.amplitude) << ' '
        << format_double(a.score) << '\n';
  out << "\n[verdict]\n";
  out << "verdict = " << to_string(report.verdict) << '\n';
  return out.str();
}

void write_residual(std::ostream& out, const std::vector<ResidualPoint>& residual) {
  for (const auto& p : residual) out << format_double(p.lambda) << ' ' << format_double(p.residual) << '\n';
}

}  // namespace specaudit
