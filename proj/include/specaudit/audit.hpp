#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "specaudit/grid.hpp"
#include "specaudit/spectrum.hpp"
#include "specaudit/weyl.hpp"

namespace specaudit {

struct AuditConfig {
  int order = 1;
  GridSpec grid;
  /// Candidate defect locations; defaults to default_candidates(grid).
  std::optional<GridSpec> candidates;
  /// Minimum |amplitude| of a reported defect, in units of one eigenvalue.
  double threshold = 0.5;
  WeylCoefficients baseline;
  /// Order 0 is rejected unless this is set.
  bool allow_order_zero = false;
  std::size_t max_anomalies = 8;

  /// Throws ValidationError on a bad order, degenerate grid, or a candidate grid
  /// that is not inside (grid.start, grid.stop - 10 * grid.step].
  void validate() const;
  GridSpec candidate_grid() const;
};

/// Candidates over (start, stop - max(10 step, (stop - start) / 4)] with the grid step.
GridSpec default_candidates(const GridSpec& grid);
AuditConfig default_audit_config(const WeylCoefficients& baseline, double start, double stop);

enum class DefectSign { missing, extra };
enum class Verdict { clean, anomalies_found, inconclusive };

const char* to_string(DefectSign sign);
const char* to_string(Verdict verdict);

struct Anomaly {
  double location = 0.0;
  DefectSign sign = DefectSign::missing;
  double amplitude = 0.0;  ///< fitted jump size (1 for a single eigenvalue)
  double score = 0.0;      ///< normalized matched-filter statistic
};

struct ResidualPoint {
  double lambda = 0.0;
  double residual = 0.0;
};

struct ResidualStats {
  std::size_t points = 0;
  double max_abs = 0.0;
  double median_abs = 0.0;
  double rms = 0.0;
  /// Median |residual| after trend removal and subtraction of the reported defects.
  double noise_floor = 0.0;
  /// Unit-jump response (1 - start/mid)^k at the middle of the grid.
  double unit_response = 0.0;
};

struct AuditReport {
  AuditConfig config;
  std::vector<ResidualPoint> residual;
  ResidualStats stats;
  std::vector<Anomaly> anomalies;  ///< sorted by score, descending
  Verdict verdict = Verdict::clean;
};

/// r(lambda) = R_k N(lambda) - predict_riesz(riesz_transform_coeffs(coeffs, k), lambda).
std::vector<ResidualPoint> residual_series(const Spectrum& spectrum, const WeylCoefficients& coeffs, int order,
                                           const GridSpec& grid);

/// Matched-filter search for unit jumps in the residual.
///
/// Slow trends lambda^{d-i} for every coefficient not marked known are projected
/// out of the residual and of each template g_mu(lambda) = -(1 - mu/lambda)^k
/// (lambda > mu). The candidate with the largest |<r, g>| / |g| is taken; if its
/// least-squares amplitude exceeds the threshold it is reported and subtracted,
/// and the search repeats. The verdict is inconclusive when the remaining noise
/// floor exceeds the unit-jump response at the grid midpoint.
AuditReport detect_defects(const Spectrum& spectrum, const AuditConfig& config);

struct Certificate {
  Verdict verdict = Verdict::inconclusive;
  std::string summary;
  std::optional<AuditReport> report;
};

/// detect_defects with the default configuration on [start, stop]; ranges shorter
/// than 20 grid steps are inconclusive without running the search.
Certificate completeness_certificate(const Spectrum& spectrum, const WeylCoefficients& coeffs, double start,
                                     double stop);

/// Sections [config], [residual], [anomalies], [verdict].
std::string format_report(const AuditReport& report);
/// Two columns "lambda residual".
void write_residual(std::ostream& out, const std::vector<ResidualPoint>& residual);

}  // namespace specaudit
