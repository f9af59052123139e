#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "specaudit/audit.hpp"
#include "specaudit/counting.hpp"
#include "specaudit/error.hpp"
#include "support.hpp"

using namespace specaudit;

namespace {

const Spectrum& torus100() {
  static const Spectrum s = testing::square_torus(100.0);
  return s;
}

WeylCoefficients torus_coeffs() { return torus_coefficients(2, 4 * pi * pi); }

AuditConfig config(double stop = 100.0) {
  return default_audit_config(torus_coeffs(), 20.0, stop);
}

}  // namespace

TEST_CASE("residual series") {
  const auto s = testing::square_torus(200.0);
  double worst = 0.0;
  for (const auto& p : residual_series(s, torus_coeffs(), 1, GridSpec{20, 200, 0.1}))
    worst = std::max(worst, std::abs(p.residual));
  CHECK(worst <= 1.0);

  WeylCoefficients zero = torus_coeffs();
  zero.values[0] = 0.0;
  for (const auto& p : residual_series(s, zero, 1, GridSpec{20, 30, 0.5}))
    CHECK(p.residual == doctest::Approx(riesz_direct(s, {1, p.lambda})).epsilon(1e-12));

  const auto empty = Spectrum::from_frequencies({}, 50.0);
  for (const auto& p : residual_series(empty, zero, 1, GridSpec{1, 50, 1})) CHECK(p.residual == 0.0);

  CHECK_THROWS_AS(residual_series(torus100(), torus_coeffs(), 1, GridSpec{20, 150, 1}), CompletenessError);
}

TEST_CASE("intact torus is clean") {
  const auto r = detect_defects(torus100(), config());
  CHECK(r.verdict == Verdict::clean);
  CHECK(r.anomalies.empty());
  CHECK(r.stats.points == 801);
}

TEST_CASE("single missing and extra eigenvalue") {
  for (auto action : {Perturbation::remove_one, Perturbation::add_one}) {
    const auto s = perturb(torus100(), action, 25.0);
    const auto r = detect_defects(s, config());
    REQUIRE(r.anomalies.size() == 1);
    const auto& a = r.anomalies[0];
    CHECK(a.sign == (action == Perturbation::remove_one ? DefectSign::missing : DefectSign::extra));
    CHECK(std::abs(a.location - 25.0) <= 1.0);
    CHECK(a.amplitude >= 0.5);
    CHECK(a.amplitude <= 1.5);
    // Linear response with an exact baseline.
    CHECK(a.amplitude == doctest::Approx(1.0).epsilon(0.1));
    CHECK(r.verdict == Verdict::anomalies_found);
  }
}

TEST_CASE("evidence grows with the grid") {
  const auto s = perturb(torus100(), Perturbation::remove_one, 25.0);
  double prev = 0.0;
  for (double stop : {60.0, 70.0, 80.0, 90.0, 100.0}) {
    auto c = config(stop);
    c.candidates = GridSpec{25, 25, 0.1};
    const auto r = detect_defects(s, c);
    REQUIRE(r.anomalies.size() == 1);
    CHECK(r.anomalies[0].score >= prev);
    prev = r.anomalies[0].score;
  }
}

TEST_CASE("reports are deterministic") {
  const auto s = perturb(torus100(), Perturbation::remove_one, 25.0);
  CHECK(format_report(detect_defects(s, config())) == format_report(detect_defects(s, config())));
}

TEST_CASE("certificates") {
  const auto clean = completeness_certificate(torus100(), torus_coeffs(), 20.0, 100.0);
  CHECK(clean.verdict == Verdict::clean);
  CHECK(clean.summary.rfind("clean", 0) == 0);

  const auto missing = completeness_certificate(perturb(torus100(), Perturbation::remove_one, 25.0), torus_coeffs(),
                                                20.0, 100.0);
  CHECK(missing.verdict == Verdict::anomalies_found);
  CHECK(missing.summary.find("missing near 25") != std::string::npos);

  const auto short_range = completeness_certificate(torus100(), torus_coeffs(), 20.0, 21.5);
  CHECK(short_range.verdict == Verdict::inconclusive);
  CHECK(!short_range.report);

  // A baseline that misses the leading term leaves a residual far above one jump.
  WeylCoefficients wrong = torus_coeffs();
  wrong.values[0] = 2.5;
  CHECK(completeness_certificate(torus100(), wrong, 20.0, 100.0).verdict == Verdict::inconclusive);
}

TEST_CASE("configuration checks") {
  auto c = config();
  c.order = 0;
  CHECK_THROWS_AS(detect_defects(torus100(), c), ValidationError);
  c.allow_order_zero = true;
  CHECK_NOTHROW(detect_defects(torus100(), c));

  c = config();
  c.candidates = GridSpec{10, 50, 0.1};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.candidates = GridSpec{30, 99.5, 0.1};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = config();
  c.threshold = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = config();
  c.grid = GridSpec{20, 20.1, 0.1};
  CHECK_THROWS_AS(c.validate(), ValidationError);

  const auto d = default_candidates(GridSpec{20, 100, 0.1});
  CHECK(d.start == doctest::Approx(20.1));
  CHECK(d.stop == doctest::Approx(80.0));
}

TEST_CASE("unknown trend terms are projected out") {
  // Unknown A_0: the leading trend is absorbed, the defect still shows.
  WeylCoefficients c = torus_coeffs();
  c.provenance[0] = Provenance::unknown;
  c.values[0] = 3.0;
  auto cfg = default_audit_config(c, 20.0, 100.0);
  const auto r = detect_defects(perturb(torus100(), Perturbation::remove_one, 25.0), cfg);
  REQUIRE(!r.anomalies.empty());
  CHECK(std::abs(r.anomalies[0].location - 25.0) <= 1.0);
  CHECK(r.anomalies[0].sign == DefectSign::missing);
}
