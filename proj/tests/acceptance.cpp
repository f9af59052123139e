// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "specaudit/audit.hpp"
#include "specaudit/counting.hpp"
#include "specaudit/grid.hpp"
#include "specaudit/io.hpp"
#include "specaudit/mollify.hpp"
#include "specaudit/models.hpp"
#include "specaudit/parallel.hpp"
#include "specaudit/wavetrace.hpp"
#include "specaudit/weyl.hpp"
#include "support.hpp"

using namespace specaudit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const Kernel& plateau() {
  static const Kernel k = build_plateau_kernel();
  return k;
}

const Kernel& nonneg() {
  static const Kernel k = build_nonneg_kernel();
  return k;
}

// 1. riesz_mean vs riesz_direct (1e-9 rel), riesz_via_integral (1e-10 rel), < 30 s.
Outcome riesz_oracles() {
  const auto t0 = Clock::now();
  const auto s = testing::square_torus(300.0);
  const PrefixPowerSums sums(s, 3);
  std::mt19937_64 rng(testing::kSeed);
  std::uniform_real_distribution<double> pick(1e-3, 300.0);
  double worst_fast = 0.0;
  double worst_integral = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double lambda = pick(rng);
    for (int k = 0; k <= 3; ++k) {
      const double direct = riesz_direct(s, {k, lambda});
      const double scale = std::max(std::abs(direct), 1e-300);
      worst_fast = std::max(worst_fast, std::abs(riesz_mean(sums, {k, lambda}) - direct) / scale);
      if (k >= 1) worst_integral = std::max(worst_integral, std::abs(riesz_via_integral(s, {k, lambda}) - direct) / scale);
    }
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "lattice points " << s.total_multiplicity() << ", max rel fast " << fmt(worst_fast) << " (<= 1e-9), integral "
    << fmt(worst_integral) << " (<= 1e-10), " << fmt(elapsed) << " s (< 30)";
  return {worst_fast <= 1e-9 && worst_integral <= 1e-10 && elapsed < 30.0, d.str()};
}

// 2. Exact rational coefficient identities.
Outcome coefficient_identities() {
  const Rational factor = riesz_factor(2, 0, 1);
  const ExactLeading a0 = leading_coefficient_exact(2);  // A_0 / Vol
  const Rational r1 = a0.rational * factor;
  const bool pass = factor == Rational(1, 3) && a0.rational == Rational(1, 4) && a0.pi_power == -1 &&
                    r1 == Rational(1, 12);
  std::ostringstream d;
  d << "factor(d=2,k=1,i=0) = " << factor.to_string() << ", A_0 = " << a0.rational.to_string() << " Vol pi^"
    << a0.pi_power << ", R_1 leading = " << r1.to_string() << " Vol pi^" << a0.pi_power;
  return {pass, d.str()};
}

// 3. |N(lambda) - pi lambda^2| <= lambda at every jump point lambda <= 200.
Outcome gauss_circle() {
  const auto t0 = Clock::now();
  const auto s = testing::square_torus(200.5);
  const auto oracle = testing::lattice_norms(200 * 200 + 1);
  bool oracle_ok = oracle.size() == s.count_below_index(200.0) + 1;
  std::int64_t below = 0;
  std::size_t i = 0;
  std::vector<double> violations;
  double worst_ratio = 0.0;
  for (const auto& [n2, count] : oracle) {
    const double lambda = std::sqrt(static_cast<double>(n2));
    const auto& e = s.entries()[i];
    oracle_ok = oracle_ok && e.multiplicity == count && e.frequency == lambda;
    const std::int64_t n = counting_function(s, e.frequency);
    oracle_ok = oracle_ok && n == below;
    below += count;
    ++i;
    if (lambda == 0.0) continue;
    const double dev = std::abs(static_cast<double>(n) - pi * lambda * lambda);
    worst_ratio = std::max(worst_ratio, dev / lambda);
    if (dev > lambda) violations.push_back(lambda);
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "enumeration oracle " << (oracle_ok ? "agrees" : "DISAGREES") << "; " << violations.size()
    << " jump points violate the bound";
  if (!violations.empty()) {
    d << " (all at lambda <= " << fmt(violations.back()) << ", e.g. N(1) = 1 vs pi; first:";
    for (std::size_t j = 0; j < std::min<std::size_t>(5, violations.size()); ++j) d << ' ' << fmt(violations[j]);
    d << ")";
  }
  d << ", max |N - pi l^2| / l = " << fmt(worst_ratio) << ", " << fmt(elapsed) << " s (< 10)";
  return {oracle_ok && violations.empty() && elapsed < 10.0, d.str()};
}

// 4. |N * rho_1(lambda) - pi lambda^2| <= 1e-2 at 50, 100, 150; band maxima ordered.
Outcome mollified_flatness() {
  const auto t0 = Clock::now();
  const auto s = testing::square_torus(800.0);
  const ScaledKernel rho{plateau(), 1.0};
  bool pass = true;
  std::ostringstream d;
  const testing::PhiOracle phi;
  double worst_oracle = 0.0;
  for (double lambda : {50.0, 100.0, 150.0}) {
    const auto v = convolve_counting(s, rho, lambda);
    const double dev = std::abs(v.value - pi * lambda * lambda);
    long double ref = 0.0L;
    for (const auto& e : s.entries()) ref += e.multiplicity * phi(static_cast<long double>(lambda) - e.frequency);
    const double gap = std::abs(v.value - static_cast<double>(ref));
    worst_oracle = std::max(worst_oracle, gap);
    pass = pass && v.complete && dev <= 1e-2;
    d << "dev(" << lambda << ") = " << fmt(dev) << ", ";
  }
  // Truncation error allowed by the tail bound.
  const double allowed = static_cast<double>(s.total_multiplicity()) * plateau().tail_bound();
  pass = pass && worst_oracle <= allowed;

  auto band_max = [&](double lo, double hi) {
    double m = 0.0;
    for (double lambda : GridSpec{lo, hi, 0.25}.points())
      m = std::max(m, std::abs(convolve_counting(s, rho, lambda).value - pi * lambda * lambda));
    return m;
  };
  const double low = band_max(50, 100);
  const double high = band_max(100, 150);
  pass = pass && high <= low;
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < 60.0;
  d << "direct-sum oracle gap " << fmt(worst_oracle) << " (<= " << fmt(allowed) << "), band max [100,150] "
    << fmt(high) << " <= [50,100] " << fmt(low) << ", " << fmt(elapsed) << " s (< 60)";
  return {pass, d.str()};
}

// 5. Kernel contract.
Outcome kernel_contract() {
  const Kernel& p = plateau();
  const auto& dg = p.diagnostics();
  bool pass = std::abs(dg.mass - 1.0) <= 1e-8 && dg.evenness_error <= 1e-12;
  double worst_moment = 0.0;
  for (std::size_t j = 1; j <= 5; ++j) worst_moment = std::max(worst_moment, std::abs(dg.moments[j]));
  pass = pass && worst_moment <= 1e-8;

  const Kernel& n = nonneg();
  // plateau_fourier is 1 on the support of the nonneg kernel's transform.
  bool reproducing = true;
  for (int i = -2048; i <= 2048; ++i) {
    const double xi = i / 1024.0;
    reproducing = reproducing && plateau_fourier(xi) * n.fourier(xi) == n.fourier(xi);
  }
  bool positive = true;
  for (double v : n.samples()) positive = positive && v >= 0.0;

  const Kernel t = tauberian_kernel(n);
  double worst_fourier = 0.0;
  for (double xi : {0.1, 0.2, 0.3}) {
    const double e = 1e-3;
    const double fd =
        (n.fourier(xi - 2 * e) - 8 * n.fourier(xi - e) + 8 * n.fourier(xi + e) - n.fourier(xi + 2 * e)) / (12 * e);
    worst_fourier = std::max(worst_fourier, std::abs(table_fourier(t, xi) + fd / xi));
  }
  pass = pass && reproducing && positive && worst_fourier <= 1e-6;
  std::ostringstream d;
  d << "mass-1 " << fmt(dg.mass - 1.0) << ", max |moment 1..5| " << fmt(worst_moment) << ", evenness "
    << fmt(dg.evenness_error) << ", reproducing identity " << (reproducing ? "exact" : "BROKEN") << ", nonneg min "
    << fmt(n.diagnostics().min_value) << ", tauberian Fourier error " << fmt(worst_fourier) << " (<= 1e-6)";
  return {pass, d.str()};
}

// 6. Tauberian gap max over [20, 100]: T = 16 at most 0.75 x T = 8.
Outcome tauberian_trend() {
  const auto s = testing::square_torus(200.0);
  const GridSpec grid{20, 100, 0.1};
  auto max_gap = [&](double scale) {
    double m = 0.0;
    for (const auto& p : tauberian_gap_check(s, ScaledKernel{plateau(), scale}, grid)) m = std::max(m, std::abs(p.gap));
    return m;
  };
  const double g8 = max_gap(8.0);
  const double g16 = max_gap(16.0);
  std::ostringstream d;
  d << "max gap T=8 " << fmt(g8) << ", T=16 " << fmt(g16) << ", ratio " << fmt(g16 / g8) << " (<= 0.75)";
  return {g16 <= 0.75 * g8, d.str()};
}

// 7. Drop-one audit at 25 on the torus with lambda_max = 100.
Outcome drop_one_audit() {
  const auto t0 = Clock::now();
  const auto s = testing::square_torus(100.0);
  const auto cfg = default_audit_config(torus_coefficients(2, 4 * pi * pi), 20.0, 100.0);
  const auto clean = detect_defects(s, cfg);
  const auto hit = detect_defects(perturb(s, Perturbation::remove_one, 25.0), cfg);
  bool pass = clean.verdict == Verdict::clean && hit.anomalies.size() == 1;
  std::ostringstream d;
  d << "intact verdict " << to_string(clean.verdict) << ", perturbed: " << hit.anomalies.size() << " anomaly";
  if (hit.anomalies.size() == 1) {
    const Anomaly& a = hit.anomalies[0];
    pass = pass && a.sign == DefectSign::missing && std::abs(a.location - 25.0) <= 1.0 && a.amplitude >= 0.5 &&
           a.amplitude <= 1.5;
    d << " (" << to_string(a.sign) << " at " << fmt(a.location) << ", amplitude " << fmt(a.amplitude) << ")";
  }
  const double elapsed = seconds_since(t0);
  d << ", " << fmt(elapsed) << " s (< 60)";
  return {pass && elapsed < 60.0, d.str()};
}

// 8. Wave-trace peaks at 2 pi, 2 pi sqrt 2, 4 pi; nothing above 10% of the lead on [1, 5].
Outcome length_spectrum() {
  const auto s = testing::square_torus(100.0);
  const auto tr = spectral_wave_trace(s, Window{WindowShape::gaussian, 40.0, 10.0}, GridSpec{1, 15, 0.01});
  const auto peaks = detect_length_peaks(tr, 1.0, 3);
  const auto lengths = torus_geodesic_lengths(FlatTorus::cubic(2, two_pi), 15.0);
  bool pass = peaks.size() == 3 && lengths.size() >= 3;
  std::ostringstream d;
  d << "peaks";
  double worst = 0.0;
  for (std::size_t i = 0; i < peaks.size() && i < lengths.size(); ++i) {
    worst = std::max(worst, std::abs(peaks[i].t - lengths[i].length));
    d << ' ' << fmt(peaks[i].t);
  }
  pass = pass && worst <= 0.05;
  double lead = 0.0;
  double early = 0.0;
  for (std::size_t i = 0; i < tr.values.size(); ++i) {
    const double t = tr.t_grid.at(i);
    lead = std::max(lead, std::abs(tr.values[i]));
    if (t <= 5.0) early = std::max(early, std::abs(tr.values[i]));
  }
  pass = pass && early <= 0.1 * lead;
  d << ", max offset " << fmt(worst) << " (<= 0.05), max |F| on [1,5] / lead = " << fmt(early / lead)
    << " (<= 0.1)";
  return {pass, d.str()};
}

// 9. Sphere: N = L^2 for lambda <= 100, riesz_mean == riesz_direct within 1e-9.
Outcome sphere_exactness() {
  const auto s = sphere_spectrum(RoundSphere{2}, 100.0);
  auto closed_form = [](double lambda) {
    std::int64_t l = 0;
    while (std::sqrt(static_cast<double>(l * (l + 1))) < lambda) ++l;
    return l * l;
  };
  std::vector<double> probes{100.0};
  for (std::size_t i = 0; i < s.size(); ++i) {
    probes.push_back(s.entries()[i].frequency);
    probes.push_back(std::nextafter(s.entries()[i].frequency, 200.0));
    if (i + 1 < s.size()) probes.push_back((s.entries()[i].frequency + s.entries()[i + 1].frequency) / 2);
  }
  std::mt19937_64 rng(testing::kSeed);
  std::uniform_real_distribution<double> pick(0.0, 100.0);
  for (int i = 0; i < 10000; ++i) probes.push_back(pick(rng));
  std::size_t mismatches = 0;
  for (double lambda : probes)
    if (counting_function(s, lambda) != closed_form(lambda)) ++mismatches;

  const PrefixPowerSums sums(s, 3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double lambda = std::max(pick(rng), 1e-6);
    for (int k = 0; k <= 3; ++k) {
      const double direct = riesz_direct(s, {k, lambda});
      worst = std::max(worst, std::abs(riesz_mean(sums, {k, lambda}) - direct) / direct);
    }
  }
  std::ostringstream d;
  d << probes.size() << " probes, " << mismatches << " mismatches with L^2; riesz max rel " << fmt(worst)
    << " (<= 1e-9)";
  return {mismatches == 0 && worst <= 1e-9, d.str()};
}

// 10. Outputs of 1, 7 and 8 are byte-identical across thread counts.
Outcome determinism() {
  testing::TempDir dir("acceptance");
  const std::string side = "6.283185307179586";
  const auto missing = dir.file("torus100_missing25.spec");
  save_spectrum(perturb(testing::square_torus(100.0), Perturbation::remove_one, 25.0), missing);

  const std::vector<std::vector<std::string>> commands = {
      {"gen", "torus", "--dim", "2", "--side", side, "--lmax", "300", "-o", dir.file("torus300.spec")},
      {"riesz", "--k", "0", "--grid", "0.5:300:0.25", "-i", dir.file("torus300.spec"), "-o", dir.file("r0.dat")},
      {"riesz", "--k", "1", "--grid", "0.5:300:0.25", "-i", dir.file("torus300.spec"), "-o", dir.file("r1.dat")},
      {"riesz", "--k", "2", "--grid", "0.5:300:0.25", "-i", dir.file("torus300.spec"), "-o", dir.file("r2.dat")},
      {"riesz", "--k", "3", "--grid", "0.5:300:0.25", "-i", dir.file("torus300.spec"), "-o", dir.file("r3.dat")},
      {"gen", "torus", "--dim", "2", "--side", side, "--lmax", "100", "-o", dir.file("torus100.spec")},
      {"audit", "--k", "1", "--coeffs", "torus", "--grid", "20:100:0.1", "-i", missing, "-o",
       dir.file("audit_missing.txt"), "--residual-output", dir.file("residual_missing.dat")},
      {"audit", "--k", "1", "--coeffs", "torus", "--grid", "20:100:0.1", "-i", dir.file("torus100.spec"), "-o",
       dir.file("audit_clean.txt")},
      {"wavetrace", "--window", "gaussian", "--center", "40", "--width", "10", "--tgrid", "1:15:0.01", "-i",
       dir.file("torus100.spec"), "-o", dir.file("trace.dat"), "--peaks-output", dir.file("peaks.txt")},
  };
  const std::vector<std::string> outputs = {"torus300.spec",  "r0.dat",          "r1.dat",
                                            "r2.dat",         "r3.dat",          "torus100.spec",
                                            "audit_missing.txt", "residual_missing.dat", "audit_clean.txt",
                                            "trace.dat",      "peaks.txt"};

  const unsigned many = std::max(4u, std::thread::hardware_concurrency());
  std::map<std::string, std::vector<std::string>> bytes;
  for (const std::string threads : {std::string("1"), std::to_string(many)}) {
    ::setenv(kThreadsEnv, threads.c_str(), 1);
    for (const auto& cmd : commands) {
      std::ostringstream out;
      std::ostringstream err;
      if (cli::run(cmd, out, err) != cli::kExitOk) {
        ::unsetenv(kThreadsEnv);
        return {false, "command '" + cmd[0] + "' failed with " + threads + " threads: " + err.str()};
      }
    }
    for (const auto& name : outputs) bytes[name].push_back(read_file(dir.file(name)));
  }
  ::unsetenv(kThreadsEnv);

  std::size_t differing = 0;
  std::size_t total = 0;
  for (const auto& [name, versions] : bytes) {
    total += versions[0].size();
    if (versions[0] != versions[1]) ++differing;
  }
  std::ostringstream d;
  d << outputs.size() << " files (" << total << " bytes) compared between 1 and " << many << " threads, "
    << differing << " differ";
  return {differing == 0, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"riesz oracle equivalence", riesz_oracles},
      {"coefficient identities", coefficient_identities},
      {"weyl leading term", gauss_circle},
      {"mollified flatness", mollified_flatness},
      {"kernel contract", kernel_contract},
      {"tauberian trend", tauberian_trend},
      {"drop-one audit", drop_one_audit},
      {"length spectrum", length_spectrum},
      {"sphere exactness", sphere_exactness},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << (i + 1) << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << o.detail << " [" << fmt(seconds_since(t0)) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << '/' << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
