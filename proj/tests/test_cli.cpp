#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cli.hpp"
#include "specaudit/counting.hpp"
#include "specaudit/io.hpp"
#include "specaudit/spectrum.hpp"
#include "support.hpp"

using namespace specaudit;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Data lines (no '#' comments) as "x y" pairs.
std::vector<std::pair<double, double>> columns(const std::string& text) {
  std::vector<std::pair<double, double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double a = 0, b = 0;
    ls >> a >> b;
    rows.emplace_back(a, b);
  }
  return rows;
}

const std::string kSide = "6.283185307179586";

}  // namespace

TEST_CASE("gen torus writes the lattice spectrum") {
  testing::TempDir dir("cli");
  const auto path = dir.file("torus.spec");
  const auto r = run({"gen", "torus", "--dim", "2", "--side", kSide, "--lmax", "100", "-o", path});
  REQUIRE(r.code == cli::kExitOk);
  const auto s = load_spectrum(path);
  CHECK(s.lambda_max() == 100.0);
  CHECK(s.total_multiplicity() == counting_function(testing::square_torus(100.0), 100.0));
  CHECK(read_file(path).rfind("# specaudit gen torus", 0) == 0);
}

TEST_CASE("gen sphere") {
  testing::TempDir dir("cli");
  const auto path = dir.file("s2.spec");
  REQUIRE(run({"gen", "sphere", "--dim", "2", "--lmax", "2.5", "-o", path}).code == 0);
  CHECK(load_spectrum(path).entries() == std::vector<SpectralEntry>{{0, 1}, {std::sqrt(2.0), 3}, {std::sqrt(6.0), 5}});
}

TEST_CASE("count and riesz") {
  testing::TempDir dir("cli");
  const auto spec = dir.file("t.spec");
  REQUIRE(run({"gen", "torus", "--dim", "2", "--side", kSide, "--lmax", "200", "-o", spec}).code == 0);
  const auto s = load_spectrum(spec);

  const auto out = dir.file("r1.dat");
  REQUIRE(run({"riesz", "--k", "1", "--grid", "20:200:0.5", "-i", spec, "-o", out}).code == 0);
  const auto rows = columns(read_file(out));
  REQUIRE(rows.size() == 361);
  for (const auto& [lambda, value] : rows) CHECK(value == doctest::Approx(riesz_direct(s, {1, lambda})).epsilon(1e-12));

  const auto c = run({"count", "--grid", "0:2.5:0.5", "-i", spec});
  REQUIRE(c.code == 0);
  const auto crows = columns(c.out);
  REQUIRE(crows.size() == 6);
  CHECK(crows.back().second == 21);
}

TEST_CASE("plain input") {
  testing::TempDir dir("cli");
  const auto path = dir.file("plain.txt");
  write_file_atomic(path, "# eigenvalues\n4 1\n1 2\n");
  CHECK(run({"count", "-i", path, "--grid", "0:3:1"}).code == cli::kExitInvalid);
  const auto r = run({"count", "-i", path, "--lmax", "3", "--unit", "eigenvalue", "--grid", "0:3:1"});
  REQUIRE(r.code == 0);
  const auto rows = columns(r.out);
  CHECK(rows[2].second == 2);
  CHECK(rows[3].second == 3);
}

TEST_CASE("audit reports a removed eigenvalue") {
  testing::TempDir dir("cli");
  const auto spec = dir.file("missing.spec");
  save_spectrum(perturb(testing::square_torus(100.0), Perturbation::remove_one, 25.0), spec);
  const auto report = dir.file("report.txt");
  const auto r = run({"audit", "--k", "1", "--coeffs", "torus", "--grid", "20:100:0.1", "-i", spec, "-o", report});
  REQUIRE(r.code == 0);
  const std::string text = read_file(report);
  CHECK(text.find("verdict = anomalies-found") != std::string::npos);
  const auto section = text.substr(text.find("[anomalies]"));
  const auto rows = columns(section.substr(section.find('\n') + 1));
  REQUIRE(!rows.empty());
  CHECK(std::abs(rows[0].first - 25.0) <= 1.0);
  CHECK(section.find(" missing ") != std::string::npos);
  CHECK(r.out.find("verdict: anomalies-found") != std::string::npos);
}

TEST_CASE("audit with a coefficient file and fitting") {
  testing::TempDir dir("cli");
  const auto spec = dir.file("s2.spec");
  REQUIRE(run({"gen", "sphere", "--dim", "2", "--lmax", "120", "-o", spec}).code == 0);
  const auto r = run({"audit", "--coeffs", "sphere", "--dim", "2", "--fit-grid", "30:110:0.25", "--grid", "30:110:0.1",
                      "-i", spec});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("fitted") != std::string::npos);
  CHECK(run({"audit", "--coeffs", dir.file("missing.coeffs"), "--grid", "30:110:0.1", "-i", spec}).code ==
        cli::kExitInvalid);
}

TEST_CASE("mollify") {
  testing::TempDir dir("cli");
  const auto spec = dir.file("t.spec");
  REQUIRE(run({"gen", "torus", "--dim", "2", "--side", kSide, "--lmax", "120", "-o", spec}).code == 0);
  CHECK(run({"mollify", "--kernel", "plateau", "--scale", "8", "--grid", "20:40:1", "-i", spec}).code == 0);
  const auto far = run({"mollify", "--kernel", "plateau", "--scale", "1", "--grid", "20:40:1", "-i", spec});
  CHECK(far.code == cli::kExitIncomplete);
  CHECK(run({"mollify", "--kernel", "plateau", "--scale", "1", "--grid", "20:40:1", "--allow-incomplete", "-i", spec})
            .code == 0);
  const auto d = run({"mollify", "--kernel", "nonneg", "--mode", "density", "--scale", "8", "--grid", "20:40:1", "-i",
                      spec});
  REQUIRE(d.code == 0);
  for (const auto& row : columns(d.out)) CHECK(row.second >= 0.0);
  CHECK(run({"mollify", "--kernel", "plateau", "--mode", "gap", "--scale", "8", "--grid", "20:40:1", "-i", spec})
            .code == 0);
}

TEST_CASE("wavetrace and kernel export") {
  testing::TempDir dir("cli");
  const auto spec = dir.file("t.spec");
  REQUIRE(run({"gen", "torus", "--dim", "2", "--side", kSide, "--lmax", "100", "-o", spec}).code == 0);
  const auto peaks = dir.file("peaks.txt");
  REQUIRE(run({"wavetrace", "--center", "40", "--width", "10", "-i", spec, "-o", dir.file("trace.dat"),
               "--peaks-output", peaks})
              .code == 0);
  const auto rows = columns(read_file(peaks));
  REQUIRE(rows.size() == 3);
  CHECK(std::abs(rows[0].first - two_pi) <= 0.05);

  CHECK(run({"wavetrace", "--center", "90", "--width", "10", "-i", spec}).code == cli::kExitIncomplete);

  const auto k = run({"kernel", "--kind", "nonneg", "--stride", "1000"});
  REQUIRE(k.code == 0);
  CHECK(k.out.find("# kernel nonneg") != std::string::npos);
}

TEST_CASE("invalid invocations") {
  CHECK(run({}).code == cli::kExitInvalid);
  CHECK(run({"frobnicate"}).code == cli::kExitInvalid);
  CHECK(run({"count", "-i", "/nonexistent/file", "--grid", "0:1:1"}).code == cli::kExitInvalid);
  CHECK(run({"riesz", "--grid", "1:2", "-i", "x"}).code == cli::kExitInvalid);
  CHECK(run({"gen", "torus", "--lmax", "10", "-o", "/tmp/x", "--bogus"}).code == cli::kExitInvalid);
  const auto e = run({"count", "-i", "/nonexistent/file", "--grid", "0:1:1"});
  CHECK(!e.err.empty());
  CHECK(e.err.find('\n') == e.err.size() - 1);
}

TEST_CASE("outputs are reproducible") {
  testing::TempDir dir("cli");
  const auto spec = dir.file("t.spec");
  REQUIRE(run({"gen", "torus", "--dim", "2", "--side", kSide, "--lmax", "100", "-o", spec}).code == 0);
  const std::vector<std::string> args = {"audit", "--coeffs", "torus", "--grid", "20:100:0.1", "-i", spec};
  CHECK(run(args).out == run(args).out);
}
