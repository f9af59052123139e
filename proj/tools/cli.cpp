#include "cli.hpp"

#include <algorithm>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "specaudit/audit.hpp"
#include "specaudit/counting.hpp"
#include "specaudit/error.hpp"
#include "specaudit/grid.hpp"
#include "specaudit/io.hpp"
#include "specaudit/models.hpp"
#include "specaudit/mollify.hpp"
#include "specaudit/spectrum.hpp"
#include "specaudit/wavetrace.hpp"
#include "specaudit/weyl.hpp"

namespace specaudit::cli {
namespace {

struct InputOptions {
  std::string path;
  std::optional<double> lambda_max;
  std::string unit = "frequency";
  double merge_tol = 0.0;
};

void add_input(CLI::App& cmd, InputOptions& in) {
  cmd.add_option("-i,--input", in.path, "spectrum file (structured or plain)")->required();
  cmd.add_option("--lmax", in.lambda_max, "completeness bound for plain input");
  cmd.add_option("--unit", in.unit, "unit of plain input")->check(CLI::IsMember({"frequency", "eigenvalue"}));
  cmd.add_option("--merge-tol", in.merge_tol, "merge plain-input values closer than this");
}

Spectrum load_input(const InputOptions& in) {
  PlainReadOptions plain;
  plain.lambda_max = in.lambda_max;
  plain.unit = in.unit == "eigenvalue" ? SpectrumUnit::eigenvalue : SpectrumUnit::frequency;
  plain.merge_tol = in.merge_tol;
  return load_spectrum(in.path, plain);
}

GridSpec grid_option(const std::string& text) { return GridSpec::parse(text); }

std::string command_line(const std::vector<std::string>& args) {
  std::string s = "# specaudit";
  for (const auto& a : args) s += " " + a;
  return s + "\n";
}

// Writes `body` (prefixed by the command line) to `path`, or to `out` if empty.
void emit(const std::string& path, const std::vector<std::string>& args, const std::string& body,
          std::ostream& out) {
  const std::string content = command_line(args) + body;
  if (path.empty()) {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

std::optional<std::string> label_field(const std::string& label, const std::string& key) {
  std::istringstream tokens(label);
  std::string token;
  while (tokens >> token)
    if (token.rfind(key + "=", 0) == 0) return token.substr(key.size() + 1);
  return std::nullopt;
}

WeylCoefficients resolve_coefficients(const std::string& name, const Spectrum& spectrum, std::optional<int> dim,
                                      std::optional<double> volume) {
  auto dimension = [&]() {
    if (dim) return *dim;
    if (auto f = label_field(spectrum.label(), "dim")) return static_cast<int>(parse_double(*f));
    throw ValidationError("--coeffs " + name + " needs --dim (the spectrum label has no dim=)");
  };
  if (name == "torus") {
    const int d = dimension();
    double v = 0.0;
    if (volume) {
      v = *volume;
    } else if (auto f = label_field(spectrum.label(), "volume")) {
      v = parse_double(*f);
    } else {
      throw ValidationError("--coeffs torus needs --volume (the spectrum label has no volume=)");
    }
    return torus_coefficients(d, v);
  }
  if (name == "sphere") return sphere_coefficients(dimension());
  return load_coefficients(name);
}

Kernel make_kernel(const std::string& kind, double spacing, std::optional<double> t_cut) {
  if (kind == "plateau") return build_plateau_kernel(spacing, t_cut);
  Kernel nonneg = build_nonneg_kernel(spacing, t_cut);
  if (kind == "nonneg") return nonneg;
  return tauberian_kernel(nonneg);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(parse_double(item));
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counting functions, Riesz means, mollified spectra and eigenvalue-list audits"};
  app.name("specaudit");
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a model spectrum");
  gen->require_subcommand(1);
  std::string gen_output;
  double gen_lmax = 0.0;
  int gen_dim = 2;

  auto* torus = gen->add_subcommand("torus", "flat torus R^d / L Z^d");
  std::optional<double> side;
  std::string sides;
  std::string basis;
  std::uint64_t budget = EnumerationLimits{}.point_budget;
  torus->add_option("--dim", gen_dim, "dimension");
  torus->add_option("--side", side, "cubic lattice side length");
  torus->add_option("--sides", sides, "comma-separated diagonal basis");
  torus->add_option("--basis", basis, "comma-separated d*d basis, row-major; columns generate");
  torus->add_option("--lmax", gen_lmax, "completeness bound")->required();
  torus->add_option("--budget", budget, "lattice candidate budget");
  torus->add_option("-o,--output", gen_output, "output spectrum file")->required();

  auto* sphere = gen->add_subcommand("sphere", "round unit sphere S^d");
  sphere->add_option("--dim", gen_dim, "dimension");
  sphere->add_option("--lmax", gen_lmax, "completeness bound")->required();
  sphere->add_option("-o,--output", gen_output, "output spectrum file")->required();

  // count / riesz
  InputOptions count_in;
  std::string count_grid;
  std::string count_output;
  auto* count = app.add_subcommand("count", "counting function N(lambda) on a grid");
  add_input(*count, count_in);
  count->add_option("--grid", count_grid, "start:stop:step")->required();
  count->add_option("-o,--output", count_output, "two-column output");

  InputOptions riesz_in;
  std::string riesz_grid;
  std::string riesz_output;
  int riesz_k = 1;
  auto* riesz = app.add_subcommand("riesz", "Riesz mean R_k N(lambda) on a grid");
  add_input(*riesz, riesz_in);
  riesz->add_option("--k", riesz_k, "order");
  riesz->add_option("--grid", riesz_grid, "start:stop:step")->required();
  riesz->add_option("-o,--output", riesz_output, "two-column output");

  // mollify
  InputOptions moll_in;
  std::string moll_grid;
  std::string moll_output;
  std::string moll_kernel = "plateau";
  std::string moll_mode = "counting";
  double moll_scale = 1.0;
  double moll_spacing = 1e-3;
  bool moll_allow = false;
  auto* moll = app.add_subcommand("mollify", "N * rho_T, N' * rho_T or the Tauberian gap on a grid");
  add_input(*moll, moll_in);
  moll->add_option("--kernel", moll_kernel)->check(CLI::IsMember({"plateau", "nonneg", "tauberian"}));
  moll->add_option("--mode", moll_mode)->check(CLI::IsMember({"counting", "density", "gap"}));
  moll->add_option("--scale", moll_scale, "T");
  moll->add_option("--grid-spacing", moll_spacing, "kernel table spacing");
  moll->add_option("--grid", moll_grid, "start:stop:step")->required();
  moll->add_flag("--allow-incomplete", moll_allow, "write values whose kernel reach passes lambda_max");
  moll->add_option("-o,--output", moll_output, "two-column output");

  // wavetrace
  InputOptions wave_in;
  std::string wave_tgrid = "0:15:0.01";
  std::string wave_window = "gaussian";
  std::string wave_output;
  std::string wave_peaks_output;
  double wave_center = 0.0;
  double wave_width = 1.0;
  std::size_t wave_peaks = 3;
  double wave_sep = 1.0;
  double wave_floor = 0.1;
  auto* wave = app.add_subcommand("wavetrace", "windowed wave trace and length-spectrum peaks");
  add_input(*wave, wave_in);
  wave->add_option("--window", wave_window)->check(CLI::IsMember({"gaussian", "plateau"}));
  wave->add_option("--center", wave_center)->required();
  wave->add_option("--width", wave_width)->required();
  wave->add_option("--tgrid", wave_tgrid, "start:stop:step");
  wave->add_option("--peaks", wave_peaks, "number of peaks to report");
  wave->add_option("--min-sep", wave_sep, "minimum peak separation and smallest t");
  wave->add_option("--floor", wave_floor, "peaks below floor * tallest are ignored");
  wave->add_option("-o,--output", wave_output, "two-column trace output");
  wave->add_option("--peaks-output", wave_peaks_output, "peak list output");

  // audit
  InputOptions audit_in;
  std::string audit_coeffs;
  std::string audit_grid;
  std::string audit_candidates;
  std::string audit_fit;
  std::string audit_output;
  std::string audit_residual;
  std::optional<int> audit_dim;
  std::optional<double> audit_volume;
  AuditConfig audit_cfg;
  auto* audit = app.add_subcommand("audit", "detect missing or extra eigenvalues");
  add_input(*audit, audit_in);
  audit->add_option("--k", audit_cfg.order, "Riesz order");
  audit->add_option("--coeffs", audit_coeffs, "torus, sphere, or a coefficient file")->required();
  audit->add_option("--dim", audit_dim, "dimension for presets");
  audit->add_option("--volume", audit_volume, "volume for the torus preset");
  audit->add_option("--grid", audit_grid, "start:stop:step")->required();
  audit->add_option("--candidates", audit_candidates, "start:stop:step");
  audit->add_option("--threshold", audit_cfg.threshold);
  audit->add_option("--max-anomalies", audit_cfg.max_anomalies);
  audit->add_option("--fit-grid", audit_fit, "fit coefficients not marked known on start:stop:step");
  audit->add_flag("--allow-order-zero", audit_cfg.allow_order_zero);
  audit->add_option("-o,--output", audit_output, "report output");
  audit->add_option("--residual-output", audit_residual, "two-column residual output");

  // kernel
  std::string kern_kind = "plateau";
  double kern_spacing = 1e-3;
  std::optional<double> kern_cut;
  std::size_t kern_stride = 100;
  std::string kern_output;
  auto* kern = app.add_subcommand("kernel", "export a kernel table");
  kern->add_option("--kind", kern_kind)->check(CLI::IsMember({"plateau", "nonneg", "tauberian"}));
  kern->add_option("--grid-spacing", kern_spacing);
  kern->add_option("--t-cut", kern_cut);
  kern->add_option("--stride", kern_stride, "write every n-th node");
  kern->add_option("-o,--output", kern_output, "two-column output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (torus->parsed()) {
      FlatTorus t;
      if (!basis.empty()) {
        t = FlatTorus{gen_dim, parse_list(basis)};
      } else if (!sides.empty()) {
        t = FlatTorus::rectangular(parse_list(sides));
      } else if (side) {
        t = FlatTorus::cubic(gen_dim, *side);
      } else {
        throw ValidationError("gen torus needs --side, --sides or --basis");
      }
      const Spectrum s = torus_spectrum(t, gen_lmax, {budget});
      std::ostringstream body;
      write_spectrum(body, s, SpectrumFormat::structured);
      emit(gen_output, args, body.str(), out);
      out << "entries " << s.size() << " total_multiplicity " << s.total_multiplicity() << '\n';
    } else if (sphere->parsed()) {
      const Spectrum s = sphere_spectrum(RoundSphere{gen_dim}, gen_lmax);
      std::ostringstream body;
      write_spectrum(body, s, SpectrumFormat::structured);
      emit(gen_output, args, body.str(), out);
      out << "entries " << s.size() << " total_multiplicity " << s.total_multiplicity() << '\n';
    } else if (count->parsed()) {
      const Spectrum s = load_input(count_in);
      std::ostringstream body;
      for (double x : grid_option(count_grid).points()) body << format_double(x) << ' ' << counting_function(s, x) << '\n';
      emit(count_output, args, body.str(), out);
    } else if (riesz->parsed()) {
      const Spectrum s = load_input(riesz_in);
      const PrefixPowerSums sums(s, std::max(riesz_k, 0));
      std::ostringstream body;
      for (double x : grid_option(riesz_grid).points())
        body << format_double(x) << ' ' << format_double(riesz_mean(sums, {riesz_k, x})) << '\n';
      emit(riesz_output, args, body.str(), out);
    } else if (moll->parsed()) {
      const Spectrum s = load_input(moll_in);
      const GridSpec grid = grid_option(moll_grid);
      grid.validate();
      const ScaledKernel k{make_kernel(moll_kernel, moll_spacing, std::nullopt), moll_scale};
      std::ostringstream body;
      if (moll_mode == "gap") {
        for (const auto& p : tauberian_gap_check(s, k, grid))
          body << format_double(p.lambda) << ' ' << format_double(p.gap) << '\n';
      } else {
        std::size_t incomplete = 0;
        for (double x : grid.points()) {
          const ConvolutionValue v = moll_mode == "counting" ? convolve_counting(s, k, x) : convolve_density(s, k, x);
          if (!v.complete) ++incomplete;
          body << format_double(x) << ' ' << format_double(v.value) << (v.complete ? "" : " incomplete") << '\n';
        }
        if (incomplete && !moll_allow)
          throw CompletenessError(std::to_string(incomplete) + " grid point(s) reach past lambda_max (kernel reach " +
                                  format_double(k.reach()) + "); use --allow-incomplete to write them anyway");
      }
      emit(moll_output, args, body.str(), out);
    } else if (wave->parsed()) {
      const Spectrum s = load_input(wave_in);
      const Window window{wave_window == "plateau" ? WindowShape::plateau : WindowShape::gaussian, wave_center,
                          wave_width};
      const TraceSeries trace = spectral_wave_trace(s, window, grid_option(wave_tgrid));
      std::ostringstream body;
      write_trace(body, trace);
      emit(wave_output, args, body.str(), out);
      std::ostringstream peaks;
      peaks << "# t height\n";
      for (const auto& p : detect_length_peaks(trace, wave_sep, wave_peaks, wave_floor))
        peaks << format_double(p.t) << ' ' << format_double(p.height) << '\n';
      if (!wave_peaks_output.empty()) {
        emit(wave_peaks_output, args, peaks.str(), out);
      } else if (!wave_output.empty()) {
        out << peaks.str();
      }
    } else if (audit->parsed()) {
      const Spectrum s = load_input(audit_in);
      audit_cfg.grid = grid_option(audit_grid);
      if (!audit_candidates.empty()) audit_cfg.candidates = grid_option(audit_candidates);
      audit_cfg.baseline = resolve_coefficients(audit_coeffs, s, audit_dim, audit_volume);
      if (!audit_fit.empty()) {
        const std::vector<double> points = grid_option(audit_fit).points();
        audit_cfg.baseline = fit_unknown_coefficients(s, audit_cfg.baseline, audit_cfg.order, points);
      }
      const AuditReport report = detect_defects(s, audit_cfg);
      emit(audit_output, args, format_report(report), out);
      if (!audit_residual.empty()) {
        std::ostringstream body;
        write_residual(body, report.residual);
        emit(audit_residual, args, body.str(), out);
      }
      if (!audit_output.empty()) out << "verdict: " << to_string(report.verdict) << '\n';
    } else if (kern->parsed()) {
      const Kernel k = make_kernel(kern_kind, kern_spacing, kern_cut);
      std::ostringstream body;
      write_kernel_table(body, k, kern_stride);
      emit(kern_output, args, body.str(), out);
    }
  } catch (const CompletenessError& e) {
    err << "completeness error: " << e.what() << '\n';
    return kExitIncomplete;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace specaudit::cli
