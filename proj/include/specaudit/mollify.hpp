#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "specaudit/grid.hpp"
#include "specaudit/spectrum.hpp"

namespace specaudit {

enum class KernelKind { plateau, nonneg, tauberian };

const char* to_string(KernelKind kind);

/// Numbers measured while a kernel was built. Every check that can fail the
/// build is recorded here, whether or not it passed.
struct KernelDiagnostics {
  double mass = 0.0;            ///< Phi(t_cut) - Phi(-t_cut) from the table
  double evenness_error = 0.0;  ///< max |Im rho(t)| over probe points
  double interpolation_error = 0.0;  ///< max table-vs-quadrature deviation at cell midpoints
  double min_value = 0.0;       ///< smallest tabulated value
  /// Band-limited moments int rho t^k, k = 0..5 (plateau only; zero otherwise).
  std::array<double, 6> moments{};
  double moment_cutoff = 0.0;   ///< |t| range summed for the moments
};

/// Even, rapidly decaying kernel whose Fourier transform has compact support,
/// stored as a table on [0, t_cut] (the negative half is the mirror image).
///
/// Values and slopes are tabulated on a uniform grid and interpolated with cubic
/// Hermite polynomials. The antiderivative Phi and the second antiderivative Psi
/// are exact integrals of that interpolant, so the truncated kernel is handled
/// consistently: rho = 0 for |t| > t_cut.
class Kernel {
 public:
  KernelKind kind() const noexcept;
  /// The Fourier transform vanishes for |xi| >= this.
  double fourier_support_halfwidth() const noexcept;
  /// rho-hat = 1 on |xi| <= this (plateau kind only).
  std::optional<double> plateau_halfwidth() const noexcept;

  double grid_spacing() const noexcept;
  double t_cut() const noexcept;
  /// Estimate of int_{|t| > t_cut} |rho| (the part dropped by truncation).
  double tail_bound() const noexcept;
  /// Integral of the truncated kernel, Phi(+inf).
  double mass() const noexcept;
  const KernelDiagnostics& diagnostics() const noexcept;

  double value(double t) const;
  double derivative(double t) const;
  /// Phi(s) = int_{-inf}^s rho.
  double antiderivative(double s) const;
  /// Psi(s) = int_{-inf}^s Phi.
  double second_antiderivative(double s) const;
  /// rho-hat(xi) = int rho(t) e^{-i t xi} dt, from the closed-form construction.
  double fourier(double xi) const;

  /// Tabulated samples on [0, t_cut]; node i sits at i * grid_spacing().
  const std::vector<double>& samples() const noexcept;
  const std::vector<double>& sample_slopes() const noexcept;

  /// Opaque table storage; kernels are created by the builders below.
  struct Data;
  explicit Kernel(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  const Data& data() const noexcept { return *data_; }

 private:
  std::shared_ptr<const Data> data_;
};

/// Closed-form Fourier transform of the plateau kernel: 1 on [-1/2, 1/2], smooth
/// transition, 0 for |xi| >= 1.
double plateau_fourier(double xi);

/// Plateau kernel rho: rho-hat = 1 on [-1/2, 1/2], a C-infinity transition to 0 on
/// 1/2 < |xi| < 1, and 0 beyond. With no t_cut the table ends where |rho| stays below
/// 1e-12 for three oscillation periods. Throws ConstructionError when a build-time
/// check fails (mass, evenness, moments, interpolation accuracy).
Kernel build_plateau_kernel(double grid_spacing = 1e-3, std::optional<double> t_cut = std::nullopt);

/// Non-negative kernel c * h(t)^2 with h-hat a bump on [-1/4, 1/4]; its Fourier
/// transform (c / 2 pi) (h-hat * h-hat) lives on [-1/2, 1/2] and equals 1 at 0.
Kernel build_nonneg_kernel(double grid_spacing = 1e-3, std::optional<double> t_cut = std::nullopt);

/// rho_{1,0}(t) = int_{|t|}^inf tau rho~(tau) dtau built from a nonneg kernel by backward
/// cumulative quadrature. Fourier transform: -rho~-hat'(xi) / xi.
Kernel tauberian_kernel(const Kernel& nonneg);

/// Same kernel sampled at scale: rho_T(t) = T rho(T t), rho_T-hat(xi) = rho-hat(xi / T).
Kernel rescale(const Kernel& kernel, double scale);

/// int rho(t) cos(t xi) dt from the table (trapezoid with endpoint slope
/// correction); independent of the closed-form fourier().
double table_fourier(const Kernel& kernel, double xi);

/// Derivative of rho-hat in xi, from the construction (not from the table).
double fourier_derivative(const Kernel& kernel, double xi);

struct ScaledKernel {
  Kernel base;
  double scale = 1.0;

  double value(double t) const { return scale * base.value(scale * t); }
  double antiderivative(double s) const { return base.antiderivative(scale * s); }
  double fourier(double xi) const { return base.fourier(xi / scale); }
  /// Distance beyond which the scaled kernel is zero.
  double reach() const { return base.t_cut() / scale; }
};

struct ConvolutionValue {
  double value = 0.0;
  /// False when lambda + reach exceeds the completeness bound: entries the
  /// kernel would see may be missing from the list.
  bool complete = true;
};

/// N * rho_T(lambda) = sum mult_i Phi(T (lambda - lambda_i)).
ConvolutionValue convolve_counting(const Spectrum& spectrum, const ScaledKernel& kernel, double lambda);

/// N' * rho_T(lambda) = sum mult_i T rho(T (lambda - lambda_i)).
ConvolutionValue convolve_density(const Spectrum& spectrum, const ScaledKernel& kernel, double lambda);

struct GapPoint {
  double lambda = 0.0;
  double gap = 0.0;
};

/// int_{-inf}^lambda (N - N * rho_T)(mu) dmu on the grid, in closed form through the
/// second antiderivative of the kernel. Throws CompletenessError when a grid point
/// plus the kernel reach exceeds lambda_max.
std::vector<GapPoint> tauberian_gap_check(const Spectrum& spectrum, const ScaledKernel& kernel,
                                          const GridSpec& grid);

/// Two columns "t value" on [-t_cut, t_cut], every `stride`-th table node.
void write_kernel_table(std::ostream& out, const Kernel& kernel, std::size_t stride = 1);

}  // namespace specaudit
