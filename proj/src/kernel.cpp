#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "specaudit/error.hpp"
#include "specaudit/grid.hpp"
#include "specaudit/mollify.hpp"
#include "specaudit/numeric.hpp"
#include "specaudit/parallel.hpp"

namespace specaudit {
namespace {

constexpr int kIbpOrder = 6;
// Below this |t| the cosine sum is evaluated directly; above it after six
// integrations by parts, which divides the rounding error by t^6.
constexpr double kIbpSwitch = 40.0;
// Largest |t| the accurate evaluator serves (cutoff scans and moments).
constexpr double kScanLimit = 8000.0;
constexpr double kScanStep = 0.1;
constexpr double kCutThreshold = 1e-12;
// The IBP evaluator bottoms out near 1e-30 for |t| > 4000; with weight (1 + |t|)^5
// this threshold is met near |t| = 3500, where the remaining moment tail is ~1e-12.
constexpr double kMomentThreshold = 1e-10;
constexpr std::size_t kConvolutionNodes = 4096;

using Jet6 = Jet<kIbpOrder>;

double smooth_step_exp(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

// b(u): 1 for u <= 0, 0 for u >= 1, C-infinity in between.
double transition(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double b1 = smooth_step_exp(1.0 - u);
  return b1 / (smooth_step_exp(u) + b1);
}

template <int N>
Jet<N> exp_bump_jet(const Jet<N>& u) {
  // exp(-1/u) underflows long before 1/u reaches 745; all its derivatives do too.
  if (u.value() <= 1.0 / 700.0) return Jet<N>{};
  return exp(Jet<N>::constant(-1.0) / u);
}

// Jet of b(u(x)) where u(x) = u0 + slope * (x - x0).
template <int N>
Jet<N> transition_jet(double u0, double slope) {
  if (u0 <= 0.0) return Jet<N>::constant(1.0);
  if (u0 >= 1.0) return Jet<N>{};
  const auto u = Jet<N>::affine(u0, slope);
  const auto b0 = exp_bump_jet(u);
  const auto b1 = exp_bump_jet(Jet<N>::constant(1.0) - u);
  return b1 / (b0 + b1);
}

template <int N>
Jet<N> plateau_hat_jet(double xi) {
  const double a = std::abs(xi);
  if (a <= 0.5) return Jet<N>::constant(1.0);
  return transition_jet<N>(2.0 * (a - 0.5), xi < 0 ? -2.0 : 2.0);
}

template <int N>
Jet<N> bump_hat_jet(double xi) {
  return transition_jet<N>(4.0 * std::abs(xi), xi < 0 ? -4.0 : 4.0);
}

double plateau_hat(double xi) {
  const double a = std::abs(xi);
  if (a <= 0.5) return 1.0;
  return transition(2.0 * (a - 0.5));
}

double bump_hat(double xi) { return transition(4.0 * std::abs(xi)); }

// g(t) = (1/pi) int_0^w ghat(xi) cos(t xi) dxi for an even ghat supported in
// [-w, w]. The trapezoidal rule on the symmetric periodic extension is exact up
// to aliasing g(t + 2 pi m / delta); `span` = 2 pi / delta is chosen far beyond
// every t evaluated.
class CosineTransform {
 public:
  struct Point {
    double value;
    double slope;
  };

  CosineTransform(const std::function<Jet6(double)>& ghat, double w, double span) {
    const auto m = static_cast<std::size_t>(std::ceil(w * span / two_pi));
    const double delta = w / static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double xi = static_cast<double>(j) * delta;
      const Jet6 jet = ghat(xi);
      const double weight = (j == 0 ? 0.5 : 1.0) * delta / pi;
      xi_.push_back(xi);
      direct_.push_back(weight * jet.value());
      ibp_.push_back(weight * jet.derivative(kIbpOrder));
    }
    ibp_begin_ = 0;
    while (ibp_begin_ < m && ibp_[ibp_begin_] == 0.0) ++ibp_begin_;
  }

  Point eval(double t) const {
    const double a = std::abs(t);
    Point p{};
    if (a < kIbpSwitch) {
      double v = 0.0;
      double s = 0.0;
      for (std::size_t j = 0; j < xi_.size(); ++j) {
        v += direct_[j] * std::cos(a * xi_[j]);
        s += direct_[j] * xi_[j] * std::sin(a * xi_[j]);
      }
      p = {v, -s};
    } else {
      double c = 0.0;
      double s = 0.0;
      for (std::size_t j = ibp_begin_; j < xi_.size(); ++j) {
        c += ibp_[j] * std::cos(a * xi_[j]);
        s += ibp_[j] * xi_[j] * std::sin(a * xi_[j]);
      }
      p = ibp_point(a, c, s);
    }
    if (t < 0) p.slope = -p.slope;
    return p;
  }

  // Values and slopes at t0 + i h, i < count (t0 >= 0). Phases advance by
  // rotation and are recomputed exactly at the start of every block.
  void fill(double t0, double h, std::size_t count, double* value, double* slope) const {
    constexpr std::size_t kBlock = 64;
    const std::size_t blocks = (count + kBlock - 1) / kBlock;
    std::vector<double> rc(xi_.size());
    std::vector<double> rs(xi_.size());
    for (std::size_t j = 0; j < xi_.size(); ++j) {
      rc[j] = std::cos(h * xi_[j]);
      rs[j] = std::sin(h * xi_[j]);
    }
    parallel_for(blocks, [&](std::size_t b) {
      const std::size_t first = b * kBlock;
      const std::size_t last = std::min(count, first + kBlock);
      const bool all_ibp = t0 + static_cast<double>(first) * h >= kIbpSwitch;
      const std::size_t lo = all_ibp ? ibp_begin_ : 0;
      const std::size_t n = xi_.size() - lo;
      std::vector<double> c(n);
      std::vector<double> s(n);
      const double tb = t0 + static_cast<double>(first) * h;
      for (std::size_t j = 0; j < n; ++j) {
        c[j] = std::cos(tb * xi_[lo + j]);
        s[j] = std::sin(tb * xi_[lo + j]);
      }
      for (std::size_t i = first; i < last; ++i) {
        const double t = t0 + static_cast<double>(i) * h;
        double acc_c = 0.0;
        double acc_s = 0.0;
        const bool ibp = t >= kIbpSwitch;
        const double* amp = ibp ? ibp_.data() + lo : direct_.data() + lo;
        for (std::size_t j = 0; j < n; ++j) {
          acc_c += amp[j] * c[j];
          acc_s += amp[j] * xi_[lo + j] * s[j];
          const double cn = c[j] * rc[lo + j] - s[j] * rs[lo + j];
          s[j] = s[j] * rc[lo + j] + c[j] * rs[lo + j];
          c[j] = cn;
        }
        const Point p = ibp ? ibp_point(t, acc_c, acc_s) : Point{acc_c, -acc_s};
        value[i] = p.value;
        slope[i] = p.slope;
      }
    });
  }

 private:
  // g = -C / t^6 and g' = 6 C / t^7 + S / t^6, with C, S the cosine and
  // xi-weighted sine sums of ghat^(6).
  static Point ibp_point(double t, double c, double s) {
    const double t6 = std::pow(t, kIbpOrder);
    return {-c / t6, 6.0 * c / (t6 * t) + s / t6};
  }

  std::vector<double> xi_;
  std::vector<double> direct_;
  std::vector<double> ibp_;
  std::size_t ibp_begin_ = 0;
};

// First scan point after which `below(i)` holds for all points within `window`.
std::optional<double> first_quiet_point(std::size_t n, double window, const std::function<bool(std::size_t)>& below) {
  const auto need = static_cast<std::size_t>(std::ceil(window / kScanStep));
  std::size_t run = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (below(i)) {
      if (++run > need) return static_cast<double>(i - need) * kScanStep;
    } else {
      run = 0;
    }
  }
  return std::nullopt;
}

}  // namespace

struct Kernel::Data {
  KernelKind kind = KernelKind::plateau;
  double h = 0.0;
  std::size_t nodes = 0;  // table nodes on [0, t_cut]
  double t_cut = 0.0;
  double scale = 1.0;     // fourier(xi) reads the construction at xi / scale
  double mass = 0.0;
  double tail = 0.0;
  double psi_end = 0.0;   // Psi(t_cut)
  std::vector<double> v;
  std::vector<double> d;
  std::vector<double> phi;
  std::vector<double> psi;
  KernelDiagnostics diag;

  // Construction data for the Fourier side (nonneg and tauberian kinds).
  double norm = 1.0;             // c in rho~ = c h^2
  std::vector<double> eta;       // convolution nodes on [-1/4, 1/4]
  std::vector<double> eta_weight;
  std::vector<double> hhat;      // h-hat at the nodes
};

namespace {

using Data = Kernel::Data;

// Phi and Psi tables from values and slopes; exact integrals of the Hermite interpolant.
void integrate_table(Data& k) {
  const std::size_t n = k.nodes;
  const double h = k.h;
  std::vector<double> cum(n, 0.0);
  NeumaierSum half;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    half.add(hermite_cell_integral(h, k.v[i], k.d[i], k.v[i + 1], k.d[i + 1]));
    cum[i + 1] = half.value();
  }
  k.mass = 2.0 * half.value();
  k.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) k.phi[i] = k.mass / 2 + cum[i];

  // int over a cell of (Phi(t_i + s) - Phi(t_i)) ds.
  auto inner = [&](std::size_t i) {
    return h * h * (0.35 * k.v[i] + 0.15 * k.v[i + 1]) + h * h * h * (k.d[i] / 20 - k.d[i + 1] / 30);
  };
  NeumaierSum psi0;  // int_0^t_cut (I - Phi)
  for (std::size_t i = 0; i + 1 < n; ++i) {
    psi0.add(h * (k.mass - k.phi[i]));
    psi0.add(-inner(i));
  }
  k.psi.resize(n);
  NeumaierSum running(psi0.value(), 0.0);
  k.psi[0] = psi0.value();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    running.add(h * k.phi[i]);
    running.add(inner(i));
    k.psi[i + 1] = running.value();
  }
  k.psi_end = k.psi[n - 1];
}

struct Cell {
  std::size_t i;
  double s;
  bool beyond;
};

Cell locate(const Data& k, double a) {
  const double x = a / k.h;
  if (!(x < static_cast<double>(k.nodes - 1))) return {k.nodes - 1, 0.0, a > k.t_cut};
  const auto i = static_cast<std::size_t>(x);
  return {i, a - static_cast<double>(i) * k.h, false};
}

double table_value(const Data& k, double t) {
  const Cell c = locate(k, std::abs(t));
  if (c.beyond) return 0.0;
  if (c.i == k.nodes - 1) return k.v[c.i];
  return hermite(c.s, k.h, k.v[c.i], k.d[c.i], k.v[c.i + 1], k.d[c.i + 1]);
}

double table_slope(const Data& k, double t) {
  const Cell c = locate(k, std::abs(t));
  if (c.beyond) return 0.0;
  double slope = c.i == k.nodes - 1 ? k.d[c.i]
                                     : hermite_slope(c.s, k.h, k.v[c.i], k.d[c.i], k.v[c.i + 1], k.d[c.i + 1]);
  return t < 0 ? -slope : slope;
}

double table_phi_positive(const Data& k, double a) {
  const Cell c = locate(k, a);
  if (c.beyond || c.i == k.nodes - 1) return c.beyond ? k.mass : k.phi[c.i];
  const double x = c.s / k.h;
  const double x2 = x * x;
  const double x3 = x2 * x;
  const double x4 = x3 * x;
  const double h = k.h;
  return k.phi[c.i] + h * (x4 / 2 - x3 + x) * k.v[c.i] + h * h * (x4 / 4 - 2 * x3 / 3 + x2 / 2) * k.d[c.i] +
         h * (-x4 / 2 + x3) * k.v[c.i + 1] + h * h * (x4 / 4 - x3 / 3) * k.d[c.i + 1];
}

double table_psi_positive(const Data& k, double a) {
  const Cell c = locate(k, a);
  if (c.beyond) return k.psi_end + k.mass * (a - k.t_cut);
  if (c.i == k.nodes - 1) return k.psi[c.i];
  const double x = c.s / k.h;
  const double x2 = x * x;
  const double x3 = x2 * x;
  const double x4 = x3 * x;
  const double x5 = x4 * x;
  const double h = k.h;
  return k.psi[c.i] + c.s * k.phi[c.i] +
         h * h *
             ((x5 / 10 - x4 / 4 + x2 / 2) * k.v[c.i] + h * (x5 / 20 - x4 / 6 + x3 / 6) * k.d[c.i] +
              (-x5 / 10 + x4 / 4) * k.v[c.i + 1] + h * (x5 / 20 - x4 / 12) * k.d[c.i + 1]);
}

// (c / 2 pi) int h-hat(eta) f(xi - eta) d eta on the node grid.
double bump_convolution(const Data& k, double xi, const std::function<double(double)>& f) {
  NeumaierSum acc;
  for (std::size_t j = 0; j < k.eta.size(); ++j) acc.add(k.eta_weight[j] * k.hhat[j] * f(xi - k.eta[j]));
  return k.norm / two_pi * acc.value();
}

double nonneg_hat(const Data& k, double xi) {
  if (std::abs(xi) >= 0.5) return 0.0;
  return bump_convolution(k, xi, bump_hat);
}

double nonneg_hat_derivative(const Data& k, double xi, int order) {
  if (std::abs(xi) >= 0.5) return 0.0;
  return bump_convolution(k, xi, [order](double x) {
    if (std::abs(x) >= 0.25) return 0.0;
    return bump_hat_jet<2>(x).derivative(order);
  });
}

void require(bool ok, const char* kind, const std::string& what) {
  if (!ok) throw ConstructionError(std::string(kind) + " kernel: " + what);
}

double resolve_cut(std::optional<double> requested, std::optional<double> automatic, double h, const char* kind) {
  double t = 0.0;
  if (requested) {
    if (!(*requested > 0.0) || !std::isfinite(*requested)) throw ValidationError("t_cut must be positive");
    t = *requested;
  } else {
    require(automatic.has_value(), kind, "no cutoff found below |t| = " + format_double(kScanLimit));
    t = *automatic;
  }
  return std::ceil(t / h - 1e-9) * h;
}

void validate_spacing(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("grid_spacing must be positive");
  if (h > 1.0) throw ValidationError("grid_spacing must be at most 1");
}

std::size_t node_count(double t_cut, double h) {
  const double n = std::round(t_cut / h) + 1;
  if (n > 5e7) throw ResourceError("kernel table would need " + format_double(n) + " nodes");
  return static_cast<std::size_t>(n);
}

// max |table - reference| at cell midpoints (every `stride` cells).
double midpoint_error(const Data& k, const std::function<double(double)>& reference) {
  const std::size_t stride = std::max<std::size_t>(1, (k.nodes - 1) / 4000);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < k.nodes; i += stride) {
    const double t = (static_cast<double>(i) + 0.5) * k.h;
    worst = std::max(worst, std::abs(table_value(k, t) - reference(t)));
  }
  return worst;
}

// |(1/2 pi) int ghat(xi) sin(t xi) dxi| over the full symmetric node set, i.e.
// the imaginary part of rho(t); zero exactly when rho is even.
double evenness_error(const std::function<double(double)>& ghat, double w) {
  constexpr int kNodes = 2048;
  const double delta = w / kNodes;
  double worst = 0.0;
  for (double t : {0.5, 1.7, 3.1, 7.9, 19.3, 42.0, 101.5}) {
    NeumaierSum acc;
    for (int j = -kNodes; j <= kNodes; ++j) {
      const double xi = j * delta;
      acc.add(ghat(xi) * std::sin(t * xi));
    }
    worst = std::max(worst, std::abs(acc.value() * delta / two_pi));
  }
  return worst;
}

std::vector<double> scan_magnitude(const CosineTransform& transform, const std::function<double(double)>& map) {
  const auto n = static_cast<std::size_t>(kScanLimit / kScanStep) + 1;
  std::vector<double> v(n);
  std::vector<double> d(n);
  transform.fill(0.0, kScanStep, n, v.data(), d.data());
  for (double& x : v) x = std::abs(map(x));
  return v;
}

// 2 int_{t_cut}^{scan limit} |g| by the trapezoidal rule on the scan grid.
double scan_tail(const std::vector<double>& magnitude, double t_cut) {
  NeumaierSum acc;
  for (auto i = static_cast<std::size_t>(t_cut / kScanStep); i + 1 < magnitude.size(); ++i)
    acc.add((magnitude[i] + magnitude[i + 1]) * kScanStep / 2);
  return 2.0 * acc.value();
}

std::shared_ptr<Data> new_table(KernelKind kind, double h, double t_cut) {
  auto k = std::make_shared<Data>();
  k->kind = kind;
  k->h = h;
  k->t_cut = t_cut;
  k->nodes = node_count(t_cut, h);
  k->v.resize(k->nodes);
  k->d.resize(k->nodes);
  return k;
}

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace

double plateau_fourier(double xi) { return plateau_hat(xi); }

const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::plateau: return "plateau";
    case KernelKind::nonneg: return "nonneg";
    case KernelKind::tauberian: return "tauberian";
  }
  return "?";
}

KernelKind Kernel::kind() const noexcept { return data_->kind; }

double Kernel::fourier_support_halfwidth() const noexcept {
  return (data_->kind == KernelKind::plateau ? 1.0 : 0.5) * data_->scale;
}

std::optional<double> Kernel::plateau_halfwidth() const noexcept {
  if (data_->kind != KernelKind::plateau) return std::nullopt;
  return 0.5 * data_->scale;
}

double Kernel::grid_spacing() const noexcept { return data_->h; }
double Kernel::t_cut() const noexcept { return data_->t_cut; }
double Kernel::tail_bound() const noexcept { return data_->tail; }
double Kernel::mass() const noexcept { return data_->mass; }
const KernelDiagnostics& Kernel::diagnostics() const noexcept { return data_->diag; }
const std::vector<double>& Kernel::samples() const noexcept { return data_->v; }
const std::vector<double>& Kernel::sample_slopes() const noexcept { return data_->d; }

double Kernel::value(double t) const { return table_value(*data_, t); }
double Kernel::derivative(double t) const { return table_slope(*data_, t); }

double Kernel::antiderivative(double s) const {
  if (s >= 0) return table_phi_positive(*data_, s);
  return data_->mass - table_phi_positive(*data_, -s);
}

double Kernel::second_antiderivative(double s) const {
  if (s >= 0) return table_psi_positive(*data_, s);
  return table_psi_positive(*data_, -s) + data_->mass * s;
}

double Kernel::fourier(double xi) const {
  const Data& k = *data_;
  const double x = xi / k.scale;
  switch (k.kind) {
    case KernelKind::plateau: return plateau_hat(x);
    case KernelKind::nonneg: return nonneg_hat(k, x);
    case KernelKind::tauberian:
      if (std::abs(x) >= 0.5) return 0.0;
      if (x == 0.0) return -nonneg_hat_derivative(k, 0.0, 2);
      return -nonneg_hat_derivative(k, x, 1) / x;
  }
  return 0.0;
}

double fourier_derivative(const Kernel& kernel, double xi) {
  const Data& k = kernel.data();
  const double x = xi / k.scale;
  switch (k.kind) {
    case KernelKind::plateau: return plateau_hat_jet<1>(x).derivative(1) / k.scale;
    case KernelKind::nonneg: return nonneg_hat_derivative(k, x, 1) / k.scale;
    case KernelKind::tauberian: break;
  }
  throw ValidationError("fourier_derivative is not available for the tauberian kernel");
}

Kernel build_plateau_kernel(double grid_spacing, std::optional<double> t_cut) {
  validate_spacing(grid_spacing);
  constexpr const char* kName = "plateau";
  const CosineTransform accurate(plateau_hat_jet<kIbpOrder>, 1.0, kScanLimit + 8000.0);
  const std::vector<double> scan = scan_magnitude(accurate, [](double v) { return v; });
  // rho oscillates with frequencies in [1/2, 1]: the longest period is 4 pi.
  const double period = 4.0 * pi;

  const std::optional<double> automatic =
      first_quiet_point(scan.size(), 3 * period, [&](std::size_t i) { return scan[i] < kCutThreshold; });
  const double cut = resolve_cut(t_cut, automatic, grid_spacing, kName);

  auto k = new_table(KernelKind::plateau, grid_spacing, cut);
  const CosineTransform table(plateau_hat_jet<kIbpOrder>, 1.0, cut + 4000.0);
  table.fill(0.0, grid_spacing, k->nodes, k->v.data(), k->d.data());
  integrate_table(*k);
  k->tail = scan_tail(scan, cut);

  KernelDiagnostics& diag = k->diag;
  diag.mass = k->mass;
  diag.min_value = min_of(k->v);
  diag.evenness_error = evenness_error(plateau_hat, 1.0);
  diag.interpolation_error = midpoint_error(*k, [&](double t) { return accurate.eval(t).value; });

  // rho t^k is band-limited to [-1, 1], so the unit-step trapezoidal sum over
  // the integers equals the integral; it is cut where |rho| (1 + |t|)^5 is negligible.
  const std::optional<double> moment_cut = first_quiet_point(scan.size(), 3 * period, [&](std::size_t i) {
    return scan[i] * std::pow(1.0 + static_cast<double>(i) * kScanStep, 5) < kMomentThreshold;
  });
  require(moment_cut.has_value(), kName, "moment sums do not converge below |t| = " + format_double(kScanLimit));
  const auto m = static_cast<std::int64_t>(std::ceil(*moment_cut));
  diag.moment_cutoff = static_cast<double>(m);
  std::vector<double> rho(static_cast<std::size_t>(2 * m + 1));
  parallel_for(rho.size(), [&](std::size_t i) {
    rho[i] = accurate.eval(static_cast<double>(static_cast<std::int64_t>(i) - m)).value;
  });
  for (int p = 0; p <= 5; ++p) {
    NeumaierSum acc;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const auto n = static_cast<double>(static_cast<std::int64_t>(i) - m);
      acc.add(rho[i] * std::pow(n, p));
    }
    diag.moments[static_cast<std::size_t>(p)] = acc.value();
  }

  require(std::abs(diag.mass - 1.0) <= 1e-8, kName, "mass " + format_double(diag.mass) + " is not within 1e-8 of 1");
  require(diag.evenness_error <= 1e-12, kName, "not even: odd part " + format_double(diag.evenness_error));
  require(diag.interpolation_error <= 1e-10, kName,
          "grid too coarse: interpolation error " + format_double(diag.interpolation_error));
  require(std::abs(diag.moments[0] - 1.0) <= 1e-8, kName, "integral " + format_double(diag.moments[0]) + " differs from 1");
  for (std::size_t p = 1; p <= 5; ++p)
    require(std::abs(diag.moments[p]) <= 1e-8, kName,
            "moment " + std::to_string(p) + " is " + format_double(diag.moments[p]));
  return Kernel(std::move(k));
}

Kernel build_nonneg_kernel(double grid_spacing, std::optional<double> t_cut) {
  validate_spacing(grid_spacing);
  constexpr const char* kName = "nonneg";

  auto conv = std::make_shared<Data>();
  {
    const double step = 0.5 / static_cast<double>(kConvolutionNodes);
    NeumaierSum energy;
    for (std::size_t j = 0; j <= kConvolutionNodes; ++j) {
      const double eta = -0.25 + static_cast<double>(j) * step;
      const double w = (j == 0 || j == kConvolutionNodes) ? step / 2 : step;
      conv->eta.push_back(eta);
      conv->eta_weight.push_back(w);
      conv->hhat.push_back(bump_hat(eta));
      energy.add(w * conv->hhat.back() * conv->hhat.back());
    }
    // Parseval: int h^2 = (1 / 2 pi) int h-hat^2.
    conv->norm = two_pi / energy.value();
  }
  const double c = conv->norm;

  const CosineTransform accurate(bump_hat_jet<kIbpOrder>, 0.25, kScanLimit + 8000.0);
  const std::vector<double> scan = scan_magnitude(accurate, [c](double h) { return c * h * h; });
  const double period = 8.0 * pi;
  const std::optional<double> automatic =
      first_quiet_point(scan.size(), 3 * period, [&](std::size_t i) { return scan[i] < kCutThreshold; });
  const double cut = resolve_cut(t_cut, automatic, grid_spacing, kName);

  auto k = new_table(KernelKind::nonneg, grid_spacing, cut);
  k->norm = conv->norm;
  k->eta = std::move(conv->eta);
  k->eta_weight = std::move(conv->eta_weight);
  k->hhat = std::move(conv->hhat);
  const CosineTransform table(bump_hat_jet<kIbpOrder>, 0.25, cut + 4000.0);
  table.fill(0.0, grid_spacing, k->nodes, k->v.data(), k->d.data());
  for (std::size_t i = 0; i < k->nodes; ++i) {
    const double h = k->v[i];
    k->v[i] = c * h * h;
    k->d[i] = 2.0 * c * h * k->d[i];
  }
  integrate_table(*k);
  k->tail = scan_tail(scan, cut);

  KernelDiagnostics& diag = k->diag;
  diag.mass = k->mass;
  diag.min_value = min_of(k->v);
  diag.evenness_error = evenness_error(bump_hat, 0.25);
  diag.interpolation_error = midpoint_error(*k, [&](double t) {
    const double h = accurate.eval(t).value;
    return c * h * h;
  });
  diag.moments[0] = k->mass;

  require(std::abs(diag.mass - 1.0) <= 1e-8, kName, "mass " + format_double(diag.mass) + " is not within 1e-8 of 1");
  require(diag.min_value >= 0.0, kName, "negative table value " + format_double(diag.min_value));
  require(diag.evenness_error <= 1e-12, kName, "not even: odd part " + format_double(diag.evenness_error));
  require(diag.interpolation_error <= 1e-10, kName,
          "grid too coarse: interpolation error " + format_double(diag.interpolation_error));
  return Kernel(std::move(k));
}

Kernel tauberian_kernel(const Kernel& nonneg) {
  const Data& src = nonneg.data();
  if (src.kind != KernelKind::nonneg || src.scale != 1.0)
    throw ValidationError("tauberian_kernel needs an unscaled nonneg kernel");
  auto k = std::make_shared<Data>(src);
  k->kind = KernelKind::tauberian;

  // g(tau) = tau rho~(tau), g' = rho~ + tau rho~'; integrate backwards from t_cut.
  const double h = src.h;
  const std::size_t n = src.nodes;
  auto g = [&](std::size_t i) { return static_cast<double>(i) * h * src.v[i]; };
  auto dg = [&](std::size_t i) { return src.v[i] + static_cast<double>(i) * h * src.d[i]; };
  NeumaierSum acc;
  k->v[n - 1] = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    acc.add(hermite_cell_integral(h, g(i), dg(i), g(i + 1), dg(i + 1)));
    k->v[i] = acc.value();
  }
  for (std::size_t i = 0; i < n; ++i) k->d[i] = -g(i);
  integrate_table(*k);

  // Truncation drops int_{t_cut}^inf tau rho~ from every value; bound it
  // (and the dropped mass) from the accurate nonneg evaluator.
  const CosineTransform accurate(bump_hat_jet<kIbpOrder>, 0.25, kScanLimit + 8000.0);
  const double c = src.norm;
  const auto count = static_cast<std::size_t>(std::max(0.0, (kScanLimit - src.t_cut) / kScanStep)) + 1;
  std::vector<double> hv(count);
  std::vector<double> hd(count);
  accurate.fill(src.t_cut, kScanStep, count, hv.data(), hd.data());
  std::vector<double> outer(count, 0.0);  // int_t^limit tau rho~
  for (std::size_t i = count - 1; i-- > 0;) {
    const double t0 = src.t_cut + static_cast<double>(i) * kScanStep;
    const double t1 = t0 + kScanStep;
    outer[i] = outer[i + 1] + kScanStep / 2 * (t0 * c * hv[i] * hv[i] + t1 * c * hv[i + 1] * hv[i + 1]);
  }
  NeumaierSum tail;
  for (std::size_t i = 0; i + 1 < count; ++i) tail.add(kScanStep / 2 * (outer[i] + outer[i + 1]));
  k->tail = 2.0 * tail.value() + 2.0 * src.t_cut * outer[0];

  KernelDiagnostics& diag = k->diag;
  diag = {};
  diag.mass = k->mass;
  diag.min_value = min_of(k->v);
  diag.moments[0] = k->mass;
  diag.evenness_error = src.diag.evenness_error;
  require(diag.min_value >= 0.0, "tauberian", "negative table value " + format_double(diag.min_value));
  return Kernel(std::move(k));
}

Kernel rescale(const Kernel& kernel, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("scale must be positive and finite");
  auto k = std::make_shared<Data>(kernel.data());
  k->h /= scale;
  k->t_cut /= scale;
  k->scale *= scale;
  for (double& x : k->v) x *= scale;
  for (double& x : k->d) x *= scale * scale;
  for (double& x : k->psi) x /= scale;
  k->psi_end /= scale;
  return Kernel(std::move(k));
}

double table_fourier(const Kernel& kernel, double xi) {
  const Data& k = kernel.data();
  NeumaierSum acc;
  for (std::size_t i = 0; i < k.nodes; ++i) {
    const double t = static_cast<double>(i) * k.h;
    const double w = (i == 0 || i + 1 == k.nodes) ? 0.5 : 1.0;
    acc.add(w * k.v[i] * std::cos(t * xi));
  }
  // Euler-Maclaurin endpoint term h^2/12 (g'(0) - g'(t_cut)), g = rho cos(t xi).
  const double t_end = static_cast<double>(k.nodes - 1) * k.h;
  const double g0 = k.d[0];
  const double g1 = k.d[k.nodes - 1] * std::cos(t_end * xi) - k.v[k.nodes - 1] * xi * std::sin(t_end * xi);
  return 2.0 * (k.h * acc.value() + k.h * k.h / 12 * (g0 - g1));
}

void write_kernel_table(std::ostream& out, const Kernel& kernel, std::size_t stride) {
  if (stride == 0) throw ValidationError("stride must be >= 1");
  const Data& k = kernel.data();
  out << "# kernel " << to_string(k.kind) << " grid_spacing=" << format_double(k.h)
      << " t_cut=" << format_double(k.t_cut) << " mass=" << format_double(k.mass)
      << " tail_bound=" << format_double(k.tail) << '\n';
  const auto last = static_cast<std::ptrdiff_t>(k.nodes - 1);
  const auto step = static_cast<std::ptrdiff_t>(stride);
  std::ptrdiff_t start = -(last / step) * step;
  for (std::ptrdiff_t i = start; i <= last; i += step) {
    const std::size_t a = static_cast<std::size_t>(i < 0 ? -i : i);
    out << format_double(static_cast<double>(i) * k.h) << ' ' << format_double(k.v[a]) << '\n';
  }
}

}  // namespace specaudit
