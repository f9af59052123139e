#include "specaudit/models.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "specaudit/error.hpp"
#include "specaudit/grid.hpp"
#include "specaudit/numeric.hpp"
#include "specaudit/parallel.hpp"

namespace specaudit {
namespace {

using Matrix = Eigen::MatrixXd;

Matrix basis_matrix(const FlatTorus& torus) {
  torus.validate();
  const int d = torus.dimension;
  Matrix L(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) L(r, c) = torus.basis[static_cast<std::size_t>(r * d + c)];
  return L;
}

// If scale * gram is an integer matrix for some small rational scale, returns
// that scale and the rounded matrix.
struct IntegerForm {
  double scale;
  std::vector<std::int64_t> entries;
};

std::optional<IntegerForm> integer_form(const Matrix& gram) {
  double smallest = 0.0;
  for (Eigen::Index i = 0; i < gram.size(); ++i) {
    const double v = std::abs(gram.data()[i]);
    if (v > 1e-300 && (smallest == 0.0 || v < smallest)) smallest = v;
  }
  if (smallest == 0.0) return std::nullopt;
  for (int q = 1; q <= 256; ++q) {
    const double scale = q / smallest;
    IntegerForm form{scale, {}};
    bool ok = true;
    for (Eigen::Index r = 0; r < gram.rows() && ok; ++r) {
      for (Eigen::Index c = 0; c < gram.cols(); ++c) {
        const double v = scale * gram(r, c);
        const double rounded = std::round(v);
        if (std::abs(v - rounded) > 1e-9 * std::max(1.0, std::abs(v)) || std::abs(rounded) > 2147483647.0) {
          ok = false;
          break;
        }
        form.entries.push_back(static_cast<std::int64_t>(rounded));
      }
    }
    if (ok) return form;
  }
  return std::nullopt;
}

// Lattice vectors m with sqrt(m^T G m) < radius (computed value), optionally
// excluding m = 0. Returns the norms (sorted) and a merge tolerance (0 when exact).
struct NormList {
  std::vector<double> norms;
  double merge_tol = 0.0;
};

NormList enumerate_norms(const Matrix& gram, double radius, bool include_zero,
                         const EnumerationLimits& limits) {
  const auto d = static_cast<int>(gram.rows());
  const Matrix inverse = gram.inverse();
  std::vector<std::int64_t> bound(static_cast<std::size_t>(d));
  long double candidates = 1.0L;
  for (int j = 0; j < d; ++j) {
    const double b = radius * std::sqrt(std::max(0.0, inverse(j, j)));
    if (!std::isfinite(b) || b > 4.0e9) throw ResourceError("lattice bounding box is too large");
    bound[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::floor(b)) + 1;
    candidates *= static_cast<long double>(2 * bound[static_cast<std::size_t>(j)] + 1);
  }
  if (candidates > static_cast<long double>(limits.point_budget))
    throw ResourceError("lattice enumeration needs " + format_double(static_cast<double>(candidates)) +
                        " candidates, over the budget of " + std::to_string(limits.point_budget));

  const std::optional<IntegerForm> exact = integer_form(gram);
  const std::int64_t slabs = 2 * bound[0] + 1;
  std::vector<std::vector<double>> per_slab(static_cast<std::size_t>(slabs));

  parallel_for(static_cast<std::size_t>(slabs), [&](std::size_t slab) {
    std::vector<std::int64_t> m(static_cast<std::size_t>(d));
    m[0] = static_cast<std::int64_t>(slab) - bound[0];
    for (int j = 1; j < d; ++j) m[static_cast<std::size_t>(j)] = -bound[static_cast<std::size_t>(j)];
    auto& out = per_slab[slab];
    while (true) {
      bool zero = true;
      for (auto v : m) zero = zero && v == 0;
      if (include_zero || !zero) {
        double norm = 0.0;
        if (exact) {
          __int128 q = 0;
          for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
              q += static_cast<__int128>(exact->entries[static_cast<std::size_t>(r * d + c)]) *
                   m[static_cast<std::size_t>(r)] * m[static_cast<std::size_t>(c)];
          norm = std::sqrt(static_cast<double>(q) / exact->scale);
        } else {
          long double q = 0.0L;
          for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
              q += static_cast<long double>(gram(r, c)) * m[static_cast<std::size_t>(r)] *
                   m[static_cast<std::size_t>(c)];
          norm = static_cast<double>(std::sqrt(std::max(0.0L, q)));
        }
        if (norm < radius) out.push_back(norm);
      }
      int j = d - 1;
      while (j >= 1 && m[static_cast<std::size_t>(j)] == bound[static_cast<std::size_t>(j)]) {
        m[static_cast<std::size_t>(j)] = -bound[static_cast<std::size_t>(j)];
        --j;
      }
      if (j < 1) break;
      ++m[static_cast<std::size_t>(j)];
    }
  });

  NormList list;
  for (auto& slab : per_slab) list.norms.insert(list.norms.end(), slab.begin(), slab.end());
  std::sort(list.norms.begin(), list.norms.end());
  list.merge_tol = exact ? 0.0 : 1e-9 * radius;
  return list;
}

std::vector<SpectralEntry> group(const std::vector<double>& sorted) {
  std::vector<SpectralEntry> out;
  for (double v : sorted) {
    if (!out.empty() && out.back().frequency == v) {
      ++out.back().multiplicity;
    } else {
      out.push_back({v, 1});
    }
  }
  return out;
}

}  // namespace

FlatTorus FlatTorus::cubic(int dimension, double side) {
  FlatTorus t{dimension, std::vector<double>(static_cast<std::size_t>(dimension * dimension), 0.0)};
  for (int i = 0; i < dimension; ++i) t.basis[static_cast<std::size_t>(i * dimension + i)] = side;
  return t;
}

FlatTorus FlatTorus::rectangular(std::vector<double> sides) {
  const int d = static_cast<int>(sides.size());
  FlatTorus t{d, std::vector<double>(static_cast<std::size_t>(d * d), 0.0)};
  for (int i = 0; i < d; ++i) t.basis[static_cast<std::size_t>(i * d + i)] = sides[static_cast<std::size_t>(i)];
  return t;
}

void FlatTorus::validate() const {
  if (dimension < 1) throw ValidationError("torus dimension must be >= 1");
  if (basis.size() != static_cast<std::size_t>(dimension * dimension))
    throw ValidationError("torus basis must have d*d entries");
  for (double v : basis)
    if (!std::isfinite(v)) throw ValidationError("torus basis entries must be finite");
  if (volume() == 0.0) throw ValidationError("torus basis is singular");
}

double FlatTorus::volume() const {
  Matrix L(dimension, dimension);
  for (int r = 0; r < dimension; ++r)
    for (int c = 0; c < dimension; ++c) L(r, c) = basis[static_cast<std::size_t>(r * dimension + c)];
  return std::abs(L.determinant());
}

void RoundSphere::validate() const {
  if (dimension < 2) throw ValidationError("sphere dimension must be >= 2");
}

double RoundSphere::volume() const {
  // |S^d| = 2 pi^{(d+1)/2} / Gamma((d+1)/2)
  return 2.0 * std::pow(pi, (dimension + 1) / 2.0) / std::tgamma((dimension + 1) / 2.0);
}

Spectrum torus_spectrum(const FlatTorus& torus, double lambda_max, EnumerationLimits limits) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
    throw ValidationError("lambda_max must be positive and finite");
  const Matrix L = basis_matrix(torus);
  const Matrix dual_gram = 4.0 * pi * pi * (L.transpose() * L).inverse();
  const NormList norms = enumerate_norms(dual_gram, lambda_max, true, limits);

  std::string label = "flat torus dim=" + std::to_string(torus.dimension) +
                      " volume=" + format_double(torus.volume()) + " basis=";
  for (std::size_t i = 0; i < torus.basis.size(); ++i)
    label += (i ? "," : "") + format_double(torus.basis[i]);
  const auto entries = group(norms.norms);
  return Spectrum::from_frequencies(entries, lambda_max, norms.merge_tol, label);
}

Spectrum sphere_spectrum(const RoundSphere& sphere, double lambda_max) {
  sphere.validate();
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
    throw ValidationError("lambda_max must be positive and finite");
  const int d = sphere.dimension;
  std::vector<SpectralEntry> entries;
  for (std::int64_t l = 0;; ++l) {
    const double freq = std::sqrt(static_cast<double>(l) * static_cast<double>(l + d - 1));
    if (!(freq < lambda_max)) break;
    // C(l + d - 2, d - 2) built incrementally in 128-bit to detect overflow.
    unsigned __int128 c = 1;
    for (int j = 1; j <= d - 2; ++j) c = c * static_cast<unsigned __int128>(l + j) / static_cast<unsigned>(j);
    const unsigned __int128 mult = c * static_cast<unsigned __int128>(2 * l + d - 1) / static_cast<unsigned>(d - 1);
    if (mult > static_cast<unsigned __int128>(INT64_MAX)) throw ResourceError("sphere multiplicity overflows");
    entries.push_back({freq, static_cast<std::int64_t>(mult)});
  }
  const std::string label =
      "round sphere dim=" + std::to_string(d) + " volume=" + format_double(sphere.volume());
  return Spectrum::from_frequencies(entries, lambda_max, 0.0, label);
}

std::vector<LengthCount> torus_geodesic_lengths(const FlatTorus& torus, double length_max,
                                                EnumerationLimits limits) {
  if (!(length_max > 0.0) || !std::isfinite(length_max))
    throw ValidationError("length_max must be positive and finite");
  const Matrix L = basis_matrix(torus);
  const NormList norms = enumerate_norms(L.transpose() * L, length_max, false, limits);
  std::vector<LengthCount> out;
  for (double v : norms.norms) {
    if (!out.empty() && v - out.back().length <= norms.merge_tol) {
      ++out.back().count;
    } else {
      out.push_back({v, 1});
    }
  }
  return out;
}

}  // namespace specaudit
