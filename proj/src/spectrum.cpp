#include "specaudit/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "specaudit/error.hpp"
#include "specaudit/grid.hpp"

namespace specaudit {
namespace {

void check_bound(double lambda_max) {
  if (!std::isfinite(lambda_max) || lambda_max < 0.0)
    throw ValidationError("lambda_max must be finite and non-negative");
}

// Single-linkage grouping of sorted entries: a gap <= tol joins the group.
std::vector<SpectralEntry> merge_sorted(std::vector<SpectralEntry> sorted, double tol) {
  std::vector<SpectralEntry> out;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j].frequency - sorted[j - 1].frequency <= tol) ++j;
    const double anchor = sorted[i].frequency;
    std::int64_t mult = 0;
    double weighted_offset = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      mult += sorted[k].multiplicity;
      weighted_offset += static_cast<double>(sorted[k].multiplicity) * (sorted[k].frequency - anchor);
    }
    // Offsets are all zero for exact duplicates, so the anchor is kept bit-exactly.
    out.push_back({anchor + weighted_offset / static_cast<double>(mult), mult});
    i = j;
  }
  return out;
}

}  // namespace

Spectrum::Spectrum(std::vector<SpectralEntry> entries, double lambda_max, std::string label)
    : entries_(std::move(entries)), lambda_max_(lambda_max), label_(std::move(label)) {
  cumulative_.reserve(entries_.size());
  std::int64_t running = 0;
  for (const auto& e : entries_) {
    running += e.multiplicity;
    cumulative_.push_back(running);
  }
}

Spectrum Spectrum::from_frequencies(std::span<const SpectralEntry> values, double lambda_max,
                                    double merge_tol, std::string label) {
  check_bound(lambda_max);
  if (!std::isfinite(merge_tol) || merge_tol < 0.0)
    throw ValidationError("merge_tol must be finite and non-negative");
  std::vector<SpectralEntry> sorted(values.begin(), values.end());
  for (const auto& e : sorted) {
    if (!std::isfinite(e.frequency)) throw ValidationError("frequency is not finite");
    if (e.frequency < 0.0)
      throw ValidationError("negative frequency " + format_double(e.frequency));
    if (e.multiplicity < 1)
      throw ValidationError("multiplicity must be >= 1 at frequency " + format_double(e.frequency));
    if (e.frequency > lambda_max)
      throw RangeError("frequency " + format_double(e.frequency) + " exceeds lambda_max " +
                       format_double(lambda_max));
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SpectralEntry& a, const SpectralEntry& b) { return a.frequency < b.frequency; });
  return Spectrum(merge_sorted(std::move(sorted), merge_tol), lambda_max, std::move(label));
}

Spectrum Spectrum::from_laplace_eigenvalues(std::span<const SpectralEntry> eigenvalues,
                                            double lambda_max, double merge_tol, std::string label) {
  std::vector<SpectralEntry> freqs;
  freqs.reserve(eigenvalues.size());
  for (const auto& e : eigenvalues) {
    if (!std::isfinite(e.frequency)) throw ValidationError("eigenvalue is not finite");
    if (e.frequency < 0.0)
      throw ValidationError("negative Laplace eigenvalue " + format_double(e.frequency));
    freqs.push_back({std::sqrt(e.frequency), e.multiplicity});
  }
  return from_frequencies(freqs, lambda_max, merge_tol, std::move(label));
}

std::size_t Spectrum::count_below_index(double lambda) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), lambda,
                             [](const SpectralEntry& e, double v) { return e.frequency < v; });
  return static_cast<std::size_t>(it - entries_.begin());
}

Spectrum Spectrum::truncate(double new_lambda_max) const {
  if (!(new_lambda_max >= 0.0)) throw RangeError("truncation bound must be non-negative");
  if (new_lambda_max > lambda_max_)
    throw RangeError("truncation bound " + format_double(new_lambda_max) +
                     " exceeds lambda_max " + format_double(lambda_max_));
  const std::size_t keep = count_below_index(new_lambda_max);
  return Spectrum({entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(keep)},
                  new_lambda_max, label_);
}

Spectrum Spectrum::with_label(std::string label) const {
  return Spectrum(entries_, lambda_max_, std::move(label));
}

Spectrum perturb(const Spectrum& spectrum, Perturbation action, double mu, double merge_tol) {
  if (!std::isfinite(mu) || mu < 0.0) throw ValidationError("perturbation location must be >= 0");
  if (merge_tol < 0.0) throw ValidationError("merge_tol must be non-negative");
  std::vector<SpectralEntry> entries = spectrum.entries();

  auto nearest = entries.end();
  double best = merge_tol;
  const std::size_t pos = spectrum.count_below_index(mu);
  for (std::size_t i = pos == 0 ? 0 : pos - 1; i < std::min(entries.size(), pos + 1); ++i) {
    const double gap = std::abs(entries[i].frequency - mu);
    if (gap <= best) {
      best = gap;
      nearest = entries.begin() + static_cast<std::ptrdiff_t>(i);
    }
  }

  switch (action) {
    case Perturbation::remove_one:
      if (nearest == entries.end())
        throw ValidationError("no eigenvalue within " + format_double(merge_tol) + " of " +
                              format_double(mu) + " to remove");
      if (--nearest->multiplicity == 0) entries.erase(nearest);
      break;
    case Perturbation::add_one:
      if (mu > spectrum.lambda_max())
        throw RangeError("cannot add " + format_double(mu) + " above lambda_max");
      if (nearest != entries.end()) {
        ++nearest->multiplicity;
      } else {
        entries.insert(entries.begin() + static_cast<std::ptrdiff_t>(pos), SpectralEntry{mu, 1});
      }
      break;
  }
  return Spectrum::from_frequencies(entries, spectrum.lambda_max(), 0.0, spectrum.label());
}

}  // namespace specaudit
