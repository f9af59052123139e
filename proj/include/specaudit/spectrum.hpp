#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace specaudit {

/// One distinct frequency (square root of a Laplace eigenvalue) and how often it occurs.
struct SpectralEntry {
  double frequency = 0.0;
  std::int64_t multiplicity = 1;

  friend bool operator==(const SpectralEntry&, const SpectralEntry&) = default;
};

/// Immutable, validated list of Laplace frequencies.
///
/// Entries are strictly increasing, non-negative, with positive multiplicities,
/// and none exceeds `lambda_max`: the list is asserted complete below that bound.
/// Counting follows the strict convention N(lambda) = #{i : lambda_i < lambda}.
class Spectrum {
 public:
  /// Empty spectrum complete up to 0.
  Spectrum() = default;

  /// Sorts, merges entries whose consecutive gaps are <= merge_tol (multiplicities
  /// add, location becomes the multiplicity-weighted mean) and validates.
  static Spectrum from_frequencies(std::span<const SpectralEntry> values, double lambda_max,
                                   double merge_tol = 0.0, std::string label = {});

  /// As from_frequencies, with values given as Laplace eigenvalues E = lambda^2.
  static Spectrum from_laplace_eigenvalues(std::span<const SpectralEntry> eigenvalues,
                                           double lambda_max, double merge_tol = 0.0,
                                           std::string label = {});

  const std::vector<SpectralEntry>& entries() const noexcept { return entries_; }
  double lambda_max() const noexcept { return lambda_max_; }
  const std::string& label() const noexcept { return label_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Sum of multiplicities.
  std::int64_t total_multiplicity() const noexcept {
    return cumulative_.empty() ? 0 : cumulative_.back();
  }
  /// Index of the first entry whose frequency is >= lambda.
  std::size_t count_below_index(double lambda) const;
  /// Sum of multiplicities of the first `n` entries.
  std::int64_t cumulative(std::size_t n) const noexcept {
    return n == 0 ? 0 : cumulative_[n - 1];
  }

  /// Keeps entries with frequency < new_lambda_max. Throws RangeError if the new
  /// bound is negative or exceeds the current one.
  Spectrum truncate(double new_lambda_max) const;
  Spectrum with_label(std::string label) const;

  friend bool operator==(const Spectrum& a, const Spectrum& b) {
    return a.entries_ == b.entries_ && a.lambda_max_ == b.lambda_max_ && a.label_ == b.label_;
  }

 private:
  Spectrum(std::vector<SpectralEntry> entries, double lambda_max, std::string label);

  std::vector<SpectralEntry> entries_;
  std::vector<std::int64_t> cumulative_;
  double lambda_max_ = 0.0;
  std::string label_;
};

enum class Perturbation { remove_one, add_one };

/// Synthetic defect: decrement (deleting at zero) or increment/insert the
/// multiplicity at mu. Matching uses merge_tol. remove_one on an absent
/// frequency throws ValidationError; add_one above lambda_max throws RangeError.
Spectrum perturb(const Spectrum& spectrum, Perturbation action, double mu, double merge_tol = 0.0);

// --- persistence ---------------------------------------------------------

enum class SpectrumFormat {
  plain,       ///< "frequency multiplicity" per line (multiplicity optional), '#' comments
  structured,  ///< plain body preceded by %-directives (format, unit, lambda_max, label)
};

enum class SpectrumUnit { frequency, eigenvalue };

/// Settings for plain-format input, which carries no header.
struct PlainReadOptions {
  std::optional<double> lambda_max;  ///< required for plain input
  SpectrumUnit unit = SpectrumUnit::frequency;
  double merge_tol = 0.0;
  std::string label;
};

Spectrum read_spectrum(std::istream& in, SpectrumFormat format, const PlainReadOptions& plain = {});
void write_spectrum(std::ostream& out, const Spectrum& spectrum, SpectrumFormat format);

/// Detects the structured header; otherwise reads as plain with `plain`.
Spectrum load_spectrum(const std::filesystem::path& path, const PlainReadOptions& plain = {});
Spectrum load_spectrum(const std::filesystem::path& path, SpectrumFormat format,
                       const PlainReadOptions& plain = {});
void save_spectrum(const Spectrum& spectrum, const std::filesystem::path& path,
                   SpectrumFormat format = SpectrumFormat::structured);

}  // namespace specaudit
