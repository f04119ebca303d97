#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoflow/groups.hpp"

namespace geoflow::spectra {

using groups::GroupSpec;
using groups::Word;
using mobius::Isometry;

enum class Side { G, H };

struct SpectrumEntry {
  int class_id = 0;
  Word word;
  int word_length = 0;
  bool primitive = true;
  double l_g = 0.0;
  double l_h = 0.0;

  double length(Side side) const { return side == Side::G ? l_g : l_h; }
};

/// Marked length spectra of two representations of the same free group,
/// one entry per conjugacy class (inverse classes folded) up to n_max.
struct PairedSpectrum {
  std::string spec_id;
  int rank = 0;
  int n_max = 0;
  bool inversion_folded = true;
  bool includes_non_primitive = true;
  /// Certified translation length per letter, one per side.
  double per_letter_g = 0.0;
  double per_letter_h = 0.0;
  std::vector<SpectrumEntry> entries;

  double per_letter(Side side) const { return side == Side::G ? per_letter_g : per_letter_h; }
};

inline constexpr int kBlockSize = 8;
inline constexpr double kSuspectLength = 1e-6;

/// Translation length of the product along w, multiplying in blocks of
/// kBlockSize letters and rescaling each partial product by its largest
/// entry so long words stay in range.
double evaluate_class(std::span<const Isometry> gens, const Word& w);

PairedSpectrum build_paired_spectrum(const GroupSpec& spec, int n_max, int threads = 1);

/// Largest T such that every class with length <= T on `side` has word
/// length <= n_max.
double completeness_horizon(const PairedSpectrum& ps, Side side);

/// Sorted lengths of primitive classes on one side.
std::vector<double> primitive_lengths(const PairedSpectrum& ps, Side side);

struct DominationVerdict {
  bool all_dominated = true;
  std::vector<int> violations;  // class ids with l_h > l_g + 1e-9
};

DominationVerdict domination_check(const PairedSpectrum& ps);

/// Median ratio l_h / l_g when every ratio lies within tol of it.
std::optional<double> proportionality_test(const PairedSpectrum& ps, double tol);

/// l_h <- factor * l_h, with the h-side length bound scaled alike.
PairedSpectrum rescale_h(const PairedSpectrum& ps, double factor);
/// Exchanges the roles of the two representations.
PairedSpectrum swap_sides(const PairedSpectrum& ps);

// Cache layout: <dir>/spectrum_<spec_id>_n<n_max>.csv plus a .meta file.
std::filesystem::path cache_csv_path(const std::filesystem::path& dir, const std::string& spec_id, int n_max);
void write_spectrum_csv(const std::filesystem::path& csv_path, const PairedSpectrum& ps);
PairedSpectrum read_spectrum_csv(const std::filesystem::path& csv_path);
std::optional<PairedSpectrum> load_cached(const std::filesystem::path& dir, const std::string& spec_id, int n_max);

struct CachedBuild {
  PairedSpectrum spectrum;
  bool cache_hit = false;
  std::filesystem::path csv_path;
};

CachedBuild build_or_load(const GroupSpec& spec, int n_max, const std::filesystem::path& cache_dir,
                          int threads = 1);

}  // namespace geoflow::spectra
