#pragma once

#include <span>
#include <string>
#include <vector>

#include "geoflow/mobius.hpp"
#include "geoflow/spectra.hpp"

namespace geoflow::growth {

enum class Method { CountingFit, PoincareSweep, BowenRoot };
std::string to_string(Method m);

struct GrowthEstimate {
  double value = 0.0;
  Method method = Method::BowenRoot;
  /// CountingFit: length window. PoincareSweep: word-length window.
  double window_lo = 0.0;
  double window_hi = 0.0;
  /// Classes in the window, spheres in the fit, or the period level.
  int samples = 0;
  double std_error = 0.0;
  double residual = 0.0;
  double bracket_width = 0.0;
  double stability_gap = 0.0;

  /// Single uncertainty figure used by cross-checks.
  double diagnostic() const;
};

inline constexpr int kMinWindowClasses = 20;

/// Least-squares slope of log N(T) on [t0, t1], N counting entries of the
/// sorted `lengths`. Throws IncompleteWindow if t1 exceeds `horizon` or
/// the window holds fewer than kMinWindowClasses lengths.
GrowthEstimate counting_estimate(std::span<const double> lengths, double t0, double t1, double horizon);

/// Counting fit on [horizon/2, horizon] for primitive classes of one side.
GrowthEstimate counting_estimate(const spectra::PairedSpectrum& ps, spectra::Side side);

/// Zero of the fitted growth rate of sphere sums
/// S_n(s) = Σ_{|w| = n} exp(-s·d(x, w·x)) over reduced words, n <= max_word_length.
GrowthEstimate poincare_estimate(std::span<const mobius::Isometry> gens, const mobius::Point& basepoint,
                                 int max_word_length);

GrowthEstimate bowen_root(const spectra::PairedSpectrum& ps, spectra::Side side);

}  // namespace geoflow::growth
