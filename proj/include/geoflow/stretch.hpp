#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geoflow/growth.hpp"
#include "geoflow/spectra.hpp"
#include "geoflow/thermo.hpp"
#include "json.hpp"

namespace geoflow::stretch {

struct TruncatedRatio {
  double value = 0.0;
  double truncation = 0.0;
  int count = 0;
};

/// Σ l_h / Σ l_g over primitive classes with l_g <= T.
TruncatedRatio c2_truncated(const spectra::PairedSpectrum& ps, double t);
/// Σ l_h / Σ l_g over primitive classes with l_h <= T.
TruncatedRatio c1_truncated(const spectra::PairedSpectrum& ps, double t);

struct DerivativeRatio {
  double value = 0.0;
  int n = 0;
  /// d/ds of the level-n pressure of (weight + s·l_h) and of (weight + s·l_g).
  double d_h = 0.0;
  double d_g = 0.0;
};

inline constexpr double kDerivativeStep = 1e-4;

/// Mean l_h over mean l_g under the level-n periodic Gibbs weights of
/// -h_g·l_g, each mean taken as a central difference in s.
DerivativeRatio c2_derivative(const thermo::PeriodData& pd, double h_g, int n);
/// Same with the weights of -delta_h·l_h.
DerivativeRatio c1_derivative(const thermo::PeriodData& pd, double delta_h, int n);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RigidityVerdict {
  bool proportional = false;
  double lambda = 0.0;           // l_h = lambda·l_g when proportional
  double delta_over_h = 0.0;     // δ̂ / ĥ
  double h_over_delta = 0.0;     // ĥ / δ̂
};

struct Options {
  double proportionality_tol = 1e-6;
  double slack_factor = 3.0;
  double cross_tol = 5e-3;
  double rigidity_tol = 1e-3;
  int poincare_word_length = 10;
  /// Truncation for both C sums; the completeness horizon of each side when empty.
  std::optional<double> truncation;
  int threads = 1;
};

struct StretchReport {
  std::string spec_id;
  std::string spec_hash;
  int n_max = 0;
  double horizon_g = 0.0;
  double horizon_h = 0.0;

  growth::GrowthEstimate h_bowen;
  growth::GrowthEstimate h_counting;
  growth::GrowthEstimate delta_bowen;
  growth::GrowthEstimate delta_counting;
  std::optional<growth::GrowthEstimate> h_poincare;
  std::optional<growth::GrowthEstimate> delta_poincare;

  TruncatedRatio c1_sum;
  TruncatedRatio c2_sum;
  DerivativeRatio c1_der;
  DerivativeRatio c2_der;

  double h_hat = 0.0;
  double delta_hat = 0.0;
  double slack_lower = 0.0;  // ĥ - C1·δ̂
  double slack_upper = 0.0;  // C2·δ̂ - ĥ
  double slack_tol = 0.0;

  bool dominated = false;
  int domination_violations = 0;
  RigidityVerdict rigidity;
  std::vector<Check> checks;
  Options options;

  bool all_pass() const;
};

/// Runs every estimator on the spectrum. Estimator failures are rethrown
/// with the stage name; failed consistency checks are recorded in `checks`.
StretchReport inequality_report(const spectra::PairedSpectrum& ps, const Options& opts = {});

/// Builds the spectrum first and adds the orbit-sum estimates of both sides.
StretchReport inequality_report(const groups::GroupSpec& spec, int n_max, const Options& opts = {});

nlohmann::ordered_json to_json(const growth::GrowthEstimate& e);
nlohmann::ordered_json to_json(const StretchReport& r);

}  // namespace geoflow::stretch
