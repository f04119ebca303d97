#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoflow/spectra.hpp"

namespace geoflow::thermo {

/// Subshift of finite type on symbols 0..m-1.
struct MarkovShift {
  int alphabet = 0;
  std::vector<std::uint8_t> transitions;  // row-major m×m, 1 = allowed

  bool allowed(int from, int to) const {
    return transitions[static_cast<std::size_t>(from * alphabet + to)] != 0;
  }

  static MarkovShift full(int m);
  static MarkovShift golden_mean();
  /// Non-backtracking shift of the rank-k free group on letter codes 0..2k-1.
  static MarkovShift free_group(int rank);
};

/// Throws ShiftNotPrimitive unless some power of the transition matrix is
/// strictly positive (irreducible and aperiodic).
void check_primitive(const MarkovShift& shift);

/// Locally constant function: value depends on the first `depth` symbols.
/// Weights are indexed by the base-m encoding of the cylinder word
/// (first symbol most significant); entries on forbidden words are ignored.
struct Potential {
  int depth = 1;
  std::vector<double> weights;

  static Potential constant(int alphabet, double value);
  static Potential per_symbol(std::vector<double> values);
  /// Depth-2 coboundary V(x1) - V(x0) of a per-symbol V.
  static Potential coboundary(std::span<const double> v);

  double at(std::span<const int> word, int alphabet) const;
  Potential lifted(int alphabet, int new_depth) const;
};

/// a + t·b at the larger of the two depths.
Potential axpy(const Potential& a, double t, const Potential& b, int alphabet);

struct GibbsData {
  double pressure = 0.0;
  double eigenvalue = 1.0;
  int depth = 1;
  /// Allowed cylinders of length `depth`, as symbol words.
  std::vector<std::vector<int>> cylinders;
  std::vector<double> right;
  std::vector<double> left;
  /// Stationary cylinder masses u_i v_i, normalized to sum 1.
  std::vector<double> measure;
  /// ||L v - λ v||_∞ / λ with max(v) = 1.
  double residual = 0.0;
};

inline constexpr int kMaxPowerIterations = 100000;

/// Equilibrium data of `pot` via the weighted transfer matrix on allowed
/// cylinders of length max(pot.depth, min_depth).
GibbsData gibbs(const MarkovShift& shift, const Potential& pot, int min_depth = 1);

/// log of the leading eigenvalue of the transfer matrix.
double transfer_pressure(const MarkovShift& shift, const Potential& pot);

/// ∫ obs d(measure) for a Gibbs state; obs depth must not exceed g.depth.
double integrate(const GibbsData& g, const Potential& obs, int alphabet);

/// Kolmogorov-Sinai entropy of the Gibbs state, from its Markov transition
/// probabilities on cylinders.
double measure_entropy(const MarkovShift& shift, const GibbsData& g, const Potential& pot);

/// ∫G dm_F, cross-checked against a central difference of t ↦ P(F + tG).
/// Throws DerivativeMismatch when the two disagree by more than 1e-6.
double equilibrium_average(const MarkovShift& shift, const Potential& f, const Potential& g);

/// Asymptotic variance of G under m_F, as the second derivative of pressure.
double variance(const MarkovShift& shift, const Potential& f, const Potential& g);

struct PressureMetric {
  double variance_form = 0.0;
  std::optional<double> second_derivative_form;
};

/// ||ċ||² on the pressure-zero slice at c0. When cddot is given, the
/// second form ∫c̈ dm / ∫c0 dm is also returned and must agree to 1e-6.
PressureMetric pressure_metric_norm(const MarkovShift& shift, const Potential& c0, const Potential& cdot,
                                    const std::optional<Potential>& cddot = std::nullopt);

// ---------------------------------------------------------------------------
// Periodic-orbit backend.

struct Orbit {
  /// Number of periodic points this record stands for.
  double multiplicity = 1.0;
  /// Birkhoff sums, one per observable.
  std::vector<double> sums;
};

struct PeriodData {
  int n_max = 0;
  std::vector<std::string> observables;
  /// levels[n] holds period-n orbits; levels[0] is unused.
  std::vector<std::vector<Orbit>> levels;

  const std::vector<Orbit>& level(int n) const;
  int observable(const std::string& name) const;
  double point_count(int n) const;
};

/// Every periodic point of period n <= n_max, with Birkhoff sums of the
/// given potentials. Observable names are "obs0", "obs1", ...
PeriodData period_data_from_shift(const MarkovShift& shift, std::span<const Potential> observables, int n_max);

/// Periodic points of the free-group shift carrying l_g and l_h. Each class
/// of word length n stands for 2·p points (p rotations, folded inverse).
PeriodData period_data_from_spectrum(const spectra::PairedSpectrum& ps);

/// Deterministic pairwise sum.
double pairwise_sum(std::span<const double> values);

/// (1/n)·log Σ mult·exp(Σ_j coeffs[j]·sum_j) over period-n orbits.
double orbit_log_sum(const PeriodData& pd, int n, std::span<const double> coeffs);

/// (1/n)·log Σ exp(-s · Birkhoff sum of observable `obs`).
double orbit_pressure(const PeriodData& pd, int obs, double s, int n);

struct BowenRoot {
  double root = 0.0;
  double residual = 0.0;
  double bracket_width = 0.0;
  /// |root(n) - root(n - 2)|, zero when n - 2 < 1.
  double stability_gap = 0.0;
  int n = 0;
};

/// Root in s of orbit_pressure(pd, obs, s, n) by bisection.
BowenRoot bowen_solve(const PeriodData& pd, int obs, int n);
inline BowenRoot bowen_solve(const PeriodData& pd, int obs) { return bowen_solve(pd, obs, pd.n_max); }

/// Σ mult·S_obs / Σ mult·S_roof over period-n orbits.
double equidistribution_average(const PeriodData& pd, int roof, int obs, int n);

enum class LivsicKind { AllZero, AllPositive, Mixed };

struct LivsicVerdict {
  LivsicKind kind = LivsicKind::Mixed;
  /// (period, orbit index) of orbits that are neither zero nor positive.
  std::vector<std::pair<int, std::size_t>> witnesses;
};

/// Classifies the periodic Birkhoff sums of Σ_j coeffs[j]·obs_j.
LivsicVerdict livsic_coboundary_check(const PeriodData& pd, std::span<const double> coeffs);

struct AbramovResult {
  double entropy = 0.0;       // h*, Bowen root of the roof
  double mean_roof = 0.0;     // ∫F dm_{-h*F}
  double measure_entropy = 0.0;
  double bowen_residual = 0.0;
  double residual = 0.0;
};

AbramovResult abramov_check(const MarkovShift& shift, const Potential& roof, int n_max);

}  // namespace geoflow::thermo
