#include "geoflow/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoflow/error.hpp"

namespace geoflow::thermo {

MarkovShift MarkovShift::full(int m) {
  return MarkovShift{m, std::vector<std::uint8_t>(static_cast<std::size_t>(m * m), 1)};
}

MarkovShift MarkovShift::golden_mean() { return MarkovShift{2, {1, 1, 1, 0}}; }

MarkovShift MarkovShift::free_group(int rank) {
  const int m = 2 * rank;
  MarkovShift shift = full(m);
  for (int x = 0; x < m; ++x) shift.transitions[static_cast<std::size_t>(x * m + (x ^ 1))] = 0;
  return shift;
}

void check_primitive(const MarkovShift& shift) {
  const int m = shift.alphabet;
  if (m < 1 || shift.transitions.size() != static_cast<std::size_t>(m * m)) {
    throw Error(ErrorCode::ShiftNotPrimitive, "transition matrix has wrong shape");
  }
  std::vector<std::uint8_t> power = shift.transitions;
  const int bound = (m - 1) * (m - 1) + 1;
  for (int k = 1; k <= bound; ++k) {
    if (std::all_of(power.begin(), power.end(), [](std::uint8_t b) { return b != 0; })) return;
    std::vector<std::uint8_t> next(power.size(), 0);
    for (int i = 0; i < m; ++i) {
      for (int l = 0; l < m; ++l) {
        if (!power[static_cast<std::size_t>(i * m + l)]) continue;
        for (int j = 0; j < m; ++j) {
          if (shift.allowed(l, j)) next[static_cast<std::size_t>(i * m + j)] = 1;
        }
      }
    }
    power = std::move(next);
  }
  throw Error(ErrorCode::ShiftNotPrimitive, "transition matrix is not irreducible and aperiodic");
}

namespace {

std::size_t ipow(int base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) out *= static_cast<std::size_t>(base);
  return out;
}

std::size_t encode(std::span<const int> word, int alphabet) {
  std::size_t code = 0;
  for (int x : word) code = code * static_cast<std::size_t>(alphabet) + static_cast<std::size_t>(x);
  return code;
}

}  // namespace

Potential Potential::constant(int alphabet, double value) {
  return Potential{1, std::vector<double>(static_cast<std::size_t>(alphabet), value)};
}

Potential Potential::per_symbol(std::vector<double> values) { return Potential{1, std::move(values)}; }

Potential Potential::coboundary(std::span<const double> v) {
  const int m = static_cast<int>(v.size());
  Potential p{2, std::vector<double>(static_cast<std::size_t>(m * m))};
  for (int x0 = 0; x0 < m; ++x0) {
    for (int x1 = 0; x1 < m; ++x1) p.weights[static_cast<std::size_t>(x0 * m + x1)] = v[x1] - v[x0];
  }
  return p;
}

double Potential::at(std::span<const int> word, int alphabet) const {
  return weights[encode(word.first(static_cast<std::size_t>(depth)), alphabet)];
}

Potential Potential::lifted(int alphabet, int new_depth) const {
  if (new_depth <= depth) return *this;
  const std::size_t stride = ipow(alphabet, new_depth - depth);
  Potential out{new_depth, std::vector<double>(ipow(alphabet, new_depth))};
  for (std::size_t c = 0; c < out.weights.size(); ++c) out.weights[c] = weights[c / stride];
  return out;
}

Potential axpy(const Potential& a, double t, const Potential& b, int alphabet) {
  const int depth = std::max(a.depth, b.depth);
  Potential out = a.lifted(alphabet, depth);
  const Potential lb = b.lifted(alphabet, depth);
  for (std::size_t i = 0; i < out.weights.size(); ++i) out.weights[i] += t * lb.weights[i];
  return out;
}

namespace {

struct CylinderGraph {
  int depth = 1;
  std::vector<std::vector<int>> words;
  std::vector<std::vector<std::size_t>> successors;
};

CylinderGraph cylinder_graph(const MarkovShift& shift, int depth) {
  const int m = shift.alphabet;
  CylinderGraph g;
  g.depth = depth;
  std::vector<int> word;
  auto extend = [&](auto&& self) -> void {
    if (static_cast<int>(word.size()) == depth) {
      g.words.push_back(word);
      return;
    }
    for (int x = 0; x < m; ++x) {
      if (!word.empty() && !shift.allowed(word.back(), x)) continue;
      word.push_back(x);
      self(self);
      word.pop_back();
    }
  };
  extend(extend);

  std::vector<std::ptrdiff_t> index(ipow(m, depth), -1);
  for (std::size_t i = 0; i < g.words.size(); ++i) index[encode(g.words[i], m)] = static_cast<std::ptrdiff_t>(i);
  g.successors.resize(g.words.size());
  for (std::size_t i = 0; i < g.words.size(); ++i) {
    std::vector<int> next(g.words[i].begin() + 1, g.words[i].end());
    next.push_back(0);
    for (int x = 0; x < m; ++x) {
      if (!shift.allowed(g.words[i].back(), x)) continue;
      next.back() = x;
      g.successors[i].push_back(static_cast<std::size_t>(index[encode(next, m)]));
    }
  }
  return g;
}

// Leading eigenvector of the nonnegative matrix given by `apply`; the
// returned vector has max entry 1.
template <class Apply>
std::vector<double> perron_vector(std::size_t n, Apply apply) {
  std::vector<double> v(n, 1.0);
  std::vector<double> w(n);
  double lambda_prev = 0.0;
  int stable = 0;
  for (int it = 0; it < kMaxPowerIterations; ++it) {
    apply(v, w);
    const double top = *std::max_element(w.begin(), w.end());
    if (!(top > 0.0) || !std::isfinite(top)) {
      throw Error(ErrorCode::EigenStall, "power iteration lost positivity");
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] /= top;
      change = std::max(change, std::abs(w[i] - v[i]));
    }
    v.swap(w);
    if (change <= 1e-15) return v;
    // Roundoff floor: the eigenvalue estimate has settled to 1e-13.
    stable = std::abs(top - lambda_prev) <= 1e-13 * top ? stable + 1 : 0;
    lambda_prev = top;
    if (stable >= 50) return v;
  }
  throw Error(ErrorCode::EigenStall, "no convergence in " + std::to_string(kMaxPowerIterations) + " iterations");
}

}  // namespace

GibbsData gibbs(const MarkovShift& shift, const Potential& pot, int min_depth) {
  check_primitive(shift);
  const int m = shift.alphabet;
  const int depth = std::max(pot.depth, min_depth);
  const Potential p = pot.lifted(m, depth);
  const CylinderGraph graph = cylinder_graph(shift, depth);
  const std::size_t n = graph.words.size();

  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = std::exp(p.at(graph.words[i], m));

  auto right_apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j : graph.successors[i]) s += v[j];
      out[i] = weight[i] * s;
    }
  };
  auto left_apply = [&](const std::vector<double>& u, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j : graph.successors[i]) out[j] += u[i] * weight[i];
    }
  };

  GibbsData g;
  g.depth = depth;
  g.cylinders = graph.words;
  g.right = perron_vector(n, right_apply);
  g.left = perron_vector(n, left_apply);

  std::vector<double> mv(n);
  right_apply(g.right, mv);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += g.left[i] * mv[i];
    den += g.left[i] * g.right[i];
  }
  g.eigenvalue = num / den;
  g.pressure = std::log(g.eigenvalue);
  g.residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g.residual = std::max(g.residual, std::abs(mv[i] - g.eigenvalue * g.right[i]) / g.eigenvalue);
  }

  g.measure.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.measure[i] = g.left[i] * g.right[i] / den;
  return g;
}

double transfer_pressure(const MarkovShift& shift, const Potential& pot) { return gibbs(shift, pot).pressure; }

double integrate(const GibbsData& g, const Potential& obs, int alphabet) {
  if (obs.depth > g.depth) {
    throw Error(ErrorCode::DerivativeMismatch, "observable deeper than the Gibbs cylinders");
  }
  std::vector<double> terms(g.measure.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = g.measure[i] * obs.at(g.cylinders[i], alphabet);
  return pairwise_sum(terms);
}

double measure_entropy(const MarkovShift& shift, const GibbsData& g, const Potential& pot) {
  const int m = shift.alphabet;
  const Potential p = pot.lifted(m, g.depth);
  const CylinderGraph graph = cylinder_graph(shift, g.depth);
  std::vector<double> terms;
  for (std::size_t i = 0; i < graph.words.size(); ++i) {
    const double w = std::exp(p.at(graph.words[i], m));
    for (std::size_t j : graph.successors[i]) {
      const double prob = w * g.right[j] / (g.eigenvalue * g.right[i]);
      if (prob > 0.0) terms.push_back(-g.measure[i] * prob * std::log(prob));
    }
  }
  return pairwise_sum(terms);
}

double equilibrium_average(const MarkovShift& shift, const Potential& f, const Potential& g) {
  const int m = shift.alphabet;
  const GibbsData data = gibbs(shift, f, g.depth);
  const double direct = integrate(data, g, m);
  constexpr double step = 1e-5;
  const double fd = (transfer_pressure(shift, axpy(f, step, g, m)) - transfer_pressure(shift, axpy(f, -step, g, m))) /
                    (2.0 * step);
  if (std::abs(direct - fd) > 1e-6) {
    throw Error(ErrorCode::DerivativeMismatch, "measure average " + std::to_string(direct) +
                                                   " vs pressure derivative " + std::to_string(fd));
  }
  return direct;
}

double variance(const MarkovShift& shift, const Potential& f, const Potential& g) {
  const int m = shift.alphabet;
  const double mean = integrate(gibbs(shift, f, g.depth), g, m);
  Potential centred = g;
  for (double& w : centred.weights) w -= mean;

  const double p0 = transfer_pressure(shift, f);
  auto second_difference = [&](double h) {
    const double plus = transfer_pressure(shift, axpy(f, h, centred, m));
    const double minus = transfer_pressure(shift, axpy(f, -h, centred, m));
    return (plus - 2.0 * p0 + minus) / (h * h);
  };
  constexpr double step = 1e-3;
  const double value = (4.0 * second_difference(step / 2.0) - second_difference(step)) / 3.0;
  if (value < -1e-7) {
    throw Error(ErrorCode::NumericalInstability, "negative variance " + std::to_string(value));
  }
  return value <= 1e-9 ? 0.0 : value;
}

PressureMetric pressure_metric_norm(const MarkovShift& shift, const Potential& c0, const Potential& cdot,
                                    const std::optional<Potential>& cddot) {
  const int m = shift.alphabet;
  const int depth = std::max({c0.depth, cdot.depth, cddot ? cddot->depth : 1});
  const GibbsData data = gibbs(shift, c0, depth);
  if (std::abs(data.pressure) > 1e-8) {
    throw Error(ErrorCode::NotInPressureZeroSlice, "P(c0) = " + std::to_string(data.pressure));
  }
  const double drift = integrate(data, cdot, m);
  if (std::abs(drift) > 1e-8) {
    throw Error(ErrorCode::NotInPressureZeroSlice, "velocity has mean " + std::to_string(drift));
  }
  const double base = integrate(data, c0, m);
  PressureMetric out;
  out.variance_form = variance(shift, c0, cdot) / (-base);
  if (cddot) {
    out.second_derivative_form = integrate(data, *cddot, m) / base;
    if (std::abs(*out.second_derivative_form - out.variance_form) > 1e-6) {
      throw Error(ErrorCode::DerivativeMismatch,
                  "pressure metric forms disagree: " + std::to_string(out.variance_form) + " vs " +
                      std::to_string(*out.second_derivative_form));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

const std::vector<Orbit>& PeriodData::level(int n) const {
  if (n < 1 || n > n_max) throw Error(ErrorCode::NoOrbits, "period " + std::to_string(n) + " not stored");
  const auto& lvl = levels[static_cast<std::size_t>(n)];
  if (lvl.empty()) throw Error(ErrorCode::NoOrbits, "no orbits of period " + std::to_string(n));
  return lvl;
}

int PeriodData::observable(const std::string& name) const {
  for (std::size_t i = 0; i < observables.size(); ++i) {
    if (observables[i] == name) return static_cast<int>(i);
  }
  throw Error(ErrorCode::NoOrbits, "unknown observable " + name);
}

double PeriodData::point_count(int n) const {
  std::vector<double> mult;
  for (const auto& o : level(n)) mult.push_back(o.multiplicity);
  return pairwise_sum(mult);
}

PeriodData period_data_from_shift(const MarkovShift& shift, std::span<const Potential> observables, int n_max) {
  const int m = shift.alphabet;
  PeriodData pd;
  pd.n_max = n_max;
  for (std::size_t j = 0; j < observables.size(); ++j) pd.observables.push_back("obs" + std::to_string(j));
  pd.levels.resize(static_cast<std::size_t>(n_max + 1));

  int max_depth = 1;
  for (const auto& p : observables) max_depth = std::max(max_depth, p.depth);
  std::vector<int> seq;
  std::vector<int> window(static_cast<std::size_t>(max_depth));
  for (int n = 1; n <= n_max; ++n) {
    auto& lvl = pd.levels[static_cast<std::size_t>(n)];
    auto extend = [&](auto&& self) -> void {
      if (static_cast<int>(seq.size()) == n) {
        if (!shift.allowed(seq.back(), seq.front())) return;
        Orbit orbit;
        orbit.sums.assign(observables.size(), 0.0);
        for (int i = 0; i < n; ++i) {
          for (int r = 0; r < max_depth; ++r) window[static_cast<std::size_t>(r)] = seq[static_cast<std::size_t>((i + r) % n)];
          for (std::size_t j = 0; j < observables.size(); ++j) orbit.sums[j] += observables[j].at(window, m);
        }
        lvl.push_back(std::move(orbit));
        return;
      }
      for (int x = 0; x < m; ++x) {
        if (!seq.empty() && !shift.allowed(seq.back(), x)) continue;
        seq.push_back(x);
        self(self);
        seq.pop_back();
      }
    };
    extend(extend);
  }
  return pd;
}

PeriodData period_data_from_spectrum(const spectra::PairedSpectrum& ps) {
  PeriodData pd;
  pd.n_max = ps.n_max;
  pd.observables = {"l_g", "l_h"};
  pd.levels.resize(static_cast<std::size_t>(ps.n_max + 1));
  for (const auto& e : ps.entries) {
    const int n = e.word_length;
    int period = n;
    for (int p = 1; p < n; ++p) {
      if (n % p == 0 && groups::rotate(e.word, static_cast<std::size_t>(p)) == e.word) {
        period = p;
        break;
      }
    }
    const double mult = (ps.inversion_folded ? 2.0 : 1.0) * period;
    pd.levels[static_cast<std::size_t>(n)].push_back(Orbit{mult, {e.l_g, e.l_h}});
  }
  return pd;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double orbit_log_sum(const PeriodData& pd, int n, std::span<const double> coeffs) {
  const auto& lvl = pd.level(n);
  std::vector<double> exponents(lvl.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lvl.size(); ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      if (coeffs[j] != 0.0) e += coeffs[j] * lvl[i].sums[j];
    }
    exponents[i] = e;
    top = std::max(top, e);
  }
  std::vector<double> terms(lvl.size());
  for (std::size_t i = 0; i < lvl.size(); ++i) terms[i] = lvl[i].multiplicity * std::exp(exponents[i] - top);
  return (top + std::log(pairwise_sum(terms))) / n;
}

double orbit_pressure(const PeriodData& pd, int obs, double s, int n) {
  std::vector<double> coeffs(pd.observables.size(), 0.0);
  coeffs.at(static_cast<std::size_t>(obs)) = -s;
  return orbit_log_sum(pd, n, coeffs);
}

namespace {

BowenRoot bisect_root(const PeriodData& pd, int obs, int n) {
  const auto& lvl = pd.level(n);
  double min_rate = std::numeric_limits<double>::infinity();
  for (const auto& o : lvl) min_rate = std::min(min_rate, o.sums[static_cast<std::size_t>(obs)] / n);
  if (!(min_rate > 0.0)) {
    throw Error(ErrorCode::BracketFailure, "observable has a nonpositive periodic sum at period " + std::to_string(n));
  }
  double lo = 0.0;
  const double p0 = orbit_pressure(pd, obs, 0.0, n);
  if (!(p0 > 0.0)) throw Error(ErrorCode::BracketFailure, "pressure at s = 0 is not positive");
  double hi = p0 / min_rate;
  for (int tries = 0; orbit_pressure(pd, obs, hi, n) > 0.0; ++tries) {
    if (tries == 8) throw Error(ErrorCode::BracketFailure, "no sign change up to s = " + std::to_string(hi));
    hi *= 1.01;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (orbit_pressure(pd, obs, mid, n) > 0.0 ? lo : hi) = mid;
  }
  BowenRoot out;
  out.n = n;
  out.root = 0.5 * (lo + hi);
  out.bracket_width = hi - lo;
  out.residual = std::abs(orbit_pressure(pd, obs, out.root, n));
  return out;
}

}  // namespace

BowenRoot bowen_solve(const PeriodData& pd, int obs, int n) {
  BowenRoot out = bisect_root(pd, obs, n);
  if (n - 2 >= 1) out.stability_gap = std::abs(out.root - bisect_root(pd, obs, n - 2).root);
  return out;
}

double equidistribution_average(const PeriodData& pd, int roof, int obs, int n) {
  const auto& lvl = pd.level(n);
  std::vector<double> num(lvl.size());
  std::vector<double> den(lvl.size());
  for (std::size_t i = 0; i < lvl.size(); ++i) {
    num[i] = lvl[i].multiplicity * lvl[i].sums[static_cast<std::size_t>(obs)];
    den[i] = lvl[i].multiplicity * lvl[i].sums[static_cast<std::size_t>(roof)];
  }
  return pairwise_sum(num) / pairwise_sum(den);
}

LivsicVerdict livsic_coboundary_check(const PeriodData& pd, std::span<const double> coeffs) {
  bool all_zero = true;
  bool all_positive = true;
  LivsicVerdict v;
  for (int n = 1; n <= pd.n_max; ++n) {
    const auto& lvl = pd.levels[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < lvl.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < coeffs.size(); ++j) s += coeffs[j] * lvl[i].sums[j];
      const bool zero = std::abs(s) <= 1e-8 * n;
      all_zero = all_zero && zero;
      if (!(s > 0.0)) {
        all_positive = false;
        if (!zero && v.witnesses.size() < 16) v.witnesses.emplace_back(n, i);
      }
    }
  }
  if (all_zero) {
    v.kind = LivsicKind::AllZero;
    v.witnesses.clear();
  } else if (all_positive) {
    v.kind = LivsicKind::AllPositive;
  } else {
    v.kind = LivsicKind::Mixed;
  }
  return v;
}

AbramovResult abramov_check(const MarkovShift& shift, const Potential& roof, int n_max) {
  for (double w : roof.weights) {
    if (!(w > 0.0)) throw Error(ErrorCode::BracketFailure, "roof function must be positive");
  }
  const Potential observables[] = {roof};
  const PeriodData pd = period_data_from_shift(shift, observables, n_max);
  const BowenRoot root = bowen_solve(pd, 0, n_max);

  Potential tilted = roof;
  for (double& w : tilted.weights) w *= -root.root;
  const GibbsData data = gibbs(shift, tilted);

  AbramovResult out;
  out.entropy = root.root;
  out.bowen_residual = root.residual;
  out.mean_roof = integrate(data, roof, shift.alphabet);
  out.measure_entropy = measure_entropy(shift, data, tilted);
  out.residual = std::abs(out.measure_entropy - root.root * out.mean_roof) + root.residual;
  return out;
}

}  // namespace geoflow::thermo
