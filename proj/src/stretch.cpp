#include "geoflow/stretch.hpp"

#include <cmath>
#include <limits>

#include "geoflow/error.hpp"

namespace geoflow::stretch {

namespace {

TruncatedRatio truncated(const spectra::PairedSpectrum& ps, double t, spectra::Side side) {
  const double horizon = spectra::completeness_horizon(ps, side);
  if (t > horizon) {
    throw Error(ErrorCode::IncompleteWindow,
                "truncation " + std::to_string(t) + " beyond completeness horizon " + std::to_string(horizon));
  }
  std::vector<double> lh;
  std::vector<double> lg;
  for (const auto& e : ps.entries) {
    if (!e.primitive || e.length(side) > t) continue;
    lh.push_back(e.l_h);
    lg.push_back(e.l_g);
  }
  if (lg.empty()) throw Error(ErrorCode::IncompleteWindow, "no classes below " + std::to_string(t));
  TruncatedRatio r;
  r.truncation = t;
  r.count = static_cast<int>(lg.size());
  r.value = thermo::pairwise_sum(lh) / thermo::pairwise_sum(lg);
  return r;
}

// d/ds at s = 0 of the level-n pressure of base_coeff·obs_base + s·obs.
// The pressure is centred at the weighted mean S̄ of obs, so
// P(s) - P(0) = s·S̄/n + log1p(Σ p_i expm1(s·(S_i - S̄)))/n, and only the
// small remainder is differenced (central, one Richardson step).
double mean_rate(const thermo::PeriodData& pd, int n, int base_obs, double base_coeff, int obs) {
  const auto& lvl = pd.level(n);
  const auto b = static_cast<std::size_t>(base_obs);
  const auto o = static_cast<std::size_t>(obs);
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& orbit : lvl) top = std::max(top, base_coeff * orbit.sums[b]);
  std::vector<double> p(lvl.size());
  for (std::size_t i = 0; i < lvl.size(); ++i) p[i] = lvl[i].multiplicity * std::exp(base_coeff * lvl[i].sums[b] - top);
  const double total = thermo::pairwise_sum(p);
  std::vector<double> terms(lvl.size());
  for (std::size_t i = 0; i < lvl.size(); ++i) {
    p[i] /= total;
    terms[i] = p[i] * lvl[i].sums[o];
  }
  const double mean = thermo::pairwise_sum(terms);

  auto remainder = [&](double s) {
    for (std::size_t i = 0; i < lvl.size(); ++i) terms[i] = p[i] * std::expm1(s * (lvl[i].sums[o] - mean));
    return std::log1p(thermo::pairwise_sum(terms));
  };
  auto central = [&](double h) { return (remainder(h) - remainder(-h)) / (2.0 * h); };
  const double correction = (4.0 * central(0.5 * kDerivativeStep) - central(kDerivativeStep)) / 3.0;
  return (mean + correction) / n;
}

DerivativeRatio derivative_ratio(const thermo::PeriodData& pd, int base_obs, double rate, int n) {
  DerivativeRatio r;
  r.n = n;
  r.d_h = mean_rate(pd, n, base_obs, -rate, 1);
  r.d_g = mean_rate(pd, n, base_obs, -rate, 0);
  r.value = r.d_h / r.d_g;
  return r;
}

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.detail());
  }
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

TruncatedRatio c2_truncated(const spectra::PairedSpectrum& ps, double t) {
  return truncated(ps, t, spectra::Side::G);
}

TruncatedRatio c1_truncated(const spectra::PairedSpectrum& ps, double t) {
  return truncated(ps, t, spectra::Side::H);
}

DerivativeRatio c2_derivative(const thermo::PeriodData& pd, double h_g, int n) {
  return derivative_ratio(pd, 0, h_g, n);
}

DerivativeRatio c1_derivative(const thermo::PeriodData& pd, double delta_h, int n) {
  return derivative_ratio(pd, 1, delta_h, n);
}

bool StretchReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

StretchReport inequality_report(const spectra::PairedSpectrum& ps, const Options& opts) {
  StretchReport r;
  r.options = opts;
  r.spec_id = ps.spec_id;
  r.n_max = ps.n_max;
  r.horizon_g = spectra::completeness_horizon(ps, spectra::Side::G);
  r.horizon_h = spectra::completeness_horizon(ps, spectra::Side::H);

  r.h_bowen = stage("bowen_root(g)", [&] { return growth::bowen_root(ps, spectra::Side::G); });
  r.delta_bowen = stage("bowen_root(h)", [&] { return growth::bowen_root(ps, spectra::Side::H); });
  r.h_counting = stage("counting_estimate(g)", [&] { return growth::counting_estimate(ps, spectra::Side::G); });
  r.delta_counting = stage("counting_estimate(h)", [&] { return growth::counting_estimate(ps, spectra::Side::H); });
  r.h_hat = r.h_bowen.value;
  r.delta_hat = r.delta_bowen.value;

  r.c2_sum = stage("c2_truncated", [&] { return c2_truncated(ps, opts.truncation.value_or(r.horizon_g)); });
  r.c1_sum = stage("c1_truncated", [&] { return c1_truncated(ps, opts.truncation.value_or(r.horizon_h)); });
  const auto pd = thermo::period_data_from_spectrum(ps);
  r.c2_der = stage("c2_derivative", [&] { return c2_derivative(pd, r.h_hat, ps.n_max); });
  r.c1_der = stage("c1_derivative", [&] { return c1_derivative(pd, r.delta_hat, ps.n_max); });

  r.slack_lower = r.h_hat - r.c1_der.value * r.delta_hat;
  r.slack_upper = r.c2_der.value * r.delta_hat - r.h_hat;
  const double c1_gap = std::abs(r.c1_sum.value - r.c1_der.value);
  const double c2_gap = std::abs(r.c2_sum.value - r.c2_der.value);
  r.slack_tol = opts.slack_factor *
                (r.h_bowen.diagnostic() + r.delta_bowen.diagnostic() + r.delta_hat * (c1_gap + c2_gap));

  auto check = [&](std::string name, bool pass, std::string detail) {
    r.checks.push_back(Check{std::move(name), pass, std::move(detail)});
  };
  check("lower_bound", r.slack_lower >= -r.slack_tol,
        "h - C1*delta = " + fmt(r.slack_lower) + ", tol " + fmt(r.slack_tol));
  check("upper_bound", r.slack_upper >= -r.slack_tol,
        "C2*delta - h = " + fmt(r.slack_upper) + ", tol " + fmt(r.slack_tol));
  check("c1_le_c2", r.c1_der.value <= r.c2_der.value + 1e-6,
        "C1 = " + fmt(r.c1_der.value) + ", C2 = " + fmt(r.c2_der.value));
  check("c1_cross", c1_gap <= opts.cross_tol, "|C1_sum - C1_der| = " + fmt(c1_gap));
  check("c2_cross", c2_gap <= opts.cross_tol, "|C2_sum - C2_der| = " + fmt(c2_gap));

  const auto dom = spectra::domination_check(ps);
  r.dominated = dom.all_dominated;
  r.domination_violations = static_cast<int>(dom.violations.size());
  if (r.dominated) {
    const double top = std::max({r.c1_sum.value, r.c2_sum.value, r.c1_der.value, r.c2_der.value});
    check("constants_le_one", top <= 1.0 + 1e-6, "max C = " + fmt(top));
  }

  r.rigidity.delta_over_h = r.delta_hat / r.h_hat;
  r.rigidity.h_over_delta = r.h_hat / r.delta_hat;
  if (const auto lambda = spectra::proportionality_test(ps, opts.proportionality_tol)) {
    r.rigidity.proportional = true;
    r.rigidity.lambda = *lambda;
    const double tol = opts.rigidity_tol;
    check("rigidity_constants",
          std::abs(r.c1_sum.value - *lambda) <= tol && std::abs(r.c2_sum.value - *lambda) <= tol &&
              std::abs(r.c1_der.value - *lambda) <= tol && std::abs(r.c2_der.value - *lambda) <= tol,
          "lambda = " + fmt(*lambda));
    check("rigidity_entropy", std::abs(r.h_hat - *lambda * r.delta_hat) <= tol,
          "h - lambda*delta = " + fmt(r.h_hat - *lambda * r.delta_hat));
  }
  return r;
}

StretchReport inequality_report(const groups::GroupSpec& spec, int n_max, const Options& opts) {
  const auto ps = stage("spectrum", [&] { return spectra::build_paired_spectrum(spec, n_max, opts.threads); });
  StretchReport r = inequality_report(ps, opts);
  r.spec_hash = groups::spec_hash(spec);
  const mobius::Point base{0.0, 1.0};
  r.h_poincare = stage("poincare_estimate(g)",
                       [&] { return growth::poincare_estimate(spec.gens_g, base, opts.poincare_word_length); });
  r.delta_poincare = stage("poincare_estimate(h)",
                           [&] { return growth::poincare_estimate(spec.gens_h, base, opts.poincare_word_length); });
  return r;
}

nlohmann::ordered_json to_json(const growth::GrowthEstimate& e) {
  nlohmann::ordered_json j;
  j["value"] = e.value;
  j["method"] = growth::to_string(e.method);
  j["window"] = {e.window_lo, e.window_hi};
  j["samples"] = e.samples;
  j["std_error"] = e.std_error;
  j["residual"] = e.residual;
  j["bracket_width"] = e.bracket_width;
  j["stability_gap"] = e.stability_gap;
  j["diagnostic"] = e.diagnostic();
  return j;
}

nlohmann::ordered_json to_json(const StretchReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["spec_id"] = r.spec_id;
  j["spec_hash"] = r.spec_hash;
  j["n_max"] = r.n_max;
  j["horizon"] = {{"g", r.horizon_g}, {"h", r.horizon_h}};
  ordered_json g;
  g["h_bowen"] = to_json(r.h_bowen);
  g["h_counting"] = to_json(r.h_counting);
  if (r.h_poincare) g["h_poincare"] = to_json(*r.h_poincare);
  g["delta_bowen"] = to_json(r.delta_bowen);
  g["delta_counting"] = to_json(r.delta_counting);
  if (r.delta_poincare) g["delta_poincare"] = to_json(*r.delta_poincare);
  j["growth"] = g;
  j["h_hat"] = r.h_hat;
  j["delta_hat"] = r.delta_hat;
  j["C1_sum"] = {{"value", r.c1_sum.value}, {"T", r.c1_sum.truncation}, {"count", r.c1_sum.count}};
  j["C2_sum"] = {{"value", r.c2_sum.value}, {"T", r.c2_sum.truncation}, {"count", r.c2_sum.count}};
  j["C1_der"] = {{"value", r.c1_der.value}, {"n", r.c1_der.n}, {"step", kDerivativeStep}};
  j["C2_der"] = {{"value", r.c2_der.value}, {"n", r.c2_der.n}, {"step", kDerivativeStep}};
  j["slack_lower"] = r.slack_lower;
  j["slack_upper"] = r.slack_upper;
  j["slack_tol"] = r.slack_tol;
  j["domination"] = {{"all_dominated", r.dominated}, {"violations", r.domination_violations}};
  ordered_json rig;
  rig["proportional"] = r.rigidity.proportional;
  if (r.rigidity.proportional) {
    rig["lambda"] = r.rigidity.lambda;
  } else {
    rig["lambda"] = nullptr;
  }
  rig["delta_over_h"] = r.rigidity.delta_over_h;
  rig["h_over_delta"] = r.rigidity.h_over_delta;
  j["rigidity"] = rig;
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["checks"] = checks;
  j["all_pass"] = r.all_pass();
  j["tolerances"] = {{"proportionality", r.options.proportionality_tol},
                     {"slack_factor", r.options.slack_factor},
                     {"cross", r.options.cross_tol},
                     {"rigidity", r.options.rigidity_tol}};
  return j;
}

}  // namespace geoflow::stretch
