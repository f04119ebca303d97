#include <cmath>

#include "doctest.h"
#include "geoflow/error.hpp"
#include "geoflow/groups.hpp"
#include "geoflow/spectra.hpp"
#include "geoflow/stretch.hpp"
#include "geoflow/thermo.hpp"

using namespace geoflow;
using namespace geoflow::stretch;

namespace {

spectra::PairedSpectrum build(double eps, std::uint64_t seed, int n_max) {
  auto spec = groups::schottky_fuchsian(2, 4.0, seed);
  if (eps > 0.0) spec = groups::perturb(spec, eps, seed);
  return spectra::build_paired_spectrum(spec, n_max, 4);
}

const spectra::PairedSpectrum& fuchsian() {
  static const auto ps = build(0.0, 1, 10);
  return ps;
}

const spectra::PairedSpectrum& perturbed() {
  static const auto ps = build(1e-2, 2, 10);
  return ps;
}

// Mean l_h / mean l_g under the weights exp(-s·l_g), summed directly.
double weighted_ratio(const spectra::PairedSpectrum& ps, double s, int n) {
  const auto pd = thermo::period_data_from_spectrum(ps);
  double num = 0.0;
  double den = 0.0;
  for (const auto& o : pd.level(n)) {
    const double w = o.multiplicity * std::exp(-s * o.sums[0]);
    num += w * o.sums[1];
    den += w * o.sums[0];
  }
  return num / den;
}

bool check_passed(const StretchReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c.pass;
  FAIL("missing check " << name);
  return false;
}

}  // namespace

TEST_CASE("truncated ratios on proportional spectra") {
  const auto ps = spectra::rescale_h(fuchsian(), 0.7);
  for (double t : {6.0, 8.0, 10.0}) {
    CHECK(std::abs(c2_truncated(ps, t).value - 0.7) <= 1e-12);
    CHECK(std::abs(c1_truncated(ps, 0.7 * t).value - 0.7) <= 1e-12);
  }
  CHECK(c2_truncated(fuchsian(), 8.0).value == 1.0);
  CHECK(c2_truncated(fuchsian(), 8.0).count > 0);
  try {
    c2_truncated(fuchsian(), 1e3);
    FAIL("expected IncompleteWindow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompleteWindow);
  }
}

TEST_CASE("derivative ratios match the direct weighted mean") {
  const auto pd = thermo::period_data_from_spectrum(perturbed());
  const double h = 0.27;
  const auto r = c2_derivative(pd, h, 10);
  CHECK(r.n == 10);
  CHECK(std::abs(r.value - weighted_ratio(perturbed(), h, 10)) <= 1e-9);

  const auto base = thermo::period_data_from_spectrum(fuchsian());
  CHECK(std::abs(c2_derivative(base, h, 10).value - 1.0) <= 1e-6);
  CHECK(std::abs(c1_derivative(base, h, 10).value - 1.0) <= 1e-6);
  const auto scaled = thermo::period_data_from_spectrum(spectra::rescale_h(fuchsian(), 0.7));
  CHECK(std::abs(c2_derivative(scaled, h, 10).value - 0.7) <= 1e-6);
  CHECK(std::abs(c1_derivative(scaled, h / 0.7, 10).value - 0.7) <= 1e-6);
}

TEST_CASE("report on the Fuchsian baseline") {
  const auto r = inequality_report(fuchsian());
  CHECK(std::abs(r.c1_der.value - 1.0) <= 1e-6);
  CHECK(std::abs(r.c2_der.value - 1.0) <= 1e-6);
  CHECK(r.c1_sum.value == 1.0);
  CHECK(r.c2_sum.value == 1.0);
  CHECK(r.h_hat == r.delta_hat);
  CHECK(r.dominated);
  CHECK(r.rigidity.proportional);
  CHECK(r.rigidity.lambda == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.all_pass());
}

TEST_CASE("report on proportional spectra and its swap") {
  const auto ps = spectra::rescale_h(fuchsian(), 0.7);
  const auto r = inequality_report(ps);
  CHECK(r.rigidity.proportional);
  CHECK(std::abs(r.rigidity.lambda - 0.7) <= 1e-9);
  CHECK(std::abs(r.c1_der.value - 0.7) <= 1e-5);
  CHECK(std::abs(r.c2_der.value - 0.7) <= 1e-5);
  CHECK(std::abs(r.h_hat - 0.7 * r.delta_hat) <= 1e-3);
  CHECK(r.all_pass());

  const auto s = inequality_report(spectra::swap_sides(ps));
  CHECK(s.rigidity.proportional);
  CHECK(std::abs(s.rigidity.lambda - 1.0 / 0.7) <= 1e-9);
  CHECK(std::abs(s.h_hat - r.delta_hat) <= 1e-12);
  CHECK(std::abs(s.delta_hat - r.h_hat) <= 1e-12);
  CHECK(s.all_pass());
}

TEST_CASE("report on a perturbed group") {
  const auto r = inequality_report(perturbed());
  CHECK(!r.rigidity.proportional);
  CHECK(r.slack_lower >= -r.slack_tol);
  CHECK(r.slack_upper >= -r.slack_tol);
  CHECK(r.c1_der.value <= r.c2_der.value + 1e-6);
  CHECK(std::abs(r.c2_sum.value - r.c2_der.value) <= 5e-3);
  CHECK(std::abs(r.c1_sum.value - r.c1_der.value) <= 5e-3);
  CHECK(check_passed(r, "lower_bound"));
  CHECK(check_passed(r, "upper_bound"));
  CHECK(check_passed(r, "c1_le_c2"));
  if (r.dominated) CHECK(r.c2_der.value <= 1.0 + 1e-6);
  CHECK(r.all_pass());
}

TEST_CASE("json carries every field") {
  const auto j = to_json(inequality_report(fuchsian()));
  for (const char* key : {"spec_id", "spec_hash", "n_max", "horizon", "growth", "h_hat", "delta_hat", "C1_sum",
                          "C2_sum", "C1_der", "C2_der", "slack_lower", "slack_upper", "slack_tol", "domination",
                          "rigidity", "checks", "tolerances"}) {
    INFO(key);
    CHECK(j.contains(key));
  }
  CHECK(j["growth"].contains("h_bowen"));
  CHECK(j["growth"].contains("delta_counting"));
}
