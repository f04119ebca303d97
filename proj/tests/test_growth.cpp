#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "geoflow/error.hpp"
#include "geoflow/groups.hpp"
#include "geoflow/growth.hpp"
#include "geoflow/spectra.hpp"

using namespace geoflow;
using namespace geoflow::growth;
using spectra::Side;

namespace {

const spectra::PairedSpectrum& baseline(double separation, int n_max) {
  static std::map<std::pair<double, int>, spectra::PairedSpectrum> cache;
  auto key = std::make_pair(separation, n_max);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, spectra::build_paired_spectrum(groups::schottky_fuchsian(2, separation, 1), n_max, 4)).first;
  return it->second;
}

}  // namespace

TEST_CASE("counting fit on an exact exponential") {
  // N(T) = floor(e^{0.8T}): the k-th length is log(k)/0.8.
  std::vector<double> lengths;
  for (int k = 1; k <= 200000; ++k) lengths.push_back(std::log(static_cast<double>(k)) / 0.8);
  const auto e = counting_estimate(lengths, 7.5, 15.0, 15.2);
  CHECK(e.method == Method::CountingFit);
  CHECK(std::abs(e.value - 0.8) <= 1e-6);
  CHECK(e.samples > kMinWindowClasses);
}

TEST_CASE("counting fit window errors") {
  std::vector<double> lengths;
  for (int k = 1; k <= 100; ++k) lengths.push_back(0.1 * k);
  try {
    counting_estimate(lengths, 1.0, 9.0, 8.0);
    FAIL("expected IncompleteWindow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompleteWindow);
  }
  try {
    counting_estimate(lengths, 1.0, 2.0, 8.0);
    FAIL("expected IncompleteWindow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompleteWindow);
  }
}

TEST_CASE("baseline: both sides agree") {
  const auto& ps = baseline(4.0, 10);
  CHECK(std::abs(counting_estimate(ps, Side::G).value - counting_estimate(ps, Side::H).value) <= 1e-12);
  CHECK(bowen_root(ps, Side::G).value == bowen_root(ps, Side::H).value);
}

TEST_CASE("counting fit agrees with the Bowen root") {
  const auto& ps = baseline(4.0, 10);
  const auto b = bowen_root(ps, Side::G);
  const auto c = counting_estimate(ps, Side::G);
  CHECK(std::abs(b.value - c.value) <= 3.0 * (b.diagnostic() + c.diagnostic()));
  CHECK(b.residual <= 1e-10);
}

TEST_CASE("Bowen root self-convergence") {
  const auto b10 = bowen_root(baseline(4.0, 10), Side::G);
  const auto b12 = bowen_root(baseline(4.0, 12), Side::G);
  CHECK(std::abs(b10.value - b12.value) < 1e-3);
  CHECK(b12.stability_gap < 1e-3);
  CHECK_THROWS_AS(bowen_root(baseline(4.0, 4), Side::G), Error);
}

TEST_CASE("Poincare sweep") {
  const auto spec = groups::schottky_fuchsian(2, 4.0, 1);
  const auto p = poincare_estimate(spec.gens_g, mobius::Point{}, 10);
  CHECK(p.method == Method::PoincareSweep);
  const auto& ps = baseline(4.0, 10);
  const auto c = counting_estimate(ps, Side::G);
  CHECK(std::abs(p.value - c.value) <= 3.0 * (p.diagnostic() + c.diagnostic()));
  const auto b = bowen_root(ps, Side::G);
  CHECK(std::abs(p.value - b.value) < 1e-3);

  // Doubling the separation shrinks the exponent.
  const auto wide = groups::schottky_fuchsian(2, 8.0, 1);
  CHECK(poincare_estimate(wide.gens_g, mobius::Point{}, 10).value < p.value);

  CHECK_THROWS_AS(poincare_estimate(spec.gens_g, mobius::Point{0.0, -1.0}, 10), Error);
  CHECK_THROWS_AS(poincare_estimate(spec.gens_g, mobius::Point{}, 3), Error);
}

TEST_CASE("Poincare sweep of a cyclic group is zero") {
  const mobius::Isometry gens[] = {mobius::Isometry::diagonal(std::exp(1.0))};
  CHECK(poincare_estimate(gens, mobius::Point{}, 12).value == 0.0);
}

TEST_CASE("separation monotonicity of the Bowen root") {
  CHECK(bowen_root(baseline(8.0, 10), Side::G).value < bowen_root(baseline(4.0, 10), Side::G).value);
}

TEST_CASE("scaling covariance") {
  const auto& ps = baseline(4.0, 10);
  const auto scaled = spectra::rescale_h(ps, 2.0);
  const double b = bowen_root(ps, Side::H).value;
  CHECK(std::abs(bowen_root(scaled, Side::H).value - b / 2.0) <= 1e-9);
  const auto c = counting_estimate(ps, Side::H);
  const auto cs = counting_estimate(scaled, Side::H);
  CHECK(std::abs(cs.value - c.value / 2.0) <= cs.std_error + c.std_error / 2.0);
}

TEST_CASE("estimates are deterministic") {
  const auto& ps = baseline(4.0, 10);
  CHECK(bowen_root(ps, Side::G).value == bowen_root(ps, Side::G).value);
  CHECK(counting_estimate(ps, Side::G).value == counting_estimate(ps, Side::G).value);
}
