#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "geoflow/error.hpp"
#include "geoflow/spectra.hpp"

using namespace geoflow;
using namespace geoflow::spectra;

namespace {

const GroupSpec& baseline() {
  static const GroupSpec spec = groups::schottky_fuchsian(2, 4.0, 0);
  return spec;
}

const GroupSpec& bent() {
  static const GroupSpec spec = groups::perturb(baseline(), 1e-2, 4);
  return spec;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("evaluate_class: letters, powers and the direct product oracle") {
  const auto& gens = bent().gens_h;
  const auto a = groups::parse_word("a");
  CHECK(evaluate_class(gens, a) == doctest::Approx(mobius::translation_length(gens[0])).epsilon(1e-13));
  CHECK(evaluate_class(gens, groups::parse_word("aa")) == doctest::Approx(2.0 * evaluate_class(gens, a)).epsilon(1e-12));
  const auto w = groups::parse_word("abaB");
  const double direct = mobius::translation_length(groups::word_matrix(gens, w));
  CHECK(std::abs(evaluate_class(gens, w) - direct) <= 1e-9);
}

TEST_CASE("evaluate_class stays in range on long words") {
  const auto& gens = bent().gens_h;
  groups::Word w;
  for (int i = 0; i < 800; ++i) w.letters.push_back(i % 2 == 0 ? 1 : 2);
  const double unit = evaluate_class(gens, groups::parse_word("ab"));
  CHECK(evaluate_class(gens, w) == doctest::Approx(400.0 * unit).epsilon(1e-12));
}

TEST_CASE("fuchsian baseline has identical sides") {
  const auto ps = build_paired_spectrum(baseline(), 8);
  for (const auto& e : ps.entries) CHECK(std::abs(e.l_g - e.l_h) <= 1e-12);
  CHECK(domination_check(ps).all_dominated);
  const auto lambda = proportionality_test(ps, 1e-12);
  REQUIRE(lambda);
  CHECK(*lambda == 1.0);
}

TEST_CASE("spectrum completeness and ordering") {
  const auto ps = build_paired_spectrum(bent(), 3);
  CHECK(ps.entries.size() == groups::conjugacy_representatives(2, 3).size());
  const auto full = build_paired_spectrum(bent(), 8, 3);
  CHECK(full.entries.size() == groups::conjugacy_representatives(2, 8).size());
  for (std::size_t i = 0; i < full.entries.size(); ++i) {
    const auto& e = full.entries[i];
    CHECK(e.class_id == static_cast<int>(i));
    if (i > 0) CHECK(full.entries[i - 1].word_length <= e.word_length);
    CHECK(e.l_g > 0.0);
    CHECK(e.l_h > 0.0);
    // Linear lower bound from the certificate.
    CHECK(e.l_g >= e.word_length * full.per_letter_g - 1e-9);
    CHECK(e.l_h >= e.word_length * full.per_letter_h - 1e-9);
  }
}

TEST_CASE("threaded build is identical to the serial one") {
  const auto serial = build_paired_spectrum(bent(), 7, 1);
  const auto threaded = build_paired_spectrum(bent(), 7, 4);
  REQUIRE(serial.entries.size() == threaded.entries.size());
  for (std::size_t i = 0; i < serial.entries.size(); ++i) {
    CHECK(serial.entries[i].l_g == threaded.entries[i].l_g);
    CHECK(serial.entries[i].l_h == threaded.entries[i].l_h);
  }
}

TEST_CASE("conjugation and inversion invariance") {
  for (const auto& c : groups::conjugacy_representatives(2, 6)) {
    for (const auto* gens : {&bent().gens_g, &bent().gens_h}) {
      const double l = evaluate_class(*gens, c.rep);
      for (std::size_t r = 1; r < c.rep.size(); ++r) CHECK(std::abs(evaluate_class(*gens, groups::rotate(c.rep, r)) - l) <= 1e-9);
      CHECK(std::abs(evaluate_class(*gens, groups::inverse(c.rep)) - l) <= 1e-10);
    }
  }
}

TEST_CASE("domination and proportionality detectors") {
  const auto ps = build_paired_spectrum(baseline(), 6);
  CHECK(domination_check(rescale_h(ps, 0.9)).all_dominated);
  const auto up = domination_check(rescale_h(ps, 1.1));
  CHECK(!up.all_dominated);
  CHECK(up.violations.size() == ps.entries.size());

  const auto lambda = proportionality_test(rescale_h(ps, 0.7), 1e-6);
  REQUIRE(lambda);
  CHECK(*lambda == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(!proportionality_test(build_paired_spectrum(bent(), 8), 1e-6));

  const auto swapped = swap_sides(rescale_h(ps, 0.7));
  CHECK(*proportionality_test(swapped, 1e-6) == doctest::Approx(1.0 / 0.7).epsilon(1e-12));
}

TEST_CASE("cache round trip is bit exact and the second build is a hit") {
  const auto dir = std::filesystem::temp_directory_path() / "geoflow_test_spectra_cache";
  std::filesystem::remove_all(dir);
  const auto first = build_or_load(bent(), 7, dir);
  CHECK(!first.cache_hit);
  const std::string bytes = slurp(first.csv_path);
  const auto second = build_or_load(bent(), 7, dir);
  CHECK(second.cache_hit);
  CHECK(slurp(second.csv_path) == bytes);
  REQUIRE(second.spectrum.entries.size() == first.spectrum.entries.size());
  for (std::size_t i = 0; i < first.spectrum.entries.size(); ++i) {
    const auto& a = first.spectrum.entries[i];
    const auto& b = second.spectrum.entries[i];
    CHECK(a.l_g == b.l_g);
    CHECK(a.l_h == b.l_h);
    CHECK(a.word == b.word);
    CHECK(a.primitive == b.primitive);
  }
  CHECK(second.spectrum.per_letter_h == first.spectrum.per_letter_h);
  CHECK(bytes.rfind("class_id,word,word_len,l_g,l_h\n", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("unverified specs are rejected") {
  auto spec = baseline();
  spec.gens_h[1] = spec.gens_h[0];
  try {
    build_paired_spectrum(spec, 4);
    FAIL("expected NotProvablyDiscrete");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotProvablyDiscrete);
  }
}
