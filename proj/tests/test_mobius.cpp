#include <cmath>
#include <random>

#include "doctest.h"
#include "geoflow/error.hpp"
#include "geoflow/mobius.hpp"

using namespace geoflow;
using namespace geoflow::mobius;

namespace {

Isometry random_isometry(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Isometry::from_entries({n(rng), n(rng)}, {n(rng), n(rng)}, {n(rng), n(rng)}, {n(rng), n(rng)});
}

double entry_gap(const Isometry& x, const Isometry& y) {
  double d = 0.0;
  for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(x.entries()[i] - y.entries()[i]));
  return d;
}

// Loxodromic length oracle: successive displacement increments along A^n.
double displacement_increment(const Isometry& a, int n) {
  Isometry p = Isometry::identity();
  for (int i = 0; i < n; ++i) p = p * a;
  const Point j{0.0, 1.0};
  return displacement(p * a, j) - displacement(p, j);
}

}  // namespace

TEST_CASE("normalization gives unit determinant") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) CHECK(std::abs(random_isometry(rng).det() - 1.0) <= 1e-12);
}

TEST_CASE("compose: identity and diagonal products") {
  std::mt19937_64 rng(1);
  const auto a = random_isometry(rng);
  CHECK(entry_gap(Isometry::identity() * a, a) == 0.0);  // exact: no renormalization
  const double e = std::exp(1.0);
  const auto d = Isometry::diagonal(e) * Isometry::diagonal(e);
  CHECK(std::abs(d.a() - e * e) <= 1e-12);
  CHECK(std::abs(d.d() - 1.0 / (e * e)) <= 1e-12);
}

TEST_CASE("compose with the inverse gives the identity; adjugate oracle") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_isometry(rng);
    const auto adj = Isometry::from_entries(a.d(), -a.b(), -a.c(), a.a());
    CHECK(entry_gap(a.inverse(), adj) <= 1e-12);
    CHECK((a * a.inverse()).distance_to_identity() <= 1e-12);
  }
}

TEST_CASE("composition is associative on random triples") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_isometry(rng);
    const auto b = random_isometry(rng);
    const auto c = random_isometry(rng);
    // Equal up to the sign ambiguity of the normalization.
    const auto lhs = (a * b) * c;
    const auto rhs = a * (b * c);
    CHECK((lhs * rhs.inverse()).distance_to_identity() <= 1e-12 * std::max(1.0, lhs.max_abs_entry() * rhs.max_abs_entry()));
  }
}

TEST_CASE("non-finite entries overflow") {
  CHECK_THROWS_AS(Isometry::from_entries(INFINITY, 0.0, 0.0, 1.0), Error);
  CHECK_THROWS_AS(Isometry::from_entries(1.0, 1.0, 1.0, 1.0), Error);
}

TEST_CASE("classify") {
  const auto lox = classify(Isometry::diagonal(std::exp(1.0)));
  CHECK(lox.kind == Kind::Loxodromic);
  REQUIRE(lox.translation_length);
  CHECK(*lox.translation_length == doctest::Approx(2.0).epsilon(1e-14));

  const auto id = classify(Isometry::identity());
  CHECK(id.kind == Kind::Identity);
  CHECK(!id.translation_length);
  CHECK(classify(Isometry::from_entries(-1.0, 0.0, 0.0, -1.0)).kind == Kind::Identity);

  CHECK(classify(Isometry::diagonal(std::polar(1.0, 0.4))).kind == Kind::Elliptic);
  CHECK(classify(Isometry::from_entries(1.0, 1.0, 0.0, 1.0)).kind == Kind::Parabolic);
  CHECK(classify(Isometry::from_entries(-1.0, 2.0, 0.0, -1.0)).kind == Kind::Parabolic);
  // A complex trace off the real segment is loxodromic even with |tr| < 2.
  CHECK(classify(Isometry::diagonal(std::polar(1.1, 0.4))).kind == Kind::Loxodromic);
}

TEST_CASE("classify [[2,1],[1,1]] against the displacement-growth oracle") {
  const auto a = Isometry::from_entries(2.0, 1.0, 1.0, 1.0);
  const double oracle = displacement_increment(a, 20);
  // Frozen value of the oracle; equals 2·acosh(3/2).
  CHECK(oracle == doctest::Approx(1.9248473002384139).epsilon(1e-9));
  const auto k = classify(a);
  CHECK(k.kind == Kind::Loxodromic);
  CHECK(*k.translation_length == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("displacement") {
  const Point j{0.0, 1.0};
  CHECK(displacement(Isometry::identity(), j) == 0.0);
  CHECK(displacement(Isometry::diagonal(std::exp(1.0)), j) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(displacement(Isometry::identity(), Point{0.0, 0.0}), Error);
  CHECK_THROWS_AS(displacement(Isometry::identity(), Point{1.0, -1.0}), Error);

  // Minimum over points near the axis: the axis joins the fixed points (1 ± √5)/2.
  const auto a = Isometry::from_entries(2.0, 1.0, 1.0, 1.0);
  const double length = translation_length(a);
  const double centre = 0.5;
  const double radius = std::sqrt(5.0) / 2.0;
  double best = INFINITY;
  for (int i = 1; i < 200; ++i) {
    const double theta = M_PI * i / 200.0;
    for (double scale : {0.9, 1.0, 1.1}) {
      const Point p{centre + radius * std::cos(theta) * scale, radius * std::sin(theta) * scale};
      const double d = displacement(a, p);
      CHECK(d >= length - 1e-12);
      best = std::min(best, d);
    }
  }
  CHECK(best == doctest::Approx(length).epsilon(1e-12));
}

TEST_CASE("distance: symmetry and triangle inequality") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Point p{{u(rng), u(rng)}, u(rng)};
    const Point q{{u(rng), u(rng)}, u(rng)};
    const Point r{{u(rng), u(rng)}, u(rng)};
    CHECK(distance(p, q) == doctest::Approx(distance(q, p)).epsilon(1e-13));
    CHECK(distance(p, r) <= distance(p, q) + distance(q, r) + 1e-12);
  }
}

TEST_CASE("isometries preserve distance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int i = 0; i < 50; ++i) {
    const auto g = random_isometry(rng);
    const Point p{{u(rng), u(rng)}, u(rng)};
    const Point q{{u(rng), u(rng)}, u(rng)};
    CHECK(distance(g.apply(p), g.apply(q)) == doctest::Approx(distance(p, q)).epsilon(1e-9));
  }
}

TEST_CASE("rotation about an axis commutes and keeps the length") {
  const auto g = Isometry::from_entries(2.0, 1.0, 1.0, 1.0);
  const auto r = rotation_about_axis(g, 0.3);
  CHECK((g * r * g.inverse() * r.inverse()).distance_to_identity() <= 1e-12);
  CHECK(classify(r).kind == Kind::Elliptic);
  CHECK(translation_length(g * r) == doctest::Approx(translation_length(g)).epsilon(1e-12));
}
