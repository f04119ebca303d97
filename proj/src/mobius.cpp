#include "geoflow/mobius.hpp"

#include <algorithm>
#include <cmath>

#include "geoflow/error.hpp"

namespace geoflow::mobius {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

Isometry Isometry::from_entries(cplx a, cplx b, cplx c, cplx d) {
  if (!finite(a) || !finite(b) || !finite(c) || !finite(d)) {
    throw Error(ErrorCode::NumericalOverflow, "non-finite matrix entry");
  }
  const cplx det = a * d - b * c;
  if (!finite(det) || std::abs(det) == 0.0) {
    throw Error(ErrorCode::NumericalOverflow, "degenerate or overflowing determinant");
  }
  const cplx s = std::sqrt(det);
  return Isometry({a / s, b / s, c / s, d / s});
}

Isometry Isometry::from_unit_entries(cplx a, cplx b, cplx c, cplx d) {
  const cplx det = a * d - b * c;
  if (finite(a) && finite(b) && finite(c) && finite(d) && std::abs(det - 1.0) <= 1e-12) {
    return Isometry({a, b, c, d});
  }
  return from_entries(a, b, c, d);
}

Isometry Isometry::diagonal(cplx lambda) {
  return from_entries(lambda, 0.0, 0.0, 1.0 / lambda);
}

Isometry Isometry::inverse() const { return Isometry({m_[3], -m_[1], -m_[2], m_[0]}); }

std::optional<cplx> Isometry::apply(std::optional<cplx> z) const {
  const auto& [a, b, c, d] = m_;
  if (!z) {
    if (c == 0.0) return std::nullopt;
    return a / c;
  }
  const cplx den = c * *z + d;
  if (den == 0.0) return std::nullopt;
  return (a * *z + b) / den;
}

Point Isometry::apply(const Point& p) const {
  const auto& [a, b, c, d] = m_;
  const double t2 = p.height * p.height;
  const cplx czd = c * p.z + d;
  const double den = std::norm(czd) + std::norm(c) * t2;
  const cplx num = (a * p.z + b) * std::conj(czd) + a * std::conj(c) * t2;
  return Point{num / den, p.height / den};
}

double Isometry::distance_to_identity() const {
  auto dist = [this](double sign) {
    return std::max({std::abs(m_[0] - sign), std::abs(m_[1]), std::abs(m_[2]),
                     std::abs(m_[3] - sign)});
  };
  return std::min(dist(1.0), dist(-1.0));
}

double Isometry::max_abs_entry() const {
  double m = 0.0;
  for (const auto& z : m_) m = std::max(m, std::abs(z));
  return m;
}

// The product of unit-determinant factors is kept as is: recomputing the
// determinant cancels catastrophically once entries grow large.
Isometry compose(const Isometry& lhs, const Isometry& rhs) {
  const std::array<cplx, 4> m{lhs.a() * rhs.a() + lhs.b() * rhs.c(), lhs.a() * rhs.b() + lhs.b() * rhs.d(),
                              lhs.c() * rhs.a() + lhs.d() * rhs.c(), lhs.c() * rhs.b() + lhs.d() * rhs.d()};
  for (const auto& z : m)
    if (!finite(z)) throw Error(ErrorCode::NumericalOverflow, "non-finite product entry");
  return Isometry(m);
}

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::Identity: return "Identity";
    case Kind::Elliptic: return "Elliptic";
    case Kind::Parabolic: return "Parabolic";
    case Kind::Loxodromic: return "Loxodromic";
  }
  return "?";
}

double length_from_trace(cplx trace) {
  return 2.0 * std::abs(std::acosh(trace / 2.0).real());
}

IsometryClass classify(const Isometry& g, double tol) {
  if (g.distance_to_identity() <= tol) return {Kind::Identity, std::nullopt};
  const cplx tr = g.trace();
  if (std::abs(tr - 2.0) <= tol || std::abs(tr + 2.0) <= tol) {
    return {Kind::Parabolic, std::nullopt};
  }
  const double len = length_from_trace(tr);
  if (len / 2.0 > tol) return {Kind::Loxodromic, len};
  return {Kind::Elliptic, std::nullopt};
}

double translation_length(const Isometry& g) {
  return classify(g).translation_length.value_or(0.0);
}

double distance(const Point& p, const Point& q) {
  if (p.height <= 0.0 || q.height <= 0.0) {
    throw Error(ErrorCode::InvalidPoint, "point not in the open upper half-space");
  }
  const double dz = std::abs(p.z - q.z);
  const double dt = p.height - q.height;
  const double chord = std::sqrt(dz * dz + dt * dt);
  return 2.0 * std::asinh(chord / (2.0 * std::sqrt(p.height * q.height)));
}

double displacement(const Isometry& g, const Point& p) {
  if (!(p.height > 0.0)) {
    throw Error(ErrorCode::InvalidPoint, "basepoint height must be positive");
  }
  return distance(p, g.apply(p));
}

Isometry rotation_about_axis(const Isometry& g, double angle) {
  const cplx half = std::polar(1.0, angle / 2.0);
  const auto& [a, b, c, d] = g.entries();
  Isometry frame;
  if (std::abs(c) > 1e-14 * g.max_abs_entry()) {
    const cplx root = std::sqrt((a + d) * (a + d) - 4.0);
    const cplx zp = (a - d + root) / (2.0 * c);
    const cplx zm = (a - d - root) / (2.0 * c);
    frame = Isometry::from_entries(zp, zm, 1.0, 1.0);
  } else {
    // Fixed points are infinity and b / (d - a).
    frame = Isometry::from_entries(1.0, b / (d - a), 0.0, 1.0);
  }
  return frame * Isometry::diagonal(half) * frame.inverse();
}

}  // namespace geoflow::mobius
