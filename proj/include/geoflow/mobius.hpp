#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string_view>

namespace geoflow::mobius {

using cplx = std::complex<double>;

/// Point of hyperbolic 3-space in upper-half-space coordinates z + t·j, t > 0.
struct Point {
  cplx z{0.0, 0.0};
  double height = 1.0;
};

/// Orientation-preserving isometry of H^3, stored as a unit-determinant
/// matrix [[a, b], [c, d]] in SL(2, C). The sign is not canonical (PSL).
class Isometry {
 public:
  Isometry() = default;

  /// Divides all entries by a square root of ad - bc. Throws
  /// NumericalOverflow on non-finite input or a vanishing determinant.
  static Isometry from_entries(cplx a, cplx b, cplx c, cplx d);
  /// Keeps the entries bit-for-bit when |det - 1| <= 1e-12 (deserialization);
  /// otherwise behaves like from_entries.
  static Isometry from_unit_entries(cplx a, cplx b, cplx c, cplx d);
  static Isometry identity() { return Isometry{}; }
  static Isometry diagonal(cplx lambda);

  const cplx& a() const { return m_[0]; }
  const cplx& b() const { return m_[1]; }
  const cplx& c() const { return m_[2]; }
  const cplx& d() const { return m_[3]; }
  const std::array<cplx, 4>& entries() const { return m_; }

  cplx det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
  cplx trace() const { return m_[0] + m_[3]; }
  Isometry inverse() const;

  /// Action on the Riemann sphere; infinity is represented by nullopt.
  std::optional<cplx> apply(std::optional<cplx> z) const;
  Point apply(const Point& p) const;

  /// Entrywise distance to the nearer of +Id and -Id.
  double distance_to_identity() const;
  double max_abs_entry() const;

 private:
  explicit Isometry(const std::array<cplx, 4>& m) : m_(m) {}
  friend Isometry compose(const Isometry& lhs, const Isometry& rhs);
  std::array<cplx, 4> m_{cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{1.0}};
};

Isometry compose(const Isometry& lhs, const Isometry& rhs);
inline Isometry operator*(const Isometry& lhs, const Isometry& rhs) { return compose(lhs, rhs); }

enum class Kind { Identity, Elliptic, Parabolic, Loxodromic };
std::string_view to_string(Kind kind);

struct IsometryClass {
  Kind kind = Kind::Identity;
  /// Set only for Loxodromic elements.
  std::optional<double> translation_length;
};

inline constexpr double kClassifyTolerance = 1e-9;

/// 2·|Re arccosh(tr/2)| on the principal branch, for any trace.
double length_from_trace(cplx trace);

IsometryClass classify(const Isometry& g, double tol = kClassifyTolerance);

/// Translation length of g (zero unless loxodromic).
double translation_length(const Isometry& g);

/// Hyperbolic distance between two points of the upper half-space.
double distance(const Point& p, const Point& q);

/// d(p, g·p). Throws InvalidPoint when p.height <= 0.
double displacement(const Isometry& g, const Point& p);

/// Rotation by `angle` about the axis of the loxodromic element g;
/// commutes with g.
Isometry rotation_about_axis(const Isometry& g, double angle);

}  // namespace geoflow::mobius
