#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "geoflow/mobius.hpp"

namespace geoflow::groups {

using mobius::cplx;
using mobius::Isometry;

/// Letters are ±1..±k; the sign marks the inverse generator.
using Letter = int;

struct Word {
  std::vector<Letter> letters;

  std::size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }
  friend bool operator==(const Word&, const Word&) = default;
};

/// Dense index 0..2k-1 used for ordering and disk lookup: a=0, A=1, b=2, B=3, ...
inline int letter_code(Letter x) { return 2 * ((x > 0 ? x : -x) - 1) + (x < 0 ? 1 : 0); }
inline Letter letter_from_code(int code) {
  const int gen = code / 2 + 1;
  return (code % 2 == 0) ? gen : -gen;
}

Word free_reduce(const Word& w);
bool is_reduced(const Word& w);
bool is_cyclically_reduced(const Word& w);
Word inverse(const Word& w);
Word rotate(const Word& w, std::size_t shift);
/// Lexicographic order on letter codes.
bool code_less(const Word& lhs, const Word& rhs);

/// Cyclically reduces, then returns the code-lexicographic minimum over all
/// rotations of the word and of its inverse.
Word canonical_form(const Word& w);
bool is_canonical(const Word& w);
bool is_proper_power(const Word& w);

/// "aBab" style text; generators 1..26 map to a..z, inverses to A..Z.
std::string to_string(const Word& w);
Word parse_word(const std::string& text);

struct ConjClass {
  Word rep;
  int word_length = 0;
  bool primitive = true;
};

inline constexpr double kDefaultEnumerationBudget = 5e7;

/// One canonical representative per conjugacy class (inverse classes folded
/// together) of cyclically reduced length 1..max_length, sorted by length
/// then code-lexicographically. Throws EnumerationTooLarge when the number
/// of reduced words to scan exceeds `budget`.
std::vector<ConjClass> conjugacy_representatives(int rank, int max_length,
                                                 double budget = kDefaultEnumerationBudget);

/// Product of the generator matrices along the word, left to right.
Isometry word_matrix(std::span<const Isometry> gens, const Word& w);

struct Disk {
  cplx center{0.0, 0.0};
  double radius = 1.0;
};

/// Isometric circle {z : |cz + d| = 1} of g (requires c != 0).
Disk isometric_circle(const Isometry& g);

struct GroupSpec {
  int rank = 0;
  std::vector<Isometry> gens_g;
  std::vector<Isometry> gens_h;
  /// Ping-pong disks indexed by letter_code.
  std::vector<Disk> disks;
  std::uint64_t seed = 0;
};

struct SideCertificate {
  bool ok = false;
  std::string failure;
  /// Minimum over disk pairs of centre distance minus both radii.
  double disjoint_margin = 0.0;
  /// Per letter code: how deep g(exterior of D_g) sits inside D_{g^-1}.
  std::vector<double> inclusion_margins;
  double min_inclusion_margin = 0.0;
  /// Lower bound on translation length per letter of any cyclically
  /// reduced word, from the hemispheres over the isometric circles.
  double length_per_letter = 0.0;
};

struct PingPongCertificate {
  bool ok = false;
  std::string failure;
  std::vector<Disk> disks;
  SideCertificate g;
  SideCertificate h;
};

/// Checks both representations against spec.disks. Never throws on a
/// failed inclusion; the first violation is reported in `failure`.
PingPongCertificate verify_ping_pong(const GroupSpec& spec);
SideCertificate verify_side(std::span<const Isometry> gens, std::span<const Disk> disks);

/// Real Schottky group: 2k isometric circles on the real axis, consecutive
/// centres `separation` apart, pairs interleaved (a b a^-1 b^-1 ...),
/// radii drawn from the seed. gens_h = gens_g.
GroupSpec schottky_fuchsian(int rank, double separation, std::uint64_t seed);

/// Bends gens_h along the axis of one generator per interleaved pair with
/// angle of size eps..2eps (sign and bending curve drawn from the seed),
/// then re-verifies ping-pong on spec.disks. Throws NotProvablyDiscrete.
GroupSpec perturb(const GroupSpec& spec, double eps, std::uint64_t seed);

void write_spec(std::ostream& out, const GroupSpec& spec);
GroupSpec read_spec(std::istream& in);
std::string serialize(const GroupSpec& spec);
/// FNV-1a 64 of the serialized form, as 16 hex digits.
std::string spec_hash(const GroupSpec& spec);

/// Uniform in [0, 1) from a standard engine; portable across standard
/// libraries, unlike std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng);

}  // namespace geoflow::groups
