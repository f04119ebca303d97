#include "geoflow/groups.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "geoflow/error.hpp"
#include "geoflow/io.hpp"

namespace geoflow::groups {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Word free_reduce(const Word& w) {
  Word out;
  out.letters.reserve(w.size());
  for (Letter x : w.letters) {
    if (!out.letters.empty() && out.letters.back() == -x) {
      out.letters.pop_back();
    } else {
      out.letters.push_back(x);
    }
  }
  return out;
}

bool is_reduced(const Word& w) {
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w.letters[i] == -w.letters[i - 1]) return false;
  }
  return true;
}

bool is_cyclically_reduced(const Word& w) {
  if (!is_reduced(w)) return false;
  return w.size() < 2 || w.letters.front() != -w.letters.back();
}

Word inverse(const Word& w) {
  Word out;
  out.letters.reserve(w.size());
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) out.letters.push_back(-*it);
  return out;
}

Word rotate(const Word& w, std::size_t shift) {
  Word out = w;
  if (!w.empty()) {
    std::rotate(out.letters.begin(), out.letters.begin() + static_cast<std::ptrdiff_t>(shift % w.size()),
                out.letters.end());
  }
  return out;
}

bool code_less(const Word& lhs, const Word& rhs) {
  return std::lexicographical_compare(
      lhs.letters.begin(), lhs.letters.end(), rhs.letters.begin(), rhs.letters.end(),
      [](Letter x, Letter y) { return letter_code(x) < letter_code(y); });
}

namespace {

Word cyclic_reduce(Word w) {
  w = free_reduce(w);
  std::size_t lo = 0;
  std::size_t hi = w.size();
  while (hi - lo >= 2 && w.letters[lo] == -w.letters[hi - 1]) {
    ++lo;
    --hi;
  }
  return Word{{w.letters.begin() + static_cast<std::ptrdiff_t>(lo),
               w.letters.begin() + static_cast<std::ptrdiff_t>(hi)}};
}

// Compares the rotation of `codes` starting at `shift` against `base`;
// returns <0, 0, >0.
int compare_rotation(const std::vector<int>& codes, std::size_t shift, const std::vector<int>& base) {
  const std::size_t n = codes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int x = codes[(shift + i) % n];
    if (x != base[i]) return x < base[i] ? -1 : 1;
  }
  return 0;
}

// True when no rotation of w or of w^-1 is code-smaller than w itself.
bool is_least_rotation(const std::vector<int>& codes, const std::vector<int>& inv_codes) {
  const std::size_t n = codes.size();
  for (std::size_t s = 1; s < n; ++s) {
    if (compare_rotation(codes, s, codes) < 0) return false;
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (compare_rotation(inv_codes, s, codes) < 0) return false;
  }
  return true;
}

}  // namespace

Word canonical_form(const Word& w) {
  const Word reduced = cyclic_reduce(w);
  const Word inv = inverse(reduced);
  Word best = reduced;
  for (std::size_t s = 0; s < reduced.size(); ++s) {
    Word r1 = rotate(reduced, s);
    if (code_less(r1, best)) best = std::move(r1);
    Word r2 = rotate(inv, s);
    if (code_less(r2, best)) best = std::move(r2);
  }
  return best;
}

bool is_canonical(const Word& w) { return canonical_form(w) == w; }

bool is_proper_power(const Word& w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p <= n / 2; ++p) {
    if (n % p != 0) continue;
    if (rotate(w, p) == w) return true;
  }
  return false;
}

std::string to_string(const Word& w) {
  std::string out;
  out.reserve(w.size());
  for (Letter x : w.letters) {
    const int g = (x > 0 ? x : -x) - 1;
    out.push_back(static_cast<char>((x > 0 ? 'a' : 'A') + g));
  }
  return out;
}

Word parse_word(const std::string& text) {
  Word w;
  for (char ch : text) {
    if (ch >= 'a' && ch <= 'z') {
      w.letters.push_back(ch - 'a' + 1);
    } else if (ch >= 'A' && ch <= 'Z') {
      w.letters.push_back(-(ch - 'A' + 1));
    } else {
      throw Error(ErrorCode::IoError, "bad letter in word '" + text + "'");
    }
  }
  return w;
}

std::vector<ConjClass> conjugacy_representatives(int rank, int max_length, double budget) {
  if (rank < 1) throw Error(ErrorCode::EnumerationTooLarge, "rank must be positive");
  std::vector<ConjClass> out;
  if (max_length < 1) return out;

  const double branching = 2.0 * rank - 1.0;
  double total = 0.0;
  for (int m = 1; m <= max_length; ++m) total += 2.0 * rank * std::pow(branching, m - 1);
  if (total > budget) {
    throw Error(ErrorCode::EnumerationTooLarge,
                "n = " + std::to_string(max_length) + " needs " + std::to_string(total) + " words");
  }

  const int alphabet = 2 * rank;
  for (int m = 1; m <= max_length; ++m) {
    std::vector<int> codes(static_cast<std::size_t>(m));
    std::vector<int> inv_codes(static_cast<std::size_t>(m));
    // A canonical word starts with a positive letter no larger than any
    // letter of the word or of its inverse.
    for (int first = 0; first < alphabet; first += 2) {
      codes[0] = first;
      // Depth-first over positions 1..m-1 with an explicit cursor stack.
      std::vector<int> next(static_cast<std::size_t>(m), first);
      int pos = 1;
      if (m == 1) {
        Word w{{letter_from_code(first)}};
        out.push_back(ConjClass{w, 1, true});
        continue;
      }
      next[1] = first;
      while (pos >= 1) {
        if (next[pos] >= alphabet) {
          --pos;
          if (pos >= 1) ++next[pos];
          continue;
        }
        const int x = next[pos];
        const int inv_x = x ^ 1;
        const bool allowed = inv_x != codes[pos - 1] && x >= first && inv_x >= first;
        if (!allowed) {
          ++next[pos];
          continue;
        }
        codes[pos] = x;
        if (pos + 1 < m) {
          ++pos;
          next[pos] = first;
          continue;
        }
        // Complete word.
        if ((codes[m - 1] ^ 1) != codes[0]) {
          for (int i = 0; i < m; ++i) inv_codes[m - 1 - i] = codes[i] ^ 1;
          if (is_least_rotation(codes, inv_codes)) {
            Word w;
            w.letters.reserve(codes.size());
            for (int c : codes) w.letters.push_back(letter_from_code(c));
            const bool primitive = !is_proper_power(w);
            out.push_back(ConjClass{std::move(w), m, primitive});
          }
        }
        ++next[pos];
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ConjClass& x, const ConjClass& y) {
    if (x.word_length != y.word_length) return x.word_length < y.word_length;
    return code_less(x.rep, y.rep);
  });
  return out;
}

Isometry word_matrix(std::span<const Isometry> gens, const Word& w) {
  Isometry out = Isometry::identity();
  for (Letter x : w.letters) {
    const auto& g = gens[static_cast<std::size_t>((x > 0 ? x : -x) - 1)];
    out = out * (x > 0 ? g : g.inverse());
  }
  return out;
}

Disk isometric_circle(const Isometry& g) {
  return Disk{-g.d() / g.c(), 1.0 / std::abs(g.c())};
}

namespace {

Isometry letter_matrix(std::span<const Isometry> gens, int code) {
  const auto& g = gens[static_cast<std::size_t>(code / 2)];
  return code % 2 == 0 ? g : g.inverse();
}

std::optional<Disk> circumcircle(cplx p, cplx q, cplx r) {
  const cplx qp = q - p;
  const cplx rp = r - p;
  const double den = 2.0 * (qp.real() * rp.imag() - qp.imag() * rp.real());
  if (den == 0.0 || !std::isfinite(den)) return std::nullopt;
  const double q2 = std::norm(qp);
  const double r2 = std::norm(rp);
  const cplx centre{(rp.imag() * q2 - qp.imag() * r2) / den, (qp.real() * r2 - rp.real() * q2) / den};
  return Disk{p + centre, std::abs(centre)};
}

// Inversive distance of disjoint hemispheres over the two disks.
double hemisphere_distance(const Disk& x, const Disk& y) {
  const double dist = std::abs(x.center - y.center);
  const double ch = (dist * dist - x.radius * x.radius - y.radius * y.radius) /
                    (2.0 * x.radius * y.radius);
  return std::acosh(ch);
}

}  // namespace

SideCertificate verify_side(std::span<const Isometry> gens, std::span<const Disk> disks) {
  SideCertificate cert;
  const std::size_t k = gens.size();
  const int alphabet = static_cast<int>(2 * k);
  if (disks.size() != 2 * k) {
    cert.failure = "expected " + std::to_string(2 * k) + " disks";
    return cert;
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (mobius::classify(gens[i]).kind != mobius::Kind::Loxodromic) {
      cert.failure = "generator " + std::to_string(i + 1) + " is not loxodromic";
      return cert;
    }
  }

  cert.disjoint_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < disks.size(); ++i) {
    for (std::size_t j = i + 1; j < disks.size(); ++j) {
      const double gap = std::abs(disks[i].center - disks[j].center) - disks[i].radius - disks[j].radius;
      cert.disjoint_margin = std::min(cert.disjoint_margin, gap);
      if (!(gap > 0.0) && cert.failure.empty()) {
        cert.failure = "disks " + std::to_string(i) + " and " + std::to_string(j) + " overlap";
      }
    }
  }
  if (!cert.failure.empty()) return cert;

  cert.inclusion_margins.assign(disks.size(), -std::numeric_limits<double>::infinity());
  cert.min_inclusion_margin = std::numeric_limits<double>::infinity();
  for (int code = 0; code < alphabet; ++code) {
    const Isometry g = letter_matrix(gens, code);
    const Disk& from = disks[static_cast<std::size_t>(code)];
    const Disk& to = disks[static_cast<std::size_t>(code ^ 1)];
    const std::string who = "letter " + to_string(Word{{letter_from_code(code)}});

    // g maps the exterior of `from` to a bounded disk iff its pole is inside.
    const cplx pole = -g.d() / g.c();
    if (g.c() == 0.0 || !(std::abs(pole - from.center) < from.radius)) {
      cert.failure = who + ": pole outside its disk";
      return cert;
    }
    auto on_circle = [&](double phi) {
      return *g.apply(std::optional<cplx>(from.center + std::polar(from.radius, phi)));
    };
    const auto image = circumcircle(on_circle(0.0), on_circle(2.0 * std::numbers::pi / 3.0),
                                    on_circle(4.0 * std::numbers::pi / 3.0));
    if (!image) {
      cert.failure = who + ": degenerate image circle";
      return cert;
    }
    // Sampled consistency: the whole boundary lands on the computed circle.
    double worst = 0.0;
    for (int s = 0; s < 64; ++s) {
      const cplx z = on_circle(2.0 * std::numbers::pi * s / 64.0);
      worst = std::max(worst, std::abs(std::abs(z - image->center) - image->radius));
    }
    if (worst > 1e-9 * std::max(1.0, image->radius)) {
      cert.failure = who + ": boundary image not a circle to tolerance";
      return cert;
    }
    const double margin = to.radius - (std::abs(image->center - to.center) + image->radius);
    cert.inclusion_margins[static_cast<std::size_t>(code)] = margin;
    cert.min_inclusion_margin = std::min(cert.min_inclusion_margin, margin);
    if (!(margin > 0.0)) {
      cert.failure = who + ": image of exterior not inside target disk";
      return cert;
    }
  }

  std::vector<Disk> iso;
  for (int code = 0; code < alphabet; ++code) iso.push_back(isometric_circle(letter_matrix(gens, code)));
  double per_letter = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < iso.size(); ++i) {
    for (std::size_t j = i + 1; j < iso.size(); ++j) {
      const double gap = std::abs(iso[i].center - iso[j].center) - iso[i].radius - iso[j].radius;
      if (!(gap > 0.0)) {
        cert.failure = "isometric circles " + std::to_string(i) + " and " + std::to_string(j) +
                       " overlap; no length bound";
        return cert;
      }
      per_letter = std::min(per_letter, hemisphere_distance(iso[i], iso[j]));
    }
  }
  cert.length_per_letter = per_letter;
  cert.ok = true;
  return cert;
}

PingPongCertificate verify_ping_pong(const GroupSpec& spec) {
  PingPongCertificate cert;
  cert.disks = spec.disks;
  if (static_cast<int>(spec.gens_g.size()) != spec.rank ||
      static_cast<int>(spec.gens_h.size()) != spec.rank) {
    cert.failure = "generator count does not match rank";
    return cert;
  }
  cert.g = verify_side(spec.gens_g, spec.disks);
  cert.h = verify_side(spec.gens_h, spec.disks);
  if (!cert.g.ok) {
    cert.failure = "g-side: " + cert.g.failure;
  } else if (!cert.h.ok) {
    cert.failure = "h-side: " + cert.h.failure;
  }
  cert.ok = cert.g.ok && cert.h.ok;
  return cert;
}

GroupSpec schottky_fuchsian(int rank, double separation, std::uint64_t seed) {
  if (rank < 2) throw Error(ErrorCode::ConfigError, "rank must be at least 2");
  if (!(separation > 0.0)) throw Error(ErrorCode::DiskOverlap, "separation must be positive");

  std::mt19937_64 rng(seed);
  std::vector<double> radius(static_cast<std::size_t>(rank));
  for (auto& r : radius) r = 0.75 + 0.25 * uniform01(rng);

  // slot[code] = position index on the real axis.
  std::vector<int> slot(static_cast<std::size_t>(2 * rank));
  int next_slot = 0;
  for (int gen = 0; gen < rank; gen += 2) {
    if (gen + 1 < rank) {
      slot[static_cast<std::size_t>(2 * gen)] = next_slot;
      slot[static_cast<std::size_t>(2 * gen + 2)] = next_slot + 1;
      slot[static_cast<std::size_t>(2 * gen + 1)] = next_slot + 2;
      slot[static_cast<std::size_t>(2 * gen + 3)] = next_slot + 3;
      next_slot += 4;
    } else {
      slot[static_cast<std::size_t>(2 * gen)] = next_slot;
      slot[static_cast<std::size_t>(2 * gen + 1)] = next_slot + 1;
      next_slot += 2;
    }
  }

  std::vector<Disk> iso(static_cast<std::size_t>(2 * rank));
  for (int code = 0; code < 2 * rank; ++code) {
    iso[static_cast<std::size_t>(code)] =
        Disk{cplx{separation * slot[static_cast<std::size_t>(code)], 0.0},
             radius[static_cast<std::size_t>(code / 2)]};
  }
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < iso.size(); ++i) {
    for (std::size_t j = i + 1; j < iso.size(); ++j) {
      min_gap = std::min(min_gap, std::abs(iso[i].center - iso[j].center) - iso[i].radius - iso[j].radius);
    }
  }
  if (!(min_gap > 0.0)) {
    throw Error(ErrorCode::DiskOverlap, "separation " + std::to_string(separation) + " too small");
  }

  GroupSpec spec;
  spec.rank = rank;
  spec.seed = seed;
  for (int gen = 0; gen < rank; ++gen) {
    // Isometric circle of g centred at p, of g^-1 at q, common radius r.
    const double p = iso[static_cast<std::size_t>(2 * gen)].center.real();
    const double q = iso[static_cast<std::size_t>(2 * gen + 1)].center.real();
    const double r = radius[static_cast<std::size_t>(gen)];
    spec.gens_g.push_back(Isometry::from_entries(q / r, -(p * q / (r * r) + 1.0) * r, 1.0 / r, -p / r));
  }
  spec.gens_h = spec.gens_g;
  spec.disks = iso;
  for (auto& d : spec.disks) d.radius += 0.25 * min_gap;

  const auto cert = verify_ping_pong(spec);
  if (!cert.ok) throw Error(ErrorCode::DiskOverlap, cert.failure);
  return spec;
}

GroupSpec perturb(const GroupSpec& spec, double eps, std::uint64_t seed) {
  if (!(eps >= 0.0)) throw Error(ErrorCode::ConfigError, "eps must be nonnegative");
  GroupSpec out = spec;
  if (eps == 0.0) return out;

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int gen = 0; gen + 1 < spec.rank; gen += 2) {
    const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    const double angle = sign * eps * (1.0 + uniform01(rng));
    const bool along_first = uniform01(rng) < 0.5;
    auto& a = out.gens_h[static_cast<std::size_t>(gen)];
    auto& b = out.gens_h[static_cast<std::size_t>(gen + 1)];
    // Bending along a closed geodesic dual to the other generator of the handle.
    if (along_first) {
      b = b * mobius::rotation_about_axis(a, angle);
    } else {
      a = a * mobius::rotation_about_axis(b, angle);
    }
  }
  const auto cert = verify_side(out.gens_h, out.disks);
  if (!cert.ok) {
    throw Error(ErrorCode::NotProvablyDiscrete, "eps = " + std::to_string(eps) + ": " + cert.failure);
  }
  return out;
}

namespace {

void write_gens(std::ostream& out, const std::vector<Isometry>& gens) {
  for (const auto& g : gens) {
    bool first = true;
    for (const auto& z : g.entries()) {
      out << (first ? "" : " ") << fmt17(z.real()) << ' ' << fmt17(z.imag());
      first = false;
    }
    out << '\n';
  }
}

}  // namespace

void write_spec(std::ostream& out, const GroupSpec& spec) {
  out << "[rank]\n" << spec.rank << "\n[gens_g]\n";
  write_gens(out, spec.gens_g);
  out << "[gens_h]\n";
  write_gens(out, spec.gens_h);
  out << "[disks]\n";
  for (const auto& d : spec.disks) {
    out << fmt17(d.center.real()) << ' ' << fmt17(d.center.imag()) << ' ' << fmt17(d.radius) << '\n';
  }
  out << "[seed]\n" << spec.seed << '\n';
}

std::string serialize(const GroupSpec& spec) {
  std::ostringstream out;
  write_spec(out, spec);
  return out.str();
}

GroupSpec read_spec(std::istream& in) {
  GroupSpec spec;
  std::string line;
  std::string section;
  auto fail = [](const std::string& msg) { return Error(ErrorCode::IoError, "group spec: " + msg); };
  auto read_matrix = [&](std::istringstream& row) {
    double v[8];
    for (double& x : v) {
      if (!(row >> x)) throw fail("matrix row needs 8 numbers");
    }
    return Isometry::from_unit_entries({v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]});
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line;
      continue;
    }
    std::istringstream row(line);
    if (section == "[rank]") {
      row >> spec.rank;
    } else if (section == "[gens_g]") {
      spec.gens_g.push_back(read_matrix(row));
    } else if (section == "[gens_h]") {
      spec.gens_h.push_back(read_matrix(row));
    } else if (section == "[disks]") {
      double re = 0, im = 0, r = 0;
      if (!(row >> re >> im >> r)) throw fail("disk row needs 3 numbers");
      spec.disks.push_back(Disk{{re, im}, r});
    } else if (section == "[seed]") {
      row >> spec.seed;
    } else {
      throw fail("unknown section " + section);
    }
    if (row.fail()) throw fail("malformed line '" + line + "'");
  }
  if (spec.rank < 1 || static_cast<int>(spec.gens_g.size()) != spec.rank ||
      static_cast<int>(spec.gens_h.size()) != spec.rank ||
      static_cast<int>(spec.disks.size()) != 2 * spec.rank) {
    throw fail("section sizes inconsistent with rank");
  }
  return spec;
}

std::string spec_hash(const GroupSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize(spec)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace geoflow::groups
