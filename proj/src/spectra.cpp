#include "geoflow/spectra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "geoflow/error.hpp"
#include "geoflow/io.hpp"

namespace geoflow::spectra {

using mobius::cplx;

namespace {

using Mat = std::array<cplx, 4>;

Mat multiply(const Mat& x, const Mat& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
          x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}

Mat letter(std::span<const Isometry> gens, groups::Letter x) {
  const auto& g = gens[static_cast<std::size_t>((x > 0 ? x : -x) - 1)];
  return x > 0 ? g.entries() : g.inverse().entries();
}

}  // namespace

double evaluate_class(std::span<const Isometry> gens, const Word& w) {
  if (w.empty()) throw Error(ErrorCode::SuspectSpec, "empty word has no length");
  Mat m{cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{1.0}};
  double log_scale = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    m = multiply(m, letter(gens, w.letters[i]));
    if ((i + 1) % kBlockSize == 0 && i + 1 < w.size()) {
      double s = 0.0;
      for (const auto& z : m) s = std::max(s, std::abs(z));
      if (!std::isfinite(s) || s == 0.0) {
        throw Error(ErrorCode::NumericalOverflow, "partial product left range at letter " + std::to_string(i));
      }
      for (auto& z : m) z /= s;
      log_scale += std::log(s);
    }
  }
  const cplx half_trace = (m[0] + m[3]) / 2.0;
  if (!std::isfinite(half_trace.real()) || !std::isfinite(half_trace.imag())) {
    throw Error(ErrorCode::NumericalOverflow, "trace overflow for word " + groups::to_string(w));
  }
  if (log_scale == 0.0) return mobius::length_from_trace(2.0 * half_trace);

  const double log_abs = std::log(std::abs(half_trace)) + log_scale;
  if (log_abs < 20.0) return mobius::length_from_trace(2.0 * half_trace * std::exp(log_scale));
  // arccosh(w) = log w + log(1 + sqrt(1 - w^-2)), with |w| = e^{log_abs}.
  const cplx inv = 1.0 / half_trace;
  const cplx inv_w2 = inv * inv * std::exp(-2.0 * log_scale);
  const double tail = std::log(1.0 + std::sqrt(1.0 - inv_w2)).real();
  return 2.0 * std::abs(log_abs + tail);
}

PairedSpectrum build_paired_spectrum(const GroupSpec& spec, int n_max, int threads) {
  const auto cert = groups::verify_ping_pong(spec);
  if (!cert.ok) throw Error(ErrorCode::NotProvablyDiscrete, cert.failure);

  const auto classes = groups::conjugacy_representatives(spec.rank, n_max);
  PairedSpectrum ps;
  ps.spec_id = groups::spec_hash(spec);
  ps.rank = spec.rank;
  ps.n_max = n_max;
  ps.per_letter_g = cert.g.length_per_letter;
  ps.per_letter_h = cert.h.length_per_letter;
  ps.entries.resize(classes.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& e = ps.entries[i];
      e.class_id = static_cast<int>(i);
      e.word = classes[i].rep;
      e.word_length = classes[i].word_length;
      e.primitive = classes[i].primitive;
      e.l_g = evaluate_class(spec.gens_g, e.word);
      e.l_h = evaluate_class(spec.gens_h, e.word);
    }
  };
  const std::size_t n = classes.size();
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 1024) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(std::min(n, t * chunk), std::min(n, (t + 1) * chunk));
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  for (const auto& e : ps.entries) {
    if (!(e.l_g >= kSuspectLength) || !(e.l_h >= kSuspectLength) || !std::isfinite(e.l_g) ||
        !std::isfinite(e.l_h)) {
      throw Error(ErrorCode::SuspectSpec, "class " + groups::to_string(e.word) + " has length below " +
                                              fmt17(kSuspectLength));
    }
  }
  return ps;
}

double completeness_horizon(const PairedSpectrum& ps, Side side) {
  return (ps.n_max + 1) * ps.per_letter(side);
}

std::vector<double> primitive_lengths(const PairedSpectrum& ps, Side side) {
  std::vector<double> out;
  for (const auto& e : ps.entries) {
    if (e.primitive) out.push_back(e.length(side));
  }
  std::sort(out.begin(), out.end());
  return out;
}

DominationVerdict domination_check(const PairedSpectrum& ps) {
  DominationVerdict v;
  for (const auto& e : ps.entries) {
    if (e.l_g < e.l_h - 1e-9) v.violations.push_back(e.class_id);
  }
  v.all_dominated = v.violations.empty();
  return v;
}

std::optional<double> proportionality_test(const PairedSpectrum& ps, double tol) {
  if (ps.entries.empty()) return std::nullopt;
  std::vector<double> ratios;
  ratios.reserve(ps.entries.size());
  for (const auto& e : ps.entries) ratios.push_back(e.l_h / e.l_g);
  std::vector<double> sorted = ratios;
  const std::size_t mid = sorted.size() / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
  double median = sorted[mid];
  if (sorted.size() % 2 == 0) {
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  for (double r : ratios) {
    if (std::abs(r - median) > tol) return std::nullopt;
  }
  return median;
}

PairedSpectrum rescale_h(const PairedSpectrum& ps, double factor) {
  PairedSpectrum out = ps;
  out.spec_id = ps.spec_id + "-hx" + fmt17(factor);
  out.per_letter_h *= factor;
  for (auto& e : out.entries) e.l_h *= factor;
  return out;
}

PairedSpectrum swap_sides(const PairedSpectrum& ps) {
  PairedSpectrum out = ps;
  out.spec_id = ps.spec_id + "-swap";
  std::swap(out.per_letter_g, out.per_letter_h);
  for (auto& e : out.entries) std::swap(e.l_g, e.l_h);
  return out;
}

std::filesystem::path cache_csv_path(const std::filesystem::path& dir, const std::string& spec_id, int n_max) {
  return dir / ("spectrum_" + spec_id + "_n" + std::to_string(n_max) + ".csv");
}

namespace {

std::filesystem::path meta_path(std::filesystem::path csv) { return csv.replace_extension(".meta"); }

}  // namespace

void write_spectrum_csv(const std::filesystem::path& csv_path, const PairedSpectrum& ps) {
  std::ostringstream csv;
  csv << "class_id,word,word_len,l_g,l_h\n";
  for (const auto& e : ps.entries) {
    csv << e.class_id << ',' << groups::to_string(e.word) << ',' << e.word_length << ',' << fmt17(e.l_g)
        << ',' << fmt17(e.l_h) << '\n';
  }
  std::ostringstream meta;
  meta << "spec_hash = " << ps.spec_id << '\n'
       << "rank = " << ps.rank << '\n'
       << "n_max = " << ps.n_max << '\n'
       << "inversion_folding = " << (ps.inversion_folded ? 1 : 0) << '\n'
       << "includes_non_primitive = " << (ps.includes_non_primitive ? 1 : 0) << '\n'
       << "per_letter_g = " << fmt17(ps.per_letter_g) << '\n'
       << "per_letter_h = " << fmt17(ps.per_letter_h) << '\n';
  write_atomically(csv_path, csv.str());
  write_atomically(meta_path(csv_path), meta.str());
}

PairedSpectrum read_spectrum_csv(const std::filesystem::path& csv_path) {
  PairedSpectrum ps;
  std::ifstream meta(meta_path(csv_path));
  if (!meta) throw Error(ErrorCode::IoError, "missing metadata for " + csv_path.string());
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (key == "spec_hash") ps.spec_id = value;
    else if (key == "rank") ps.rank = std::stoi(value);
    else if (key == "n_max") ps.n_max = std::stoi(value);
    else if (key == "inversion_folding") ps.inversion_folded = value == "1";
    else if (key == "includes_non_primitive") ps.includes_non_primitive = value == "1";
    else if (key == "per_letter_g") ps.per_letter_g = std::strtod(value.c_str(), nullptr);
    else if (key == "per_letter_h") ps.per_letter_h = std::strtod(value.c_str(), nullptr);
  }

  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + csv_path.string());
  if (!std::getline(in, line) || line != "class_id,word,word_len,l_g,l_h") {
    throw Error(ErrorCode::IoError, "bad spectrum header in " + csv_path.string());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<std::string, 5> fields;
    std::size_t start = 0;
    for (std::size_t f = 0; f < 5; ++f) {
      const auto comma = line.find(',', start);
      if ((comma == std::string::npos) != (f == 4)) {
        throw Error(ErrorCode::IoError, "bad spectrum row '" + line + "'");
      }
      fields[f] = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      start = comma + 1;
    }
    SpectrumEntry e;
    e.class_id = std::stoi(fields[0]);
    e.word = groups::parse_word(fields[1]);
    e.word_length = std::stoi(fields[2]);
    e.primitive = !groups::is_proper_power(e.word);
    e.l_g = std::strtod(fields[3].c_str(), nullptr);
    e.l_h = std::strtod(fields[4].c_str(), nullptr);
    ps.entries.push_back(std::move(e));
  }
  return ps;
}

std::optional<PairedSpectrum> load_cached(const std::filesystem::path& dir, const std::string& spec_id,
                                          int n_max) {
  const auto csv = cache_csv_path(dir, spec_id, n_max);
  if (!std::filesystem::exists(csv) || !std::filesystem::exists(meta_path(csv))) return std::nullopt;
  auto ps = read_spectrum_csv(csv);
  if (ps.spec_id != spec_id || ps.n_max != n_max) return std::nullopt;
  return ps;
}

CachedBuild build_or_load(const GroupSpec& spec, int n_max, const std::filesystem::path& cache_dir, int threads) {
  const std::string id = groups::spec_hash(spec);
  CachedBuild out;
  out.csv_path = cache_csv_path(cache_dir, id, n_max);
  if (auto cached = load_cached(cache_dir, id, n_max)) {
    out.spectrum = std::move(*cached);
    out.cache_hit = true;
    return out;
  }
  out.spectrum = build_paired_spectrum(spec, n_max, threads);
  std::filesystem::create_directories(cache_dir);
  write_spectrum_csv(out.csv_path, out.spectrum);
  return out;
}

}  // namespace geoflow::spectra
