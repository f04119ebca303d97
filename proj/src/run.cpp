#include "geoflow/run.hpp"

#include <sys/file.h>
#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <tuple>

#include "geoflow/germs.hpp"
#include "geoflow/groups.hpp"
#include "geoflow/growth.hpp"
#include "geoflow/io.hpp"
#include "geoflow/spectra.hpp"
#include "geoflow/stretch.hpp"
#include "geoflow/thermo.hpp"
#include "geoflow/thermo_selftest.hpp"
#include "json.hpp"

namespace geoflow {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError: return kExitConfig;
    case ErrorCode::IncompleteWindow: return kExitIncompleteWindow;
    default: return kExitNumerical;
  }
}

namespace {

// Exclusive ownership of the cache directory for the life of the run.
class CacheLock {
 public:
  explicit CacheLock(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const auto path = dir / "geoflow.lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::IoError, "cache directory " + dir.string() + " is in use by another process");
    }
  }
  ~CacheLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  CacheLock(const CacheLock&) = delete;
  CacheLock& operator=(const CacheLock&) = delete;

 private:
  int fd_ = -1;
};

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir_.string());
  }

  fs::path path(const std::string& name) {
    written_.push_back(dir_ / name);
    return written_.back();
  }
  void write(const std::string& name, const std::string& content) { write_atomically(path(name), content); }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void rollback() {
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
      auto tmp = p;
      tmp += ".tmp";
      fs::remove(tmp, ec);
    }
  }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.detail());
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::IoError, std::string(name) + ": " + e.what());
  }
}

struct Context {
  const RunConfig& cfg;
  Outputs& out;

  void log(const std::string& msg) const {
    if (cfg.verbose) std::cerr << "geoflow: " << msg << '\n';
  }
};

groups::GroupSpec make_spec(const RunConfig& cfg) {
  const auto base = groups::schottky_fuchsian(cfg.rank, cfg.separation, cfg.seed);
  return groups::perturb(base, cfg.eps, cfg.seed);
}

json certificate_json(const groups::PingPongCertificate& cert) {
  auto side = [](const groups::SideCertificate& s) {
    json j;
    j["ok"] = s.ok;
    j["disjoint_margin"] = s.disjoint_margin;
    j["min_inclusion_margin"] = s.min_inclusion_margin;
    j["length_per_letter"] = s.length_per_letter;
    return j;
  };
  json j;
  j["ok"] = cert.ok;
  j["failure"] = cert.failure;
  j["g"] = side(cert.g);
  j["h"] = side(cert.h);
  return j;
}

json gen_json(const RunConfig& cfg, const groups::GroupSpec& spec) {
  json j;
  j["rank"] = cfg.rank;
  j["separation"] = cfg.separation;
  j["eps"] = cfg.eps;
  j["seed"] = cfg.seed;
  j["spec_hash"] = groups::spec_hash(spec);
  j["certificate"] = certificate_json(groups::verify_ping_pong(spec));
  return j;
}

groups::GroupSpec do_gen(Context& ctx) {
  const auto spec = stage("gen", [&] { return make_spec(ctx.cfg); });
  const auto cert = groups::verify_ping_pong(spec);
  if (!cert.ok) throw Error(ErrorCode::NotProvablyDiscrete, "gen: " + cert.failure);
  ctx.out.write("spec.txt", groups::serialize(spec));
  ctx.out.write_json("gen.json", gen_json(ctx.cfg, spec));
  ctx.log("spec " + groups::spec_hash(spec) + " verified");
  return spec;
}

json spectrum_json(const spectra::PairedSpectrum& ps) {
  json j;
  j["spec_id"] = ps.spec_id;
  j["rank"] = ps.rank;
  j["n_max"] = ps.n_max;
  j["classes"] = ps.entries.size();
  std::size_t primitive = 0;
  for (const auto& e : ps.entries) primitive += e.primitive ? 1 : 0;
  j["primitive_classes"] = primitive;
  j["per_letter"] = {{"g", ps.per_letter_g}, {"h", ps.per_letter_h}};
  j["horizon"] = {{"g", spectra::completeness_horizon(ps, spectra::Side::G)},
                  {"h", spectra::completeness_horizon(ps, spectra::Side::H)}};
  const auto dom = spectra::domination_check(ps);
  j["dominated"] = dom.all_dominated;
  return j;
}

spectra::PairedSpectrum do_spectrum(Context& ctx, const groups::GroupSpec& spec) {
  auto built = stage("spectrum", [&] {
    CacheLock lock(ctx.cfg.cache);
    return spectra::build_or_load(spec, ctx.cfg.n_max, ctx.cfg.cache, ctx.cfg.threads);
  });
  ctx.log(std::string(built.cache_hit ? "cache hit " : "built ") + built.csv_path.string());
  std::ifstream in(built.csv_path, std::ios::binary);
  std::ostringstream csv;
  csv << in.rdbuf();
  ctx.out.write("spectrum.csv", csv.str());
  ctx.out.write_json("spectrum.json", spectrum_json(built.spectrum));
  return std::move(built.spectrum);
}

json growth_json(const RunConfig& cfg, const groups::GroupSpec& spec, const spectra::PairedSpectrum& ps) {
  using spectra::Side;
  const mobius::Point base{0.0, 1.0};
  json j;
  j["h_bowen"] = stretch::to_json(stage("bowen_root(g)", [&] { return growth::bowen_root(ps, Side::G); }));
  j["h_counting"] = stretch::to_json(stage("counting_estimate(g)", [&] { return growth::counting_estimate(ps, Side::G); }));
  j["h_poincare"] = stretch::to_json(stage("poincare_estimate(g)", [&] {
    return growth::poincare_estimate(spec.gens_g, base, cfg.stretch.poincare_word_length);
  }));
  j["delta_bowen"] = stretch::to_json(stage("bowen_root(h)", [&] { return growth::bowen_root(ps, Side::H); }));
  j["delta_counting"] =
      stretch::to_json(stage("counting_estimate(h)", [&] { return growth::counting_estimate(ps, Side::H); }));
  j["delta_poincare"] = stretch::to_json(stage("poincare_estimate(h)", [&] {
    return growth::poincare_estimate(spec.gens_h, base, cfg.stretch.poincare_word_length);
  }));
  return j;
}

stretch::StretchReport stretch_report(const RunConfig& cfg, const groups::GroupSpec& spec,
                                      const spectra::PairedSpectrum& ps) {
  auto opts = cfg.stretch;
  opts.truncation = cfg.truncation;
  opts.threads = cfg.threads;
  auto r = stretch::inequality_report(ps, opts);
  r.spec_hash = groups::spec_hash(spec);
  const mobius::Point base{0.0, 1.0};
  r.h_poincare = stage("poincare_estimate(g)",
                       [&] { return growth::poincare_estimate(spec.gens_g, base, opts.poincare_word_length); });
  r.delta_poincare = stage("poincare_estimate(h)",
                           [&] { return growth::poincare_estimate(spec.gens_h, base, opts.poincare_word_length); });
  return r;
}

json stretch_json(const RunConfig& cfg, const stretch::StretchReport& r) {
  json j = stretch::to_json(r);
  j["provenance"] = {{"rank", cfg.rank},
                     {"separation", cfg.separation},
                     {"eps", cfg.eps},
                     {"seed", cfg.seed},
                     {"truncation", cfg.truncation ? json(*cfg.truncation) : json("auto")}};
  return j;
}

json selftest_json(const std::vector<thermo::SelfTestLine>& lines) {
  json arr = json::array();
  bool all = true;
  for (const auto& l : lines) {
    arr.push_back({{"name", l.name}, {"pass", l.pass}, {"detail", l.detail}});
    all = all && l.pass;
  }
  return {{"all_pass", all}, {"examples", arr}};
}

struct GermRun {
  germs::GermRay ray;
  germs::RayDiagnostics diag;
};

GermRun germ_run(const RunConfig& cfg) {
  const germs::Grid grid{cfg.germ_grid};
  const bool constant = cfg.germ_beta == "constant";
  const auto beta = constant ? germs::constant_beta(grid, cfg.germ_c) : germs::sine_beta(grid, cfg.germ_c);
  double t_max = 1.0;
  if (cfg.germ_t_max) {
    t_max = *cfg.germ_t_max;
  } else if (cfg.germ_c > 0.0) {
    // Constant profile: the fold itself. Otherwise stay below the fold of the peak value.
    t_max = constant ? 1.0 / std::sqrt(2.0 * cfg.germ_c) : 0.9 / std::sqrt(3.0 * cfg.germ_c);
  }
  GermRun g;
  g.ray = germs::build_ray(grid, beta, germs::uniform_t_grid(t_max, cfg.germ_steps));
  g.diag = germs::ray_diagnostics(g.ray);
  return g;
}

json germ_json(const RunConfig& cfg, const GermRun& g) {
  json j;
  j["model"] = "flat periodic square";
  j["grid"] = cfg.germ_grid;
  j["beta"] = cfg.germ_beta;
  j["c"] = cfg.germ_c;
  j["t_max"] = g.ray.t.back();
  j["samples"] = g.ray.t.size();
  j["udot0"] = g.diag.udot0;
  j["udot_negative"] = g.diag.udot_negative;
  if (g.diag.kappa_defined) {
    j["kappa"] = g.diag.kappa;
  } else {
    j["kappa"] = nullptr;
  }
  j["kappa_defined"] = g.diag.kappa_defined;
  j["linear_gap"] = g.diag.linear_gap;
  j["af_margin_end"] = g.diag.af_margin.back();
  double worst = 0.0;
  for (double r : g.ray.residual) worst = std::max(worst, r);
  j["max_residual"] = worst;
  j["note"] = g.diag.note;
  return j;
}

void do_germ(Context& ctx) {
  const auto g = stage("germ", [&] { return germ_run(ctx.cfg); });
  germs::write_ray_csv(ctx.out.path("germ_ray.csv"), g.ray, g.diag);
  germs::write_uddot_csv(ctx.out.path("germ_uddot0.csv"), g.ray, g.diag);
  ctx.out.write_json("germ.json", germ_json(ctx.cfg, g));
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << num(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
  }
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  o << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << H / 2 << ")\">"
    << ylabel << "</text>\n";
  int legend = 0;
  for (const auto& s : series) {
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) o << num(px(x)) << ',' << num(py(y)) << ' ';
    o << "\"/>\n";
    const double ly = T + 14 + 16 * legend++;
    o << "<line x1=\"" << W - R - 110 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R - 90 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R - 85 << "\" y=\"" << ly << "\">" << s.name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string counting_svg(const spectra::PairedSpectrum& ps) {
  std::vector<Series> series;
  for (auto [side, name, color] : {std::tuple{spectra::Side::G, "l_g", "#1f77b4"}, std::tuple{spectra::Side::H, "l_h", "#d62728"}}) {
    const auto lengths = spectra::primitive_lengths(ps, side);
    const double horizon = spectra::completeness_horizon(ps, side);
    Series s{name, color, {}};
    const std::size_t stride = std::max<std::size_t>(1, lengths.size() / 400);
    for (std::size_t i = 0; i < lengths.size() && lengths[i] <= horizon; i += stride) {
      s.points.emplace_back(lengths[i], std::log(static_cast<double>(i + 1)));
    }
    series.push_back(std::move(s));
  }
  return svg_plot("log N(T), primitive classes", "T", "log N(T)", series);
}

std::string pressure_svg(const spectra::PairedSpectrum& ps) {
  const auto pd = thermo::period_data_from_spectrum(ps);
  std::vector<Series> series;
  for (auto [obs, name, color] : {std::tuple{0, "l_g", "#1f77b4"}, std::tuple{1, "l_h", "#d62728"}}) {
    Series s{name, color, {}};
    for (int k = 0; k <= 120; ++k) {
      const double sv = 0.6 * k / 120.0;
      s.points.emplace_back(sv, thermo::orbit_pressure(pd, obs, sv, ps.n_max));
    }
    series.push_back(std::move(s));
  }
  return svg_plot("orbit pressure at n = " + std::to_string(ps.n_max), "s", "P_n(s)", series);
}

int dispatch(Context& ctx) {
  const auto& cmd = ctx.cfg.command;
  if (cmd == "thermo-selftest") {
    const auto lines = thermo::thermo_selftest();
    std::ostringstream text;
    bool all = true;
    for (const auto& l : lines) {
      text << (l.pass ? "PASS " : "FAIL ") << l.name << "  " << l.detail << '\n';
      all = all && l.pass;
    }
    std::cout << text.str();
    ctx.out.write("thermo_selftest.txt", text.str());
    return all ? kExitOk : kExitNumerical;
  }
  if (cmd == "germ") {
    do_germ(ctx);
    return kExitOk;
  }

  const auto spec = do_gen(ctx);
  if (cmd == "gen") return kExitOk;
  const auto ps = do_spectrum(ctx, spec);
  if (cmd == "spectrum") return kExitOk;
  if (cmd == "entropy") {
    ctx.out.write_json("entropy.json", growth_json(ctx.cfg, spec, ps));
    return kExitOk;
  }
  if (cmd == "stretch") {
    const auto r = stage("stretch", [&] { return stretch_report(ctx.cfg, spec, ps); });
    ctx.out.write_json("stretch.json", stretch_json(ctx.cfg, r));
    return r.all_pass() ? kExitOk : kExitNumerical;
  }
  if (cmd == "report") {
    const auto r = stage("stretch", [&] { return stretch_report(ctx.cfg, spec, ps); });
    const auto g = stage("germ", [&] { return germ_run(ctx.cfg); });
    const auto lines = thermo::thermo_selftest();
    json j;
    j["gen"] = gen_json(ctx.cfg, spec);
    j["spectrum"] = spectrum_json(ps);
    j["entropy"] = growth_json(ctx.cfg, spec, ps);
    j["stretch"] = stretch_json(ctx.cfg, r);
    j["germ"] = germ_json(ctx.cfg, g);
    j["thermo_selftest"] = selftest_json(lines);
    ctx.out.write_json("report.json", j);
    ctx.out.write("counting.svg", stage("plot", [&] { return counting_svg(ps); }));
    ctx.out.write("pressure.svg", stage("plot", [&] { return pressure_svg(ps); }));
    return kExitOk;
  }
  throw Error(ErrorCode::ConfigError, "unknown command " + cmd);
}

}  // namespace

int run(const RunConfig& cfg) {
  std::optional<Outputs> out;
  try {
    validate(cfg);
    out.emplace(cfg.out);
    Context ctx{cfg, *out};
    const int status = dispatch(ctx);
    if (status != kExitOk && cfg.command != "stretch" && cfg.command != "thermo-selftest") out->rollback();
    return status;
  } catch (const Error& e) {
    std::cerr << "geoflow: " << e.what() << '\n';
    if (out) out->rollback();
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "geoflow: " << e.what() << '\n';
    if (out) out->rollback();
    return kExitNumerical;
  }
}

}  // namespace geoflow
