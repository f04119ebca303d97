#include "geoflow/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw Error(ErrorCode::ConfigError, "bad value for " + key + ": '" + value + "'");
  return out;
}

std::optional<double> parse_auto(const std::string& key, const std::string& value) {
  if (value == "auto") return std::nullopt;
  return parse_number<double>(key, value);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"group.rank", [](RunConfig& c, const auto& k, const auto& v) { c.rank = parse_number<int>(k, v); }},
      {"group.separation", [](RunConfig& c, const auto& k, const auto& v) { c.separation = parse_number<double>(k, v); }},
      {"group.eps", [](RunConfig& c, const auto& k, const auto& v) { c.eps = parse_number<double>(k, v); }},
      {"group.seed", [](RunConfig& c, const auto& k, const auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"spectrum.n_max", [](RunConfig& c, const auto& k, const auto& v) { c.n_max = parse_number<int>(k, v); }},
      {"spectrum.truncation", [](RunConfig& c, const auto& k, const auto& v) { c.truncation = parse_auto(k, v); }},
      {"tolerances.proportionality",
       [](RunConfig& c, const auto& k, const auto& v) { c.stretch.proportionality_tol = parse_number<double>(k, v); }},
      {"tolerances.slack_factor",
       [](RunConfig& c, const auto& k, const auto& v) { c.stretch.slack_factor = parse_number<double>(k, v); }},
      {"tolerances.cross", [](RunConfig& c, const auto& k, const auto& v) { c.stretch.cross_tol = parse_number<double>(k, v); }},
      {"tolerances.rigidity",
       [](RunConfig& c, const auto& k, const auto& v) { c.stretch.rigidity_tol = parse_number<double>(k, v); }},
      {"growth.poincare_word_length",
       [](RunConfig& c, const auto& k, const auto& v) { c.stretch.poincare_word_length = parse_number<int>(k, v); }},
      {"germ.grid", [](RunConfig& c, const auto& k, const auto& v) { c.germ_grid = parse_number<int>(k, v); }},
      {"germ.beta",
       [](RunConfig& c, const auto& k, const auto& v) {
         if (v != "constant" && v != "sine") throw Error(ErrorCode::ConfigError, k + " must be constant or sine");
         c.germ_beta = v;
       }},
      {"germ.c", [](RunConfig& c, const auto& k, const auto& v) { c.germ_c = parse_number<double>(k, v); }},
      {"germ.steps", [](RunConfig& c, const auto& k, const auto& v) { c.germ_steps = parse_number<int>(k, v); }},
      {"germ.t_max", [](RunConfig& c, const auto& k, const auto& v) { c.germ_t_max = parse_auto(k, v); }},
      {"output.out", [](RunConfig& c, const auto&, const auto& v) { c.out = v; }},
      {"output.cache", [](RunConfig& c, const auto&, const auto& v) { c.cache = v; }},
  };
  return table;
}

}  // namespace

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::ConfigError, where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, where + "expected key = value");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error(ErrorCode::ConfigError, where + "unknown key " + key);
    try {
      it->second(cfg, key, trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, where + e.detail());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(cfg, text.str());
}

void validate(const RunConfig& cfg) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::ConfigError, what);
  };
  require(cfg.rank >= 2, "group.rank must be at least 2");
  require(cfg.separation > 0.0, "group.separation must be positive");
  require(cfg.eps >= 0.0, "group.eps must be nonnegative");
  require(cfg.n_max >= 6, "spectrum.n_max must be at least 6");
  require(!cfg.truncation || *cfg.truncation > 0.0, "spectrum.truncation must be positive");
  require(cfg.stretch.proportionality_tol > 0.0, "tolerances.proportionality must be positive");
  require(cfg.stretch.slack_factor > 0.0, "tolerances.slack_factor must be positive");
  require(cfg.stretch.cross_tol > 0.0, "tolerances.cross must be positive");
  require(cfg.stretch.rigidity_tol > 0.0, "tolerances.rigidity must be positive");
  require(cfg.stretch.poincare_word_length >= 4, "growth.poincare_word_length must be at least 4");
  require(cfg.germ_grid >= 4 && cfg.germ_grid % 2 == 0, "germ.grid must be an even number >= 4");
  require(cfg.germ_c >= 0.0, "germ.c must be nonnegative");
  require(cfg.germ_steps >= 3, "germ.steps must be at least 3");
  require(!cfg.germ_t_max || *cfg.germ_t_max > 0.0, "germ.t_max must be positive");
  require(cfg.threads >= 1, "--threads must be positive");
}

}  // namespace geoflow
