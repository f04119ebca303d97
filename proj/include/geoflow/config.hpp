#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "geoflow/stretch.hpp"

namespace geoflow {

struct RunConfig {
  std::string command;

  // [group]
  int rank = 2;
  double separation = 4.0;
  double eps = 0.0;
  std::uint64_t seed = 1;

  // [spectrum]
  int n_max = 12;
  std::optional<double> truncation;  // "auto" = completeness horizon

  // [tolerances] and [growth]
  stretch::Options stretch;

  // [germ]
  int germ_grid = 32;
  std::string germ_beta = "constant";  // constant | sine
  double germ_c = 1.0;
  int germ_steps = 40;
  std::optional<double> germ_t_max;  // "auto" = fold of the constant ray with c·max(profile)

  // [output]
  std::filesystem::path out = "out";
  std::filesystem::path cache = "cache";

  int threads = 1;
  bool verbose = false;
};

/// Applies `key = value` lines under [section] headers onto `cfg`.
/// Unknown sections or keys and invalid values throw ConfigError.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Throws ConfigError on out-of-range fields.
void validate(const RunConfig& cfg);

}  // namespace geoflow
