#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "geoflow/config.hpp"
#include "geoflow/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"geoflow: paired length spectra, entropy and stretch constants of free Kleinian groups"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::string cache_dir;
  int threads = 1;
  bool verbose = false;
  app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides [output] out)");
  app.add_option("--cache", cache_dir, "spectrum cache directory (overrides [output] cache)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "progress messages on stderr");

  const std::pair<const char*, const char*> commands[] = {
      {"gen", "build and verify the group pair"},
      {"spectrum", "build or load the paired length spectrum"},
      {"entropy", "growth-rate estimates for both sides"},
      {"stretch", "C1/C2 estimators and inequality report"},
      {"thermo-selftest", "run the thermodynamic engine's worked examples"},
      {"germ", "solve the Gauss-equation ray"},
      {"report", "aggregate JSON report and SVG plots"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : geoflow::kExitConfig;
  }

  geoflow::RunConfig cfg;
  cfg.command = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) geoflow::apply_config_file(cfg, config_path);
  } catch (const geoflow::Error& e) {
    std::cerr << "geoflow: " << e.what() << '\n';
    return geoflow::kExitConfig;
  }
  if (!out_dir.empty()) cfg.out = out_dir;
  if (!cache_dir.empty()) cfg.cache = cache_dir;
  cfg.threads = threads;
  cfg.verbose = verbose;
  return geoflow::run(cfg);
}
