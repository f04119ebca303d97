#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "geoflow/config.hpp"
#include "geoflow/error.hpp"
#include "geoflow/run.hpp"
#include "json.hpp"

using namespace geoflow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig config(const std::string& command, const TempDir& dir) {
  RunConfig cfg;
  cfg.command = command;
  cfg.n_max = 8;
  cfg.out = dir.path / "out";
  cfg.cache = dir.path / "cache";
  cfg.germ_grid = 8;
  cfg.germ_steps = 8;
  return cfg;
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  RunConfig cfg;
  apply_config_text(cfg,
                    "# comment\n[group]\nrank = 3\nseparation = 5.5 ; trailing\neps = 0.01\n"
                    "[spectrum]\nn_max = 9\ntruncation = auto\n[germ]\nbeta = sine\n");
  CHECK(cfg.rank == 3);
  CHECK(cfg.separation == 5.5);
  CHECK(cfg.eps == 0.01);
  CHECK(cfg.n_max == 9);
  CHECK(!cfg.truncation);
  CHECK(cfg.germ_beta == "sine");
  CHECK_NOTHROW(validate(cfg));

  for (const char* bad : {"[group]\ncolour = red\n", "[nowhere]\nx = 1\n", "[group]\nrank = two\n",
                          "[group\nrank = 2\n", "rank\n", "[germ]\nbeta = cosine\n"}) {
    RunConfig c;
    INFO(bad);
    try {
      apply_config_text(c, bad);
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
    }
  }
  RunConfig c;
  c.n_max = 3;
  CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("exit codes") {
  CHECK(exit_code(ErrorCode::ConfigError) == kExitConfig);
  CHECK(exit_code(ErrorCode::IoError) == kExitConfig);
  CHECK(exit_code(ErrorCode::IncompleteWindow) == kExitIncompleteWindow);
  CHECK(exit_code(ErrorCode::FoldReached) == kExitNumerical);
  CHECK(exit_code(ErrorCode::NotProvablyDiscrete) == kExitNumerical);
}

TEST_CASE("spectrum twice: cache hit and identical artifacts") {
  TempDir dir("geoflow_test_cli_spectrum");
  const auto cfg = config("spectrum", dir);
  REQUIRE(run(cfg) == kExitOk);
  const auto csv = slurp(cfg.out / "spectrum.csv");
  const auto json = slurp(cfg.out / "spectrum.json");
  REQUIRE(!csv.empty());
  const auto cache_files = std::distance(fs::directory_iterator(cfg.cache), fs::directory_iterator{});
  REQUIRE(run(cfg) == kExitOk);
  CHECK(slurp(cfg.out / "spectrum.csv") == csv);
  CHECK(slurp(cfg.out / "spectrum.json") == json);
  CHECK(std::distance(fs::directory_iterator(cfg.cache), fs::directory_iterator{}) == cache_files);
}

TEST_CASE("stretch on the baseline") {
  TempDir dir("geoflow_test_cli_stretch");
  const auto cfg = config("stretch", dir);
  REQUIRE(run(cfg) == kExitOk);
  const auto j = nlohmann::json::parse(slurp(cfg.out / "stretch.json"));
  CHECK(j["C1_der"]["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(j["C2_der"]["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(j["rigidity"]["proportional"].get<bool>());
  CHECK(j["all_pass"].get<bool>());
  const auto first = slurp(cfg.out / "stretch.json");
  REQUIRE(run(cfg) == kExitOk);
  CHECK(slurp(cfg.out / "stretch.json") == first);
}

TEST_CASE("every command is deterministic") {
  for (const char* command : {"gen", "entropy", "germ", "report", "thermo-selftest"}) {
    INFO(command);
    TempDir a("geoflow_test_cli_det_a");
    TempDir b("geoflow_test_cli_det_b");
    REQUIRE(run(config(command, a)) == kExitOk);
    REQUIRE(run(config(command, b)) == kExitOk);
    int files = 0;
    for (const auto& entry : fs::directory_iterator(a.path / "out")) {
      const auto name = entry.path().filename();
      INFO(name.string());
      CHECK(slurp(entry.path()) == slurp(b.path / "out" / name));
      ++files;
    }
    CHECK(files > 0);
  }
}

TEST_CASE("failures remove partial outputs") {
  TempDir dir("geoflow_test_cli_fail");
  auto cfg = config("stretch", dir);
  cfg.truncation = 100.0;
  CHECK(run(cfg) == kExitIncompleteWindow);
  CHECK(!fs::exists(cfg.out / "stretch.json"));

  auto germ = config("germ", dir);
  germ.germ_t_max = 2.0;
  CHECK(run(germ) == kExitNumerical);
  CHECK(!fs::exists(germ.out / "germ_ray.csv"));

  auto bad = config("nonsense", dir);
  CHECK(run(bad) == kExitConfig);
}

TEST_CASE("command line") {
  TempDir dir("geoflow_test_cli_bin");
  const std::string bin = GEOFLOW_BIN;
  const auto ini = dir.path / "run.ini";
  std::ofstream(ini) << "[spectrum]\nn_max = 7\n";
  const std::string flags = " --out " + (dir.path / "out").string() + " --cache " + (dir.path / "cache").string();
  CHECK(shell(bin + " gen --config " + ini.string() + flags + " > /dev/null 2>&1") == 0);
  CHECK(fs::exists(dir.path / "out" / "gen.json"));
  CHECK(shell(bin + " thermo-selftest" + flags + " > /dev/null 2>&1") == 0);

  std::ofstream(ini) << "[spectrum]\nbogus = 1\n";
  CHECK(shell(bin + " gen --config " + ini.string() + flags + " > /dev/null 2>&1") == 2);
  CHECK(shell(bin + " gen --threads 0" + flags + " > /dev/null 2>&1") == 2);
  CHECK(shell(bin + flags + " > /dev/null 2>&1") == 2);
}
