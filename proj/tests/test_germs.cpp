#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "geoflow/error.hpp"
#include "geoflow/germs.hpp"

using namespace geoflow;
using namespace geoflow::germs;

namespace {

// Larger root of x^2 - x + c t^2 / 2 by Newton from x = 1.
double quadratic_root(double c, double t) {
  double x = 1.0;
  for (int i = 0; i < 100; ++i) x -= (x * x - x + 0.5 * c * t * t) / (2 * x - 1);
  return x;
}

const GermRay& constant_ray() {
  static const auto ray = [] {
    const Grid grid{16};
    return build_ray(grid, constant_beta(grid, 1.0), uniform_t_grid(std::sqrt(0.5), 40));
  }();
  return ray;
}

}  // namespace

TEST_CASE("closed form") {
  CHECK(constant_ray_closed_form(3.0, 0.0) == 1.0);
  CHECK(constant_ray_closed_form(1.0, std::sqrt(0.5)) == doctest::Approx(0.5).epsilon(1e-12));
  const double oracle = quadratic_root(1.0, 0.5);
  CHECK(std::abs(oracle - 0.8535533905932737) <= 1e-15);
  CHECK(std::abs(constant_ray_closed_form(1.0, 0.5) - oracle) <= 1e-15);
  try {
    constant_ray_closed_form(1.0, 0.75);
    FAIL("expected BeyondFold");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BeyondFold);
  }
}

TEST_CASE("solver at t = 0 and on constant beta") {
  const Grid grid{16};
  const auto beta = sine_beta(grid, 1.0);
  CHECK(solve_gauss(grid, beta, 0.0).cwiseAbs().maxCoeff() <= 1e-10);
  for (double t : {0.2, 0.5}) {
    const auto u = solve_gauss(grid, constant_beta(grid, 1.0), t);
    const double exact = 0.5 * std::log(quadratic_root(1.0, t));
    CHECK((u.array() - exact).abs().maxCoeff() <= 1e-8);
    CHECK(gauss_residual(grid, constant_beta(grid, 1.0), t, u) <= kResidualTol);
  }
  try {
    solve_gauss(grid, constant_beta(grid, 1.0), 0.75);
    FAIL("expected FoldReached");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FoldReached);
  }
}

TEST_CASE("sinusoidal beta: residual and symmetry") {
  const Grid grid{16};
  const auto beta = sine_beta(grid, 1.0);
  const auto u = solve_gauss(grid, beta, 0.5);
  CHECK(gauss_residual(grid, beta, 0.5, u) <= kResidualTol);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      // sin is symmetric about x = π/2 and the data do not depend on y.
      CHECK(std::abs(u[grid.index(i, j)] - u[grid.index(grid.n / 2 - i, j)]) <= 1e-10);
      CHECK(std::abs(u[grid.index(i, j)] - u[grid.index(i, 0)]) <= 1e-10);
    }
  CHECK(u.maxCoeff() <= 0.0);
}

TEST_CASE("constant ray against the closed form") {
  const auto& ray = constant_ray();
  REQUIRE(ray.t.size() == 41);
  for (std::size_t k = 0; k < ray.t.size(); ++k) {
    CHECK(ray.residual[k] <= kResidualTol);
    CHECK(ray.u[k].maxCoeff() <= 1e-14);
    if (k + 1 < ray.t.size()) {
      const double exact = 0.5 * std::log(constant_ray_closed_form(1.0, ray.t[k]));
      CHECK((ray.u[k].array() - exact).abs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("constant ray diagnostics") {
  const auto& ray = constant_ray();
  const auto d = ray_diagnostics(ray);
  CHECK(d.udot0 <= 1e-6);
  CHECK(d.udot_negative);
  // ü₀ = -c/2 pointwise from differentiating the closed form twice.
  CHECK((d.uddot0.array() + 0.5).abs().maxCoeff() <= 1e-5);
  CHECK(d.linear_gap <= 1e-5);
  CHECK(d.kappa_defined);
  CHECK(std::abs(d.kappa - 0.5) <= 1e-3);
  CHECK(!d.note.empty());

  CHECK(af_margin(ray, 0.0) == 2.0);
  CHECK(std::abs(d.af_margin.back()) <= 1e-4);
  for (std::size_t k = 1; k < d.af_margin.size(); ++k) CHECK(d.af_margin[k] < d.af_margin[k - 1]);

  // O(δ) steps away from the fold.
  const double dt = ray.t[1];
  for (std::size_t k = 1; k <= 20; ++k) CHECK((ray.u[k] - ray.u[k - 1]).cwiseAbs().maxCoeff() <= dt);
}

TEST_CASE("sinusoidal kappa matches the constant one") {
  const Grid grid{16};
  const auto ray = build_ray(grid, sine_beta(grid, 1.0), uniform_t_grid(0.5, 10));
  const auto d = ray_diagnostics(ray);
  CHECK(d.udot_negative);
  CHECK(d.linear_gap <= 1e-5);
  CHECK(std::abs(d.kappa - ray_diagnostics(constant_ray()).kappa) <= 1e-3);
}

TEST_CASE("zero beta stays at the Fuchsian point") {
  const Grid grid{8};
  const auto ray = build_ray(grid, constant_beta(grid, 0.0), uniform_t_grid(1.0, 5));
  for (const auto& u : ray.u) CHECK(u.cwiseAbs().maxCoeff() <= 1e-10);
  const auto d = ray_diagnostics(ray);
  CHECK(!d.kappa_defined);
  CHECK(std::isnan(d.kappa));
}

TEST_CASE("bad rays") {
  const Grid grid{8};
  const auto beta = constant_beta(grid, 1.0);
  CHECK_THROWS_AS(build_ray(grid, beta, {0.1, 0.2}), Error);
  CHECK_THROWS_AS(build_ray(grid, beta, {0.0, 0.2, 0.1}), Error);
  try {
    ray_diagnostics(build_ray(grid, beta, {0.0, 0.1, 0.3, 0.4}));
    FAIL("expected BadRay");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadRay);
  }
  CHECK_THROWS_AS(ray_diagnostics(build_ray(grid, beta, {0.0, 0.1, 0.2})), Error);
}

TEST_CASE("csv export") {
  const auto dir = std::filesystem::temp_directory_path() / "geoflow_test_germs";
  std::filesystem::create_directories(dir);
  const Grid grid{8};
  const auto ray = build_ray(grid, constant_beta(grid, 1.0), uniform_t_grid(0.5, 5));
  const auto d = ray_diagnostics(ray);
  write_ray_csv(dir / "ray.csv", ray, d);
  write_uddot_csv(dir / "uddot.csv", ray, d);
  std::ifstream in(dir / "ray.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,min_u,max_u,min_udot,af_margin,residual");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 6);
  std::ifstream uin(dir / "uddot.csv");
  int urows = -1;
  for (std::string line; std::getline(uin, line);) ++urows;
  CHECK(urows == 64);
  std::filesystem::remove_all(dir);
}
