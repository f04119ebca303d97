#include "geoflow/germs.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "geoflow/error.hpp"
#include "geoflow/io.hpp"

namespace geoflow::germs {

using Eigen::VectorXd;

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Periodic 5-point Laplacian.
SparseMatrix laplacian(const Grid& grid) {
  const double w = 1.0 / (grid.spacing() * grid.spacing());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(5 * grid.size()));
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      const int k = grid.index(i, j);
      entries.emplace_back(k, k, -4.0 * w);
      entries.emplace_back(k, grid.index(i + 1, j), w);
      entries.emplace_back(k, grid.index(i - 1, j), w);
      entries.emplace_back(k, grid.index(i, j + 1), w);
      entries.emplace_back(k, grid.index(i, j - 1), w);
    }
  }
  SparseMatrix lap(grid.size(), grid.size());
  lap.setFromTriplets(entries.begin(), entries.end());
  return lap;
}

VectorXd gauss_map(const SparseMatrix& lap, const VectorXd& beta, double t, const VectorXd& u) {
  const VectorXd e2u = (2.0 * u).array().exp();
  return (lap * u).array() + 1.0 - e2u.array() - 0.5 * t * t * beta.array() / e2u.array();
}

}  // namespace

VectorXd constant_beta(const Grid& grid, double c) { return VectorXd::Constant(grid.size(), c); }

VectorXd sine_beta(const Grid& grid, double c) {
  VectorXd beta(grid.size());
  for (int i = 0; i < grid.n; ++i) {
    const double x = i * grid.spacing();
    for (int j = 0; j < grid.n; ++j) beta[grid.index(i, j)] = c * (1.0 + 0.5 * std::sin(x));
  }
  return beta;
}

double constant_ray_closed_form(double c, double t) {
  double disc = 1.0 - 2.0 * c * t * t;
  // Rounding slack for t² = 1/(2c) computed in floating point.
  if (disc < 0.0 && disc > -1e-14) disc = 0.0;
  if (disc < 0.0) throw Error(ErrorCode::BeyondFold, "2ct^2 = " + std::to_string(2.0 * c * t * t) + " > 1");
  return 0.5 * (1.0 + std::sqrt(disc));
}

double gauss_residual(const Grid& grid, const VectorXd& beta, double t, const VectorXd& u) {
  return gauss_map(laplacian(grid), beta, t, u).lpNorm<Eigen::Infinity>();
}

VectorXd solve_gauss(const Grid& grid, const VectorXd& beta, double t, const std::optional<VectorXd>& warm_start) {
  if (beta.size() != grid.size() || (beta.array() < 0.0).any()) {
    throw Error(ErrorCode::ConfigError, "beta must be a nonnegative grid function");
  }
  const SparseMatrix lap = laplacian(grid);
  VectorXd u = warm_start ? *warm_start : VectorXd::Zero(grid.size());
  VectorXd f = gauss_map(lap, beta, t, u);
  double res = f.lpNorm<Eigen::Infinity>();
  Eigen::SimplicialLDLT<SparseMatrix> solver;
  bool analyzed = false;

  for (int it = 0; it < kMaxNewton && res > 1e-13; ++it) {
    // -F'(u) = -Δ + 2e^{2u} - t²·beta·e^{-2u}
    const VectorXd e2u = (2.0 * u).array().exp();
    const VectorXd diag = 2.0 * e2u.array() - t * t * beta.array() / e2u.array();
    SparseMatrix jac = -lap;
    for (int k = 0; k < grid.size(); ++k) jac.coeffRef(k, k) += diag[k];
    if (!analyzed) {
      solver.analyzePattern(jac);
      analyzed = true;
    }
    solver.factorize(jac);
    if (solver.info() != Eigen::Success) break;
    const VectorXd step = solver.solve(f);
    if (!step.allFinite()) break;

    // Backtrack until the residual decreases.
    double scale = 1.0;
    VectorXd trial;
    VectorXd trial_f;
    double trial_res = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving < 12; ++halving, scale *= 0.5) {
      trial = u + scale * step;
      trial_f = gauss_map(lap, beta, t, trial);
      trial_res = trial_f.lpNorm<Eigen::Infinity>();
      if (trial_res < res) break;
    }
    if (!(trial_res < res)) break;
    u = std::move(trial);
    f = std::move(trial_f);
    res = trial_res;
  }
  if (!(res <= kResidualTol)) {
    throw Error(ErrorCode::FoldReached, "Newton stalled at t = " + std::to_string(t) + " with residual " +
                                            std::to_string(res));
  }
  return u;
}

std::vector<double> uniform_t_grid(double t_max, int steps) {
  std::vector<double> t(static_cast<std::size_t>(steps + 1));
  for (int k = 0; k <= steps; ++k) t[static_cast<std::size_t>(k)] = t_max * k / steps;
  return t;
}

GermRay build_ray(const Grid& grid, const VectorXd& beta, const std::vector<double>& t_grid) {
  if (t_grid.empty() || t_grid.front() != 0.0) throw Error(ErrorCode::BadRay, "t grid must start at 0");
  GermRay ray;
  ray.grid = grid;
  ray.beta = beta;
  const SparseMatrix lap = laplacian(grid);
  VectorXd u = solve_gauss(grid, beta, 0.0);
  ray.t.push_back(0.0);
  ray.u.push_back(u);
  ray.residual.push_back(gauss_map(lap, beta, 0.0, u).lpNorm<Eigen::Infinity>());

  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double target = t_grid[k];
    if (!(target > t_grid[k - 1])) throw Error(ErrorCode::BadRay, "t grid must increase");
    double reached = t_grid[k - 1];
    double step = target - reached;
    int halvings = 0;
    while (reached < target) {
      const double next = std::min(target, reached + step);
      try {
        u = solve_gauss(grid, beta, next, u);
        reached = next;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::FoldReached || ++halvings > 20) {
          throw Error(ErrorCode::FoldReached, "continuation stopped at t = " + std::to_string(reached) +
                                                  " short of " + std::to_string(target));
        }
        step *= 0.5;
      }
    }
    ray.t.push_back(target);
    ray.u.push_back(u);
    ray.residual.push_back(gauss_map(lap, beta, target, u).lpNorm<Eigen::Infinity>());
  }
  return ray;
}

double af_margin(const GermRay& ray, double t) {
  for (std::size_t k = 0; k < ray.t.size(); ++k) {
    if (std::abs(ray.t[k] - t) <= 1e-12 * std::max(1.0, t)) {
      const double tk = ray.t[k];
      return 2.0 - (tk * tk * ray.beta.array() * (-4.0 * ray.u[k]).array().exp()).maxCoeff();
    }
  }
  throw Error(ErrorCode::BadRay, "t = " + std::to_string(t) + " is not a ray sample");
}

RayDiagnostics ray_diagnostics(const GermRay& ray) {
  const std::size_t m = ray.t.size();
  if (m < 4 || ray.t.front() != 0.0) throw Error(ErrorCode::BadRay, "need at least 4 samples starting at t = 0");
  const double dt = ray.t[1] - ray.t[0];
  for (std::size_t k = 1; k < m; ++k) {
    if (std::abs((ray.t[k] - ray.t[k - 1]) - dt) > 1e-9 * dt) throw Error(ErrorCode::BadRay, "nonuniform t spacing");
  }

  RayDiagnostics d;
  const Grid& grid = ray.grid;
  const VectorXd& u0 = ray.u.front();
  const VectorXd plus = solve_gauss(grid, ray.beta, kProbeStep, u0);
  const VectorXd minus = solve_gauss(grid, ray.beta, -kProbeStep, u0);
  d.udot0 = ((plus - minus) / (2.0 * kProbeStep)).lpNorm<Eigen::Infinity>();
  d.uddot0 = (plus - 2.0 * u0 + minus) / (kProbeStep * kProbeStep);

  SparseMatrix op = -laplacian(grid);
  for (int k = 0; k < grid.size(); ++k) op.coeffRef(k, k) += 2.0;
  Eigen::SimplicialLDLT<SparseMatrix> solver(op);
  d.uddot0_linear = solver.solve(VectorXd(-ray.beta));
  d.linear_gap = (d.uddot0 - d.uddot0_linear).lpNorm<Eigen::Infinity>();

  const double beta_total = ray.beta.sum();
  if (beta_total > 0.0) {
    d.kappa = -d.uddot0.sum() / beta_total;
    d.kappa_defined = true;
  } else {
    d.kappa = std::numeric_limits<double>::quiet_NaN();
  }

  d.udot_negative = true;
  for (std::size_t k = 0; k < m; ++k) {
    VectorXd udot;
    if (k == 0) {
      udot = (plus - minus) / (2.0 * kProbeStep);
    } else if (k + 1 < m) {
      udot = (ray.u[k + 1] - ray.u[k - 1]) / (2.0 * dt);
    } else {
      udot = (3.0 * ray.u[k] - 4.0 * ray.u[k - 1] + ray.u[k - 2]) / (2.0 * dt);
    }
    d.min_udot.push_back(udot.minCoeff());
    d.max_udot.push_back(udot.maxCoeff());
    if (k > 0 && !(udot.maxCoeff() < 0.0)) d.udot_negative = false;
    d.af_margin.push_back(af_margin(ray, ray.t[k]));
    d.min_u.push_back(ray.u[k].minCoeff());
    d.max_u.push_back(ray.u[k].maxCoeff());
  }
  if (beta_total == 0.0) d.udot_negative = false;

  d.note =
      "model: flat periodic square, 5-point Laplacian. Equation Δu + 1 - e^{2u} - (t^2/2)|B|^2 e^{-2u} = 0 "
      "gives (-Δ + 2)ü₀ = -|B|^2, hence κ = 1/2. The second-variation form -Δü₀ = -2ü₀ - 2|α|^2 with "
      "|α|^2 = |B|^2 would give κ = 1; the factor is reported, not resolved.";
  return d;
}

void write_ray_csv(const std::filesystem::path& path, const GermRay& ray, const RayDiagnostics& d) {
  std::ostringstream out;
  out << "t,min_u,max_u,min_udot,af_margin,residual\n";
  for (std::size_t k = 0; k < ray.t.size(); ++k) {
    out << fmt17(ray.t[k]) << ',' << fmt17(d.min_u[k]) << ',' << fmt17(d.max_u[k]) << ',' << fmt17(d.min_udot[k])
        << ',' << fmt17(d.af_margin[k]) << ',' << fmt17(ray.residual[k]) << '\n';
  }
  write_atomically(path, out.str());
}

void write_uddot_csv(const std::filesystem::path& path, const GermRay& ray, const RayDiagnostics& d) {
  std::ostringstream out;
  out << "i,j,uddot0\n";
  for (int i = 0; i < ray.grid.n; ++i) {
    for (int j = 0; j < ray.grid.n; ++j) out << i << ',' << j << ',' << fmt17(d.uddot0[ray.grid.index(i, j)]) << '\n';
  }
  write_atomically(path, out.str());
}

}  // namespace geoflow::germs
