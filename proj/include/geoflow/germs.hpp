#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace geoflow::germs {

/// N×N periodic grid on the flat square [0, length)², row-major (i = x index).
struct Grid {
  int n = 32;
  double length = 6.283185307179586;

  double spacing() const { return length / n; }
  int size() const { return n * n; }
  int index(int i, int j) const { return ((i % n + n) % n) * n + ((j % n + n) % n); }
};

Eigen::VectorXd constant_beta(const Grid& grid, double c);
/// c·(1 + ½ sin x).
Eigen::VectorXd sine_beta(const Grid& grid, double c);

/// e^{2u} for constant beta = c: (1 + sqrt(1 - 2ct²))/2. Throws BeyondFold
/// when 2ct² > 1.
double constant_ray_closed_form(double c, double t);

/// ||Δu + 1 - e^{2u} - (t²/2)·beta·e^{-2u}||_∞ with the 5-point Laplacian.
double gauss_residual(const Grid& grid, const Eigen::VectorXd& beta, double t, const Eigen::VectorXd& u);

inline constexpr double kResidualTol = 1e-10;
inline constexpr int kMaxNewton = 50;

/// Newton iteration from `warm_start` (zero when absent). Throws
/// FoldReached when the iteration fails to reach kResidualTol.
Eigen::VectorXd solve_gauss(const Grid& grid, const Eigen::VectorXd& beta, double t,
                            const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

struct GermRay {
  Grid grid;
  Eigen::VectorXd beta;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> u;
  std::vector<double> residual;
};

/// Continuation along t_grid (t_grid[0] = 0, increasing). A failed step
/// is retried through halved substeps; FoldReached after 20 halvings.
GermRay build_ray(const Grid& grid, const Eigen::VectorXd& beta, const std::vector<double>& t_grid);

/// t_k = k·t_max/steps, k = 0..steps.
std::vector<double> uniform_t_grid(double t_max, int steps);

inline constexpr double kProbeStep = 2e-3;

struct RayDiagnostics {
  /// max |u̇₀| from solves at ±kProbeStep.
  double udot0 = 0.0;
  std::vector<double> min_udot;
  std::vector<double> max_udot;
  bool udot_negative = false;  // u̇ < 0 everywhere at every t > 0
  Eigen::VectorXd uddot0;
  /// Solution of (-Δ + 2)·w = -beta; the linearized route to ü₀.
  Eigen::VectorXd uddot0_linear;
  double linear_gap = 0.0;
  /// -∫ü₀ / ∫beta; NaN with kappa_defined = false when beta ≡ 0.
  double kappa = 0.0;
  bool kappa_defined = false;
  std::vector<double> af_margin;
  std::vector<double> min_u;
  std::vector<double> max_u;
  std::string note;
};

/// Requires at least 4 uniformly spaced samples starting at t = 0;
/// throws BadRay otherwise.
RayDiagnostics ray_diagnostics(const GermRay& ray);

/// 2 - max(t²·beta·e^{-4u_t}); t must be one of the stored samples.
double af_margin(const GermRay& ray, double t);

/// t,min_u,max_u,min_udot,af_margin,residual
void write_ray_csv(const std::filesystem::path& path, const GermRay& ray, const RayDiagnostics& d);
/// i,j,uddot0
void write_uddot_csv(const std::filesystem::path& path, const GermRay& ray, const RayDiagnostics& d);

}  // namespace geoflow::germs
