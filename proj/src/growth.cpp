#include "geoflow/growth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "geoflow/error.hpp"
#include "geoflow/thermo.hpp"

namespace geoflow::growth {

std::string to_string(Method m) {
  switch (m) {
    case Method::CountingFit: return "CountingFit";
    case Method::PoincareSweep: return "PoincareSweep";
    case Method::BowenRoot: return "BowenRoot";
  }
  return "?";
}

double GrowthEstimate::diagnostic() const {
  switch (method) {
    case Method::CountingFit: return std_error;
    case Method::PoincareSweep: return bracket_width + stability_gap;
    case Method::BowenRoot: return bracket_width + residual + stability_gap;
  }
  return 0.0;
}

namespace {

struct Fit {
  double slope = 0.0;
  double slope_error = 0.0;
};

Fit least_squares(std::span<const double> x, std::span<const double> y) {
  const double m = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Fit f;
  f.slope = sxy / sxx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - my - f.slope * (x[i] - mx);
      ssr += r * r;
    }
    f.slope_error = std::sqrt(ssr / (m - 2.0) / sxx);
  }
  return f;
}

}  // namespace

GrowthEstimate counting_estimate(std::span<const double> lengths, double t0, double t1, double horizon) {
  if (t1 > horizon) {
    throw Error(ErrorCode::IncompleteWindow,
                "window end " + std::to_string(t1) + " beyond completeness horizon " + std::to_string(horizon));
  }
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] < t0 || lengths[i] > t1) continue;
    // N(T) is a step function; sample it at the top of each step.
    if (i + 1 < lengths.size() && lengths[i + 1] == lengths[i]) continue;
    x.push_back(lengths[i]);
    y.push_back(std::log(static_cast<double>(i + 1)));
  }
  if (static_cast<int>(x.size()) < kMinWindowClasses) {
    throw Error(ErrorCode::IncompleteWindow, "only " + std::to_string(x.size()) + " classes in [" +
                                                 std::to_string(t0) + ", " + std::to_string(t1) + "]");
  }
  const Fit f = least_squares(x, y);
  GrowthEstimate e;
  e.method = Method::CountingFit;
  e.value = f.slope;
  e.window_lo = t0;
  e.window_hi = t1;
  e.samples = static_cast<int>(x.size());
  // N(T) ~ e^{hT}/(hT): the log T correction biases the slope by about 1/T.
  const double bias = 1.0 / (0.5 * (t0 + t1));
  e.std_error = std::hypot(f.slope_error, bias);
  return e;
}

GrowthEstimate counting_estimate(const spectra::PairedSpectrum& ps, spectra::Side side) {
  const double horizon = spectra::completeness_horizon(ps, side);
  const auto lengths = spectra::primitive_lengths(ps, side);
  return counting_estimate(lengths, 0.5 * horizon, horizon, horizon);
}

namespace {

using Mat = std::array<mobius::cplx, 4>;

// Products are left unnormalized: det stays 1 up to rounding, and
// recomputing it would cancel catastrophically for long words.
Mat multiply(const Mat& x, const Mat& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2],
          x[2] * y[1] + x[3] * y[3]};
}

// d(j, A j) = acosh(|A|_F^2 / 2) for det A = 1.
double displacement_at_j(const Mat& a) {
  double f = 0.0;
  for (const auto& z : a) f += std::norm(z);
  return std::acosh(std::max(1.0, 0.5 * f));
}

// log of the sphere sum Σ exp(-s d) for each sphere.
std::vector<double> log_sphere_sums(const std::vector<std::vector<double>>& spheres, double s) {
  std::vector<double> out;
  for (const auto& d : spheres) {
    const double dmin = *std::min_element(d.begin(), d.end());
    std::vector<double> terms(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) terms[i] = std::exp(-s * (d[i] - dmin));
    out.push_back(-s * dmin + std::log(thermo::pairwise_sum(terms)));
  }
  return out;
}

struct Sweep {
  const std::vector<std::vector<double>>* spheres;
  int first;
  int last;

  double slope(double s) const {
    const auto logs = log_sphere_sums(*spheres, s);
    std::vector<double> x;
    std::vector<double> y;
    for (int n = first; n <= last; ++n) {
      x.push_back(n);
      y.push_back(logs[static_cast<std::size_t>(n - 1)]);
    }
    return least_squares(x, y).slope;
  }

  // Returns the zero and the final bracket width.
  std::pair<double, double> zero() const {
    constexpr double kStep = 0.05;
    constexpr int kGrid = 400;
    if (slope(0.0) <= 1e-12) return {0.0, 0.0};
    double lo = 0.0;
    double hi = -1.0;
    for (int j = 1; j <= kGrid; ++j) {
      const double s = j * kStep;
      if (slope(s) < 0.0) {
        hi = s;
        break;
      }
      lo = s;
    }
    if (hi < 0.0) {
      throw Error(ErrorCode::SweepBracketFailure, "fitted growth stays positive up to s = " + std::to_string(kGrid * kStep));
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi || hi - lo <= 1e-10) break;
      (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    return {0.5 * (lo + hi), hi - lo};
  }
};

}  // namespace

GrowthEstimate poincare_estimate(std::span<const mobius::Isometry> gens, const mobius::Point& basepoint,
                                 int max_word_length) {
  if (!(basepoint.height > 0.0)) throw Error(ErrorCode::InvalidPoint, "basepoint must lie inside the space");
  if (max_word_length < 4) throw Error(ErrorCode::ConfigError, "need word length at least 4");
  const int m = 2 * static_cast<int>(gens.size());

  // Conjugate so that the basepoint becomes j.
  const double r = std::sqrt(basepoint.height);
  const auto to_base = mobius::Isometry::from_entries(r, basepoint.z / r, 0.0, 1.0 / r);
  const auto from_base = to_base.inverse();
  std::vector<Mat> letters;
  for (int code = 0; code < m; ++code) {
    const auto& g = gens[static_cast<std::size_t>(code / 2)];
    letters.push_back((from_base * (code % 2 == 0 ? g : g.inverse()) * to_base).entries());
  }

  std::vector<std::vector<double>> spheres(static_cast<std::size_t>(max_word_length));
  auto extend = [&](auto&& self, const Mat& prefix, int last, int len) -> void {
    spheres[static_cast<std::size_t>(len - 1)].push_back(displacement_at_j(prefix));
    if (len == max_word_length) return;
    for (int code = 0; code < m; ++code) {
      if (code == (last ^ 1)) continue;
      self(self, multiply(prefix, letters[static_cast<std::size_t>(code)]), code, len + 1);
    }
  };
  for (int code = 0; code < m; ++code) extend(extend, letters[static_cast<std::size_t>(code)], code, 1);

  const int last = max_word_length;
  const int first = std::max(1, last / 2);
  const auto [value, width] = Sweep{&spheres, first, last}.zero();
  const auto [previous, unused] = Sweep{&spheres, std::max(1, (last - 2) / 2), last - 2}.zero();

  GrowthEstimate e;
  e.method = Method::PoincareSweep;
  e.value = value;
  e.window_lo = first;
  e.window_hi = last;
  e.samples = last - first + 1;
  e.bracket_width = width;
  e.stability_gap = std::abs(value - previous);
  return e;
}

GrowthEstimate bowen_root(const spectra::PairedSpectrum& ps, spectra::Side side) {
  if (ps.n_max < 6) throw Error(ErrorCode::ConfigError, "Bowen root needs n_max >= 6");
  const auto pd = thermo::period_data_from_spectrum(ps);
  const auto root = thermo::bowen_solve(pd, side == spectra::Side::G ? 0 : 1);
  GrowthEstimate e;
  e.method = Method::BowenRoot;
  e.value = root.root;
  e.samples = root.n;
  e.residual = root.residual;
  e.bracket_width = root.bracket_width;
  e.stability_gap = root.stability_gap;
  return e;
}

}  // namespace geoflow::growth
