#include "geoflow/thermo_selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "geoflow/error.hpp"
#include "geoflow/groups.hpp"
#include "geoflow/spectra.hpp"
#include "geoflow/thermo.hpp"

namespace geoflow::thermo {

namespace {

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

std::string show(double got, double want) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "got %.15g want %.15g", got, want);
  return buf;
}

// Newton on e^{-s} + e^{-2s} = 1.
double two_roof_root() {
  double s = 0.5;
  for (int i = 0; i < 60; ++i) {
    const double f = std::exp(-s) + std::exp(-2.0 * s) - 1.0;
    const double df = -std::exp(-s) - 2.0 * std::exp(-2.0 * s);
    s -= f / df;
  }
  return s;
}

// Cyclic words of length n in the rank-k free-group shift: tr A^n.
double free_shift_points(int rank, int n) {
  return std::pow(2.0 * rank - 1.0, n) + rank + (rank - 1) * (n % 2 == 0 ? 1.0 : -1.0);
}

}  // namespace

std::vector<SelfTestLine> thermo_selftest() {
  std::vector<SelfTestLine> lines;
  auto run = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
      auto [ok, detail] = body();
      lines.push_back({name, ok, detail});
    } catch (const std::exception& e) {
      lines.push_back({name, false, e.what()});
    }
  };
  auto close = [](double got, double want, double tol) {
    return std::make_pair(std::abs(got - want) <= tol, show(got, want));
  };

  const auto full2 = MarkovShift::full(2);
  const auto golden = MarkovShift::golden_mean();
  const auto zero2 = Potential::constant(2, 0.0);
  const auto ind0 = Potential::per_symbol({1.0, 0.0});
  const auto pm1 = Potential::per_symbol({1.0, -1.0});
  const double parry0 = kPhi * kPhi / (kPhi * kPhi + 1.0);

  run("transfer_pressure/full2_zero", [&] { return close(transfer_pressure(full2, zero2), std::log(2.0), 1e-12); });
  run("transfer_pressure/full2_depth1", [&] {
    return close(transfer_pressure(full2, Potential::per_symbol({0.3, -1.1})), std::log(std::exp(0.3) + std::exp(-1.1)),
                 1e-12);
  });
  run("transfer_pressure/golden_zero", [&] { return close(transfer_pressure(golden, zero2), std::log(kPhi), 1e-12); });

  run("orbit_pressure/constant_roof", [&] {
    const Potential obs[] = {Potential::constant(2, 1.5)};
    const auto pd = period_data_from_shift(full2, obs, 8);
    return close(orbit_pressure(pd, 0, 0.7, 8), std::log(pd.point_count(8)) / 8 - 0.7 * 1.5, 1e-12);
  });
  run("orbit_pressure/free_shift_s0", [&] {
    const Potential obs[] = {Potential::constant(4, 1.0)};
    const auto pd = period_data_from_shift(MarkovShift::free_group(2), obs, 9);
    bool ok = true;
    double prev = 0.0;
    for (int n = 1; n <= 9; ++n) {
      const double p = orbit_pressure(pd, 0, 0.0, n);
      ok = ok && std::abs(p - std::log(free_shift_points(2, n)) / n) <= 1e-12;
      if (n > 1) ok = ok && std::abs(p - std::log(3.0)) <= std::abs(prev - std::log(3.0));
      prev = p;
    }
    return std::make_pair(ok, "level-9 value " + show(prev, std::log(3.0)));
  });
  run("orbit_pressure/fuchsian_sides_equal", [&] {
    const auto spec = groups::schottky_fuchsian(2, 4.0, 1);
    const auto pd = period_data_from_spectrum(spectra::build_paired_spectrum(spec, 8));
    double worst = 0.0;
    for (int n = 1; n <= 8; ++n) {
      for (double s : {0.0, 0.2, 0.5}) worst = std::max(worst, std::abs(orbit_pressure(pd, 0, s, n) - orbit_pressure(pd, 1, s, n)));
    }
    return std::make_pair(worst == 0.0, "max difference " + show(worst, 0.0));
  });

  auto bowen_full2 = [&](std::vector<double> roof) {
    const Potential obs[] = {Potential::per_symbol(std::move(roof))};
    return bowen_solve(period_data_from_shift(full2, obs, 12), 0);
  };
  run("bowen_solve/roof1", [&] { return close(bowen_full2({1.0, 1.0}).root, std::log(2.0), 1e-10); });
  run("bowen_solve/roof2", [&] { return close(bowen_full2({2.0, 2.0}).root, std::log(2.0) / 2.0, 1e-10); });
  run("bowen_solve/roof12", [&] { return close(bowen_full2({1.0, 2.0}).root, two_roof_root(), 1e-10); });

  run("equilibrium_average/one", [&] {
    return close(equilibrium_average(full2, Potential::per_symbol({0.2, -0.4}), Potential::constant(2, 1.0)), 1.0, 1e-12);
  });
  run("equilibrium_average/full2_symbol0", [&] { return close(equilibrium_average(full2, zero2, ind0), 0.5, 1e-12); });
  run("equilibrium_average/golden_symbol0", [&] { return close(equilibrium_average(golden, zero2, ind0), parry0, 1e-10); });

  run("variance/constant", [&] { return close(variance(full2, zero2, Potential::constant(2, 3.0)), 0.0, 1e-12); });
  run("variance/coboundary", [&] {
    const double v[] = {0.4, -1.3};
    return close(variance(full2, Potential::per_symbol({0.1, 0.5}), Potential::coboundary(v)), 0.0, 1e-8);
  });
  run("variance/fair_coin", [&] { return close(variance(full2, zero2, pm1), 1.0, 1e-6); });

  const auto c0 = Potential::constant(2, -std::log(2.0));
  run("pressure_metric/coboundary_velocity", [&] {
    const double v[] = {0.7, -0.2};
    return close(pressure_metric_norm(full2, c0, Potential::coboundary(v)).variance_form, 0.0, 1e-8);
  });
  run("pressure_metric/roof_family_hessian", [&] {
    // c_t = -h_t·F_t with F_t = 1 + t·a·(±1): the velocity norm equals the
    // second derivative of h_t / h_0 (F_t has unit mean under m_0).
    constexpr double a = 0.3;
    auto h_at = [&](double t) { return bowen_full2({1.0 + a * t, 1.0 - a * t}).root; };
    const double h0 = h_at(0.0);
    constexpr double step = 1e-3;
    const double hdot = (h_at(step) - h_at(-step)) / (2.0 * step);
    const double hess = (h_at(step) - 2.0 * h0 + h_at(-step)) / (step * step) / h0;
    const Potential cdot = axpy(Potential::constant(2, -hdot), -h0 * a, pm1, 2);
    return close(pressure_metric_norm(full2, c0, cdot).variance_form, hess, 1e-5);
  });
  run("pressure_metric/fair_coin", [&] {
    return close(pressure_metric_norm(full2, c0, pm1).variance_form, 1.0 / std::log(2.0), 1e-6);
  });

  run("equidistribution/one", [&] {
    const Potential obs[] = {Potential::per_symbol({1.0, 2.0}), Potential::per_symbol({1.0, 2.0})};
    return close(equidistribution_average(period_data_from_shift(golden, obs, 10), 0, 1, 10), 1.0, 1e-15);
  });
  run("equidistribution/full2_symbol0", [&] {
    const Potential obs[] = {Potential::constant(2, 1.0), ind0};
    const auto pd = period_data_from_shift(full2, obs, 10);
    bool ok = true;
    for (int n = 1; n <= 10; ++n) ok = ok && equidistribution_average(pd, 0, 1, n) == 0.5;
    return std::make_pair(ok, show(equidistribution_average(pd, 0, 1, 10), 0.5));
  });
  run("equidistribution/golden_symbol0", [&] {
    const Potential obs[] = {Potential::constant(2, 1.0), ind0};
    return close(equidistribution_average(period_data_from_shift(golden, obs, 16), 0, 1, 16), parry0, 1e-2);
  });

  run("livsic/coboundary", [&] {
    const double v[] = {1.0, -0.5, 2.0};
    const Potential obs[] = {Potential::coboundary(v)};
    const double coeff[] = {1.0};
    const auto verdict = livsic_coboundary_check(period_data_from_shift(MarkovShift::full(3), obs, 7), coeff);
    return std::make_pair(verdict.kind == LivsicKind::AllZero, std::string("coboundary sums"));
  });
  const auto baseline = groups::schottky_fuchsian(2, 4.0, 1);
  run("livsic/lengths_positive", [&] {
    const auto spec = groups::perturb(baseline, 1e-2, 7);
    const double coeff[] = {0.0, 1.0};
    const auto verdict = livsic_coboundary_check(period_data_from_spectrum(spectra::build_paired_spectrum(spec, 8)), coeff);
    return std::make_pair(verdict.kind == LivsicKind::AllPositive, std::string("l_h periods"));
  });
  run("livsic/fuchsian_difference", [&] {
    const double coeff[] = {1.0, -1.0};
    const auto verdict =
        livsic_coboundary_check(period_data_from_spectrum(spectra::build_paired_spectrum(baseline, 8)), coeff);
    return std::make_pair(verdict.kind == LivsicKind::AllZero, std::string("l_g - l_h periods"));
  });

  run("abramov/constant_roof", [&] {
    const auto r = abramov_check(full2, Potential::constant(2, 1.7), 12);
    return std::make_pair(r.residual <= 1e-10 && std::abs(r.entropy - std::log(2.0) / 1.7) <= 1e-10,
                          "residual " + show(r.residual, 0.0));
  });
  run("abramov/two_valued_roof", [&] {
    const auto r = abramov_check(full2, Potential::per_symbol({1.0, 2.0}), 12);
    return std::make_pair(r.residual <= 1e-8 && std::abs(r.entropy - two_roof_root()) <= 1e-10,
                          "residual " + show(r.residual, 0.0));
  });
  run("abramov/golden_unit_roof", [&] {
    const auto r = abramov_check(golden, Potential::constant(2, 1.0), 24);
    return std::make_pair(r.residual <= 1e-8 && std::abs(r.entropy - std::log(kPhi)) <= 1e-9,
                          show(r.entropy, std::log(kPhi)));
  });
  return lines;
}

}  // namespace geoflow::thermo
