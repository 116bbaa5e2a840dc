#include "wgi/greens_checks.hpp"

#include <random>

namespace wgi {

std::vector<std::pair<Vec3, Vec3>> sample_point_pairs(const WaveguideGeometry& g, double x3_min, double x3_max,
                                                     int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u1(0.05 * g.L1, 0.95 * g.L1), u2(0.05 * g.L2, 0.95 * g.L2),
      u3(x3_min, x3_max);
  std::vector<std::pair<Vec3, Vec3>> out;
  while (static_cast<int>(out.size()) < count) {
    Vec3 x(u1(rng), u2(rng), u3(rng));
    Vec3 y(u1(rng), u2(rng), u3(rng));
    if ((x - y).norm() > 0.1 && std::abs(x[2] - y[2]) > 1e-3) out.emplace_back(x, y);
  }
  return out;
}

double reciprocity_error(const ModeSet& modes, Variant v, const std::vector<std::pair<Vec3, Vec3>>& pairs) {
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    const CMat3 a = dyadic_green(x, y, modes, v);
    const CMat3 b = dyadic_green(y, x, modes, v);
    worst = std::max(worst, (a - b.transpose()).norm() / a.norm());
  }
  return worst;
}

double endwall_error(const ModeSet& modes, const std::vector<std::pair<Vec3, Vec3>>& pairs) {
  double worst = 0.0;
  for (const auto& [x0, y] : pairs) {
    const Vec3 x(x0[0], x0[1], 0.0);
    const CMat3 G = dyadic_green(x, y, modes, Variant::terminating);
    worst = std::max(worst, G.topRows<2>().norm() / G.norm());
  }
  return worst;
}

double sidewall_error(const ModeSet& modes, Variant v, const std::vector<std::pair<Vec3, Vec3>>& pairs) {
  const auto& g = modes.geometry();
  double worst = 0.0;
  for (const auto& [x0, y] : pairs) {
    // reference scale from the interior point
    const double scale = dyadic_green(x0, y, modes, v).norm();
    const std::array<std::pair<Vec3, int>, 4> walls{{{Vec3(0.0, x0[1], x0[2]), 0},
                                                     {Vec3(g.L1, x0[1], x0[2]), 0},
                                                     {Vec3(x0[0], 0.0, x0[2]), 1},
                                                     {Vec3(x0[0], g.L2, x0[2]), 1}}};
    for (const auto& [x, axis] : walls) {
      const CMat3 G = dyadic_green(x, y, modes, v);
      // tangential rows are the two that are not the wall normal
      double t = 0.0;
      for (int r = 0; r < 3; ++r)
        if (r != axis) t += G.row(r).squaredNorm();
      worst = std::max(worst, std::sqrt(t) / scale);
    }
  }
  return worst;
}

double gauge_error(const ModeSet& modes, Variant v, const std::vector<std::pair<Vec3, Vec3>>& pairs, cplx gauge) {
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    const CMat3 a = dyadic_green(x, y, modes, v);
    const CMat3 b = dyadic_green_gauge(x, y, modes, v, gauge);
    worst = std::max(worst, (a - b).norm() / a.norm());
  }
  return worst;
}

namespace {

using LD = long double;
using LVec3 = Eigen::Matrix<LD, 3, 1>;
using LCMat3 = Eigen::Matrix<std::complex<LD>, 3, 3>;
using LCVec3 = Eigen::Matrix<std::complex<LD>, 3, 1>;

template <typename F>
auto second_derivatives(F&& f, const LVec3& x, LD h) {
  // d2[i][j] approximates d_i d_j f by central differences
  using R = decltype(f(x));
  std::array<std::array<R, 3>, 3> d2;
  const R f0 = f(x);
  for (int i = 0; i < 3; ++i) {
    LVec3 e = LVec3::Zero();
    e[i] = h;
    d2[i][i] = (f(x + e) - LD(2) * f0 + f(x - e)) / (h * h);
    for (int j = i + 1; j < 3; ++j) {
      LVec3 e2 = LVec3::Zero();
      e2[j] = h;
      d2[i][j] = (f(x + e + e2) - f(x + e - e2) - f(x - e + e2) + f(x - e - e2)) / (LD(4) * h * h);
      d2[j][i] = d2[i][j];
    }
  }
  return d2;
}

}  // namespace

double graddiv_error(const ModeSet& modes, Variant v, const Vec3& x, const Vec3& y, double h) {
  const LVec3 xl = x.cast<LD>(), yl = y.cast<LD>();
  const LD k2 = LD(modes.k()) * LD(modes.k());
  const LCMat3 full = dyadic_green_unchecked<LD>(xl, yl, modes, v);
  double err = 0.0, scale = 0.0;
  for (int j = 1; j <= 3; ++j) {
    auto f = [&](const LVec3& p) { return vector_green_unchecked<LD>(j, p, yl, modes, v); };
    const auto d2 = second_derivatives(f, xl, LD(h));
    const LCVec3 g = f(xl);
    LCVec3 gd = LCVec3::Zero();
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < 3; ++m) gd[i] += d2[i][m][m];
    const LCVec3 ref = k2 * (full.col(j - 1) - g);
    err = std::max(err, static_cast<double>((gd - ref).norm()));
    scale = std::max(scale, static_cast<double>(ref.norm()));
  }
  return err / scale;
}

ConvergenceFit helmholtz_convergence(const ModeSet& modes, Variant v, const Vec3& x, const Vec3& y,
                                     const std::vector<double>& hs) {
  const LVec3 xl = x.cast<LD>(), yl = y.cast<LD>();
  const LD k2 = LD(modes.k()) * LD(modes.k());
  auto f = [&](const LVec3& p) { return dyadic_green_unchecked<LD>(p, yl, modes, v); };
  const LCMat3 g0 = f(xl);
  const double scale = static_cast<double>(k2 * g0.norm());
  ConvergenceFit fit;
  for (double h : hs) {
    const auto d2 = second_derivatives(f, xl, LD(h));
    // curl curl F = grad div F - laplacian F, applied column by column
    LCMat3 res = -k2 * g0;
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < 3; ++m) {
        res.row(i) += d2[i][m].row(m);
        res.row(i) -= d2[m][m].row(i);
      }
    fit.h.push_back(h);
    fit.residual.push_back(static_cast<double>(res.norm()) / scale);
  }
  const auto n = static_cast<double>(hs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double lx = std::log(fit.h[i]), ly = std::log(fit.residual[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

std::vector<CheckResult> run_greens_checks(const Scenario& s, std::uint64_t seed) {
  const Variant v = s.variant();
  const ModeSet modes = propagating_set(s);
  const double x3_lo = -0.75 * s.source.L, x3_hi = -0.05 * s.source.L;
  const auto pairs = sample_point_pairs(s.geometry, x3_lo, x3_hi, 8, seed);
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double value, double thr) { out.push_back({std::move(name), value, thr, value <= thr}); };
  add("reciprocity", reciprocity_error(modes, v, pairs), 1e-10);
  if (v == Variant::terminating) add("end_wall", endwall_error(modes, pairs), 1e-10);
  add("side_walls", sidewall_error(modes, v, pairs), 1e-10);
  if (v == Variant::terminating) add("gauge", gauge_error(modes, v, pairs, cplx(0.37, -0.21)), 1e-10);
  add("grad_div_fd", graddiv_error(modes, v, pairs[0].first, pairs[0].second, 1e-4), 1e-5);

  // the mode closest to cutoff has the largest transverse derivatives
  const auto all = enumerate_propagating(s.geometry, s.k, s.modes.cutoff_tolerance);
  const ModeSet last(s.geometry, s.k, {all.back()});
  const auto fit = helmholtz_convergence(last, v, pairs[0].first, pairs[0].second, {1e-2, 1e-3, 1e-4});
  add("helmholtz_residual_h1e-4", fit.residual.back(), 1e-6);
  out.push_back({"helmholtz_slope_error", std::abs(fit.slope - 2.0), 0.1, std::abs(fit.slope - 2.0) <= 0.1});
  return out;
}

}  // namespace wgi
