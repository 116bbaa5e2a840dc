#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wgi/greens.hpp"

namespace wgi {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Random point pairs inside the guide, both with x3 in [x3_min, x3_max].
std::vector<std::pair<Vec3, Vec3>> sample_point_pairs(const WaveguideGeometry& g, double x3_min, double x3_max,
                                                     int count, std::uint64_t seed);

/// max ||G(x,y) - G(y,x)^T||_F / ||G(x,y)||_F over the sampled pairs.
double reciprocity_error(const ModeSet& modes, Variant v, const std::vector<std::pair<Vec3, Vec3>>& pairs);

/// max ||e3 x G(x,y)||_F / ||G(x,y)||_F with x moved onto the end wall.
double endwall_error(const ModeSet& modes, const std::vector<std::pair<Vec3, Vec3>>& pairs);

/// Same for the four side walls, n x G with x moved onto each wall.
double sidewall_error(const ModeSet& modes, Variant v, const std::vector<std::pair<Vec3, Vec3>>& pairs);

/// max relative difference between dyadic_green and dyadic_green_gauge.
double gauge_error(const ModeSet& modes, Variant v, const std::vector<std::pair<Vec3, Vec3>>& pairs, cplx gauge);

/// Relative error between k^2 (G - G_vec) and a central-difference grad div G_vec.
double graddiv_error(const ModeSet& modes, Variant v, const Vec3& x, const Vec3& y, double h);

struct ConvergenceFit {
  std::vector<double> h;
  std::vector<double> residual;  // relative curl curl G - k^2 G residual
  double slope = 0.0;            // least-squares slope of log residual vs log h
};

/// Second-order central differences of curl curl G - k^2 G at x != y, in
/// extended precision so truncation dominates rounding down to h = 1e-4.
ConvergenceFit helmholtz_convergence(const ModeSet& modes, Variant v, const Vec3& x, const Vec3& y,
                                     const std::vector<double>& hs);

/// The full battery reported by the command-line tool.
std::vector<CheckResult> run_greens_checks(const Scenario& s, std::uint64_t seed = 7);

}  // namespace wgi
