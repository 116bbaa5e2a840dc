#pragma once

// Sums of the form F(y) = sum_n c1(n, y3) Phi1(y) + c2 Phi2(y) + c3 Phi3(y) over
// a voxel grid, using per-axis trig tables so the transverse factors are only
// evaluated once per (pair, node).

#include <functional>
#include <vector>

#include "wgi/modes.hpp"
#include "wgi/scenario.hpp"

namespace wgi::detail {

struct AxisTrig {
  // rows: voxel index along the axis; columns: retained pairs
  Eigen::MatrixXd s, c;
};

inline AxisTrig axis_trig(const VoxelGrid& grid, int axis, const ModeSet& modes) {
  AxisTrig t;
  const int n = grid.count(axis);
  t.s.resize(n, static_cast<Eigen::Index>(modes.size()));
  t.c.resize(n, static_cast<Eigen::Index>(modes.size()));
  for (std::size_t p = 0; p < modes.size(); ++p) {
    const double w = axis == 0 ? modes[p].a : modes[p].b;
    for (int i = 0; i < n; ++i) {
      const double u = w * grid.coord(axis, i);
      t.s(i, static_cast<Eigen::Index>(p)) = std::sin(u);
      t.c(i, static_cast<Eigen::Index>(p)) = std::cos(u);
    }
  }
  return t;
}

/// coef is laid out [pair][i3][3]; out gets one CVec3 per voxel.
inline std::vector<CVec3> modal_field_on_grid(const VoxelGrid& grid, const ModeSet& modes,
                                              const std::vector<cplx>& coef) {
  const int n1 = grid.n1(), n2 = grid.n2(), n3 = grid.n3();
  const auto t1 = axis_trig(grid, 0, modes);
  const auto t2 = axis_trig(grid, 1, modes);
  std::vector<CVec3> out(grid.size(), CVec3::Zero());
  const std::size_t np = modes.size();
  const long total = static_cast<long>(n1) * n2;
#pragma omp parallel for schedule(static)
  for (long col = 0; col < total; ++col) {
    const int i1 = static_cast<int>(col / n2);
    const int i2 = static_cast<int>(col % n2);
    CVec3* dst = out.data() + grid.index(i1, i2, 0);
    Vec3 p1, p2, p3;
    for (std::size_t p = 0; p < np; ++p) {
      const auto pi = static_cast<Eigen::Index>(p);
      mode_shapes<double>(modes[p], t1.s(i1, pi), t1.c(i1, pi), t2.s(i2, pi), t2.c(i2, pi), p1, p2, p3);
      const cplx* c = coef.data() + p * n3 * 3;
      if (modes[p].multiplicity == 1) {
        for (int i3 = 0; i3 < n3; ++i3) dst[i3] += c[3 * i3] * p1.cast<cplx>();
      } else {
        for (int i3 = 0; i3 < n3; ++i3) {
          const cplx a = c[3 * i3], b = c[3 * i3 + 1], d = c[3 * i3 + 2];
          dst[i3][0] += a * p1[0] + b * p2[0];
          dst[i3][1] += a * p1[1] + b * p2[1];
          dst[i3][2] += d * p3[2];
        }
      }
    }
  }
  return out;
}

}  // namespace wgi::detail
