#include "wgi/imaging.hpp"

#include "modal_grid.hpp"

namespace wgi {

Eigen::VectorXd ImageVolume::magnitude() const { return values.rowwise().norm(); }

void check_data_layout(const ArrayModel& model, const DataVector& d) {
  const auto& rx = model.receivers();
  if (d.components != model.components()) throw InputError("data components do not match the scenario array");
  if (d.receivers.size() != rx.size())
    throw InputError("data has " + std::to_string(d.receivers.size()) + " receivers, the scenario array has " +
                     std::to_string(rx.size()));
  for (std::size_t i = 0; i < rx.size(); ++i)
    if ((d.receivers[i] - rx[i]).norm() > 1e-9) throw InputError("data receiver positions do not match the array");
  if (static_cast<std::size_t>(d.values.size()) != rx.size() * d.components.size())
    throw InputError("data vector length does not match receivers x components");
}

ImageVolume rtm_image(const ArrayModel& model, const DataVector& d, const VoxelGrid& grid, Parameterization p) {
  check_data_layout(model, d);
  const Scenario& s = model.scenario();
  const double L = s.source.L;
  if (grid.size() == 0) throw InputError("rtm: empty imaging grid");
  if (grid.coord(2, 0) <= -L) throw InputError("rtm: imaging grid reaches the array plane");
  const ModeSet& modes = model.modes();
  const double k2 = s.k * s.k;
  const VectorXc D = model.receiver_matrix().transpose().cast<cplx>() * d.values.conjugate();

  const int n3 = grid.n3();
  std::vector<cplx> coef(modes.size() * n3 * 3, cplx(0.0));
  for (std::size_t pi = 0; pi < modes.size(); ++pi) {
    const auto& m = modes[pi];
    const auto off = static_cast<Eigen::Index>(modes.branch_offset(pi));
    const cplx ib = kI * m.beta;
    for (int i3 = 0; i3 < n3; ++i3) {
      const auto ax = array_axial(m, L, grid.coord(2, i3), model.variant());
      cplx* c = coef.data() + (pi * n3 + i3) * 3;
      c[0] = D[off] * ax.gm / m.norm2[0];
      if (m.multiplicity == 1) continue;
      const cplx d2 = D[off + 1], d3 = D[off + 2];
      c[1] = (ax.gm / m.norm2[1]) * (d2 * m.beta * m.beta / k2 + d3 * ib * m.lambda / k2);
      c[2] = (ax.gp / m.norm2[2]) * (-d2 * ib / k2 + d3 * m.lambda / k2);
    }
  }
  const auto B = detail::modal_field_on_grid(grid, modes, coef);
  const auto E = eval_reference_field(grid, model.illumination_modes(), model.amplitudes());

  ImageVolume img;
  img.grid = grid;
  img.param = p;
  const int ch = channel_count(p);
  img.values.resize(static_cast<Eigen::Index>(grid.size()), ch);
  for (std::size_t v = 0; v < grid.size(); ++v) {
    const auto r = static_cast<Eigen::Index>(v);
    switch (p) {
      case Parameterization::isotropic: img.values(r, 0) = B[v].cwiseProduct(E[v]).sum(); break;
      case Parameterization::diagonal:
        for (int l = 0; l < 3; ++l) img.values(r, l) = B[v][l] * E[v][l];
        break;
      case Parameterization::full:
        for (int l = 0; l < 3; ++l)
          for (int mm = 0; mm < 3; ++mm) img.values(r, 3 * l + mm) = B[v][l] * E[v][mm];
        break;
    }
  }
  return img;
}

L1Image l1_reconstruct(const SensingMatrix& F, const DataVector& d, const L1Options& opts) {
  if (F.F.rows() != d.values.size()) throw InputError("l1: data length does not match the sensing matrix rows");
  if (F.components != d.components || F.receivers.size() != d.receivers.size())
    throw InputError("l1: data layout does not match the sensing matrix");
  const auto A = stack_real(F.F);
  const auto b = stack_real(d.values);
  auto res = l1_minimize(A, b, opts);
  L1Image out;
  out.report = std::move(res.report);
  out.image.grid = F.grid;
  out.image.param = F.param;
  const int ch = channel_count(F.param);
  out.image.values.resize(static_cast<Eigen::Index>(F.grid.size()), ch);
  for (std::size_t v = 0; v < F.grid.size(); ++v)
    for (int l = 0; l < ch; ++l)
      out.image.values(static_cast<Eigen::Index>(v), l) = res.x[static_cast<Eigen::Index>(v * ch + l)];
  return out;
}

Slice extract_slice(const ImageVolume& img, int axis, double coord, int channel) {
  if (axis < 0 || axis > 2) throw InputError("slice: axis must be 0, 1 or 2");
  if (channel >= img.values.cols()) throw InputError("slice: channel out of range");
  const auto& g = img.grid;
  const int idx = g.nearest(axis, coord);
  if (idx < 0) throw InputError("slice: plane lies outside the image grid");
  const int a = axis == 0 ? 1 : 0;
  const int b = axis == 2 ? 1 : 2;
  Slice s;
  s.axis = axis;
  s.index = idx;
  s.coord = g.coord(axis, idx);
  for (int i = 0; i < g.count(a); ++i) s.u.push_back(g.coord(a, i));
  for (int i = 0; i < g.count(b); ++i) s.v.push_back(g.coord(b, i));
  s.values.resize(g.count(a), g.count(b));
  const Eigen::VectorXd mag = img.magnitude();
  for (int i = 0; i < g.count(a); ++i)
    for (int j = 0; j < g.count(b); ++j) {
      std::array<int, 3> n{};
      n[axis] = idx;
      n[a] = i;
      n[b] = j;
      const auto v = g.index(n[0], n[1], n[2]);
      s.values(i, j) = channel < 0 ? mag[static_cast<Eigen::Index>(v)]
                                   : std::abs(img.values(static_cast<Eigen::Index>(v), channel));
    }
  return s;
}

std::vector<std::size_t> support_estimate(const ImageVolume& img, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("support: fraction must lie in (0, 1]");
  const Eigen::VectorXd mag = img.magnitude();
  const double peak = mag.size() ? mag.maxCoeff() : 0.0;
  if (!(peak > 0.0)) throw InputError("support: image is identically zero");
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < mag.size(); ++i)
    if (mag[i] >= fraction * peak) out.push_back(static_cast<std::size_t>(i));
  return out;
}

std::size_t peak_voxel(const ImageVolume& img) {
  const Eigen::VectorXd mag = img.magnitude();
  Eigen::Index i = 0;
  mag.maxCoeff(&i);
  return static_cast<std::size_t>(i);
}

double secondary_peak_ratio(const ImageVolume& img) {
  const auto& g = img.grid;
  const Eigen::VectorXd mag = img.magnitude();
  const std::size_t top = peak_voxel(img);
  const double peak = mag[static_cast<Eigen::Index>(top)];
  if (!(peak > 0.0)) return 0.0;
  double second = 0.0;
  for (int i1 = 0; i1 < g.n1(); ++i1)
    for (int i2 = 0; i2 < g.n2(); ++i2)
      for (int i3 = 0; i3 < g.n3(); ++i3) {
        const auto idx = g.index(i1, i2, i3);
        if (idx == top) continue;
        const double m = mag[static_cast<Eigen::Index>(idx)];
        if (m <= second) continue;
        bool is_max = true;
        for (int d1 = -1; d1 <= 1 && is_max; ++d1)
          for (int d2 = -1; d2 <= 1 && is_max; ++d2)
            for (int d3 = -1; d3 <= 1 && is_max; ++d3) {
              const int j1 = i1 + d1, j2 = i2 + d2, j3 = i3 + d3;
              if ((d1 == 0 && d2 == 0 && d3 == 0) || j1 < 0 || j2 < 0 || j3 < 0 || j1 >= g.n1() ||
                  j2 >= g.n2() || j3 >= g.n3())
                continue;
              if (mag[static_cast<Eigen::Index>(g.index(j1, j2, j3))] > m) is_max = false;
            }
        if (is_max) second = m;
      }
  return second / peak;
}

}  // namespace wgi
