#include "wgi/greens.hpp"

namespace wgi {

AxialProfile axial_profile_derivatives(const ModeEntry& m, int s, double x3, double y3, Variant v) {
  if (s < 1 || s > m.multiplicity) throw InputError("axial profile: branch s outside 1..m_n");
  if (x3 == y3) throw InputError("axial profile: x3 == y3, the derivative is discontinuous there");
  return axial_kernel<double>(m.beta, image_sign(s, v), x3, y3);
}

namespace {

void check_point(const Vec3& x, const ModeSet& modes, Variant v, const char* what) {
  const auto& g = modes.geometry();
  if (!(x[0] >= 0.0 && x[0] <= g.L1 && x[1] >= 0.0 && x[1] <= g.L2))
    throw InputError(std::string("green tensor: ") + what + " outside the cross-section");
  if (v == Variant::terminating && x[2] > 0.0)
    throw InputError(std::string("green tensor: ") + what + " beyond the end wall");
}

void check_pair(const Vec3& x, const Vec3& y, const ModeSet& modes, Variant v, double min_sep) {
  if (modes.size() == 0) throw InputError("green tensor: empty mode set");
  check_point(x, modes, v, "x");
  check_point(y, modes, v, "y");
  const double d = (x - y).norm();
  if (d == 0.0) throw InputError("green tensor: x == y");
  if (d < min_sep) throw InputError("green tensor: points closer than the near-singular guard");
}

}  // namespace

CVec3 vector_green(int j, const Vec3& x, const Vec3& y, const ModeSet& modes, Variant v) {
  if (j < 1 || j > 3) throw InputError("vector_green: column j outside 1..3");
  check_pair(x, y, modes, v, 0.0);
  return vector_green_unchecked<double>(j, x, y, modes, v);
}

CMat3 dyadic_green(const Vec3& x, const Vec3& y, const ModeSet& modes, Variant v, const GreenOptions& opts) {
  check_pair(x, y, modes, v, opts.min_separation);
  return dyadic_green_unchecked<double>(x, y, modes, v);
}

CMat3 dyadic_green_gauge(const Vec3& x, const Vec3& y, const ModeSet& modes, Variant v, cplx gauge) {
  check_pair(x, y, modes, v, 0.0);
  const double k2 = modes.k() * modes.k();
  CMat3 out = CMat3::Zero();
  for (const auto& m : modes.entries()) {
    const auto px = mode_shapes<double>(m, Vec2(x.head<2>()));
    const auto py = mode_shapes<double>(m, Vec2(y.head<2>()));
    const auto g1 = axial_kernel<double>(m.beta, image_sign(1, v), x[2], y[2]);
    if (m.multiplicity == 1) {
      out += (g1.g / m.norm2[0]) * px[0].cast<cplx>() * py[0].transpose().cast<cplx>();
      continue;
    }
    const auto g2 = axial_kernel<double>(m.beta, image_sign(2, v), x[2], y[2]);
    const auto g3 = axial_kernel<double>(m.beta, image_sign(3, v), x[2], y[2]);
    // Homogeneous solution h (i/beta Phi2 + Phi3), h = e^{-i beta x3}; it is
    // annihilated by k^2 + grad div, so any multiple may be added.
    const cplx ib = kI * m.beta;
    const cplx h = std::exp(-ib * x[2]);
    const cplx dh = -ib * h;
    const cplx d2h = -m.beta * m.beta * h;
    for (int j = 0; j < 3; ++j) {
      const double w1 = py[0][j] / m.norm2[0];
      const double w2 = py[1][j] / m.norm2[1];
      const double w3 = py[2][j] / m.norm2[2];
      const cplx t = gauge * w3;
      // G_j = A Phi1 + B Phi2 + C Phi3
      const cplx A = w1 * g1.g;
      const cplx B = w2 * g2.g + t * (kI / m.beta) * h;
      const cplx dB = w2 * g2.dg + t * (kI / m.beta) * dh;
      const cplx C = w3 * g3.g + t * h;
      const cplx dC = w3 * g3.dg + t * dh;
      const cplx d2C = w3 * g3.d2g + t * d2h;
      // grad div (B Phi2 + C Phi3) = (C' - lambda B) Phi2 + (C'' - lambda B') Phi3
      const cplx c2 = B + (dC - m.lambda * B) / k2;
      const cplx c3 = C + (d2C - m.lambda * dB) / k2;
      out.col(j) += A * px[0].cast<cplx>() + c2 * px[1].cast<cplx>() + c3 * px[2].cast<cplx>();
    }
  }
  return out;
}

ArrayAxial array_axial(const ModeEntry& m, double L, double y3, Variant v) {
  const cplx ib = kI * m.beta;
  const cplx direct = std::exp(ib * (y3 + L));
  const cplx image = v == Variant::terminating ? std::exp(ib * (L - y3)) : cplx(0.0);
  const cplx den = 2.0 * ib;
  return {(direct - image) / den, (direct + image) / den};
}

Eigen::MatrixXd receiver_matrix(const ModeSet& modes, const std::vector<Vec2>& receivers,
                                const std::vector<int>& components) {
  const auto nq = static_cast<Eigen::Index>(components.size());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(receivers.size()) * nq,
                                            static_cast<Eigen::Index>(modes.branch_count()));
  for (std::size_t r = 0; r < receivers.size(); ++r)
    for (std::size_t p = 0; p < modes.size(); ++p) {
      const auto phi = mode_shapes<double>(modes[p], receivers[r]);
      const auto off = static_cast<Eigen::Index>(modes.branch_offset(p));
      for (int s = 0; s < modes[p].multiplicity; ++s)
        for (Eigen::Index qi = 0; qi < nq; ++qi)
          R(static_cast<Eigen::Index>(r) * nq + qi, off + s) = phi[s][components[qi] - 1];
    }
  return R;
}

void array_coupling(const ModeSet& modes, Variant v, double L, const Vec3& y, MatrixXc& K) {
  const double k2 = modes.k() * modes.k();
  K.setZero(static_cast<Eigen::Index>(modes.branch_count()), 3);
  const Vec2 yt = y.head<2>();
  for (std::size_t p = 0; p < modes.size(); ++p) {
    const auto& m = modes[p];
    const auto off = static_cast<Eigen::Index>(modes.branch_offset(p));
    const auto phi = mode_shapes<double>(m, yt);
    const auto ax = array_axial(m, L, y[2], v);
    K.row(off) = (ax.gm / m.norm2[0]) * phi[0].transpose().cast<cplx>();
    if (m.multiplicity == 1) continue;
    const cplx ib = kI * m.beta;
    const cplx u = ax.gm / m.norm2[1];
    const cplx w = ax.gp / m.norm2[2];
    K.row(off + 1) = ((m.beta * m.beta / k2) * u) * phi[1].transpose().cast<cplx>() -
                     ((ib / k2) * w) * phi[2].transpose().cast<cplx>();
    K.row(off + 2) = ((ib * m.lambda / k2) * u) * phi[1].transpose().cast<cplx>() +
                     ((m.lambda / k2) * w) * phi[2].transpose().cast<cplx>();
  }
}

}  // namespace wgi
