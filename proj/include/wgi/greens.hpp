#pragma once

#include <vector>

#include "wgi/modes.hpp"
#include "wgi/scenario.hpp"
#include "wgi/types.hpp"

namespace wgi {

template <typename T>
struct AxialProfileT {
  std::complex<T> g, dg, d2g;  // g and its first two x3 derivatives
};
using AxialProfile = AxialProfileT<double>;

/// sigma = -1 for branches s = 1, 2 and +1 for s = 3; zero in the infinite guide.
inline double image_sign(int s, Variant v) {
  if (v == Variant::infinite) return 0.0;
  return s == 3 ? 1.0 : -1.0;
}

/// g = [e^{i beta |x3 - y3|} + sigma e^{-i beta (x3 + y3)}] / (2 i beta).
/// At x3 == y3 the derivative takes the mean of the one-sided limits.
template <typename T>
AxialProfileT<T> axial_kernel(std::complex<T> beta, T sigma, T x3, T y3) {
  using C = std::complex<T>;
  const C ib = C(0, 1) * beta;
  const T d = x3 - y3;
  const T sg = d > 0 ? T(1) : (d < 0 ? T(-1) : T(0));
  const C direct = std::exp(ib * std::abs(d));
  const C image = sigma * std::exp(-ib * (x3 + y3));
  const C den = T(2) * ib;
  AxialProfileT<T> p;
  p.g = (direct + image) / den;
  p.dg = (ib * sg * direct - ib * image) / den;
  p.d2g = -beta * beta * p.g;
  return p;
}

/// g_n^(s)(x3, y3) and its x3 derivatives. Throws InputError at x3 == y3,
/// where the first derivative jumps.
AxialProfile axial_profile_derivatives(const ModeEntry& m, int s, double x3, double y3, Variant v);

namespace detail {

template <typename T>
using Vec3T = Eigen::Matrix<T, 3, 1>;
template <typename T>
using CMat3T = Eigen::Matrix<std::complex<T>, 3, 3>;

/// One mode of G + k^-2 grad div G, assembled from the axial profiles of the
/// s = 1, 2 (sigma = -1) and s = 3 (sigma = +1) branches.
template <typename T>
void add_mode_dyadic(CMat3T<T>& G, const ModeEntry& m, T k2, const std::array<Vec3T<T>, 3>& px,
                     const std::array<Vec3T<T>, 3>& py, const AxialProfileT<T>& gm, const AxialProfileT<T>& gp) {
  using C = std::complex<T>;
  const C beta(static_cast<T>(m.beta.real()), static_cast<T>(m.beta.imag()));
  const T lam = static_cast<T>(m.lambda);
  G += (gm.g / static_cast<T>(m.norm2[0])) * px[0].template cast<C>() * py[0].transpose().template cast<C>();
  if (m.multiplicity == 1) return;
  const auto col2 = (((beta * beta / k2) * gm.g) * px[1].template cast<C>() -
                     ((lam / k2) * gm.dg) * px[2].template cast<C>()).eval();
  const auto col3 = (((lam / k2) * gp.g) * px[2].template cast<C>() + (gp.dg / k2) * px[1].template cast<C>()).eval();
  G += col2 * (py[1].transpose().template cast<C>() / static_cast<T>(m.norm2[1]));
  G += col3 * (py[2].transpose().template cast<C>() / static_cast<T>(m.norm2[2]));
}

}  // namespace detail

/// Dyadic Green tensor summed over a mode set, in scalar type T.
/// No checks: callers make sure x != y and both points are admissible.
template <typename T>
detail::CMat3T<T> dyadic_green_unchecked(const detail::Vec3T<T>& x, const detail::Vec3T<T>& y, const ModeSet& modes,
                                         Variant v) {
  using C = std::complex<T>;
  const T k2 = static_cast<T>(modes.k()) * static_cast<T>(modes.k());
  detail::CMat3T<T> G = detail::CMat3T<T>::Zero();
  const Eigen::Matrix<T, 2, 1> xt = x.template head<2>(), yt = y.template head<2>();
  for (const auto& m : modes.entries()) {
    const C beta(static_cast<T>(m.beta.real()), static_cast<T>(m.beta.imag()));
    const auto px = mode_shapes<T>(m, xt);
    const auto py = mode_shapes<T>(m, yt);
    const auto gm = axial_kernel<T>(beta, static_cast<T>(image_sign(1, v)), x[2], y[2]);
    const auto gp = axial_kernel<T>(beta, static_cast<T>(image_sign(3, v)), x[2], y[2]);
    detail::add_mode_dyadic<T>(G, m, k2, px, py, gm, gp);
  }
  return G;
}

/// Column j (1..3) of the vector Green tensor G, without the grad div term.
template <typename T>
Eigen::Matrix<std::complex<T>, 3, 1> vector_green_unchecked(int j, const detail::Vec3T<T>& x,
                                                           const detail::Vec3T<T>& y, const ModeSet& modes,
                                                           Variant v) {
  using C = std::complex<T>;
  Eigen::Matrix<C, 3, 1> out = Eigen::Matrix<C, 3, 1>::Zero();
  const Eigen::Matrix<T, 2, 1> xt = x.template head<2>(), yt = y.template head<2>();
  for (const auto& m : modes.entries()) {
    const C beta(static_cast<T>(m.beta.real()), static_cast<T>(m.beta.imag()));
    const auto px = mode_shapes<T>(m, xt);
    const auto py = mode_shapes<T>(m, yt);
    for (int s = 1; s <= m.multiplicity; ++s) {
      const auto g = axial_kernel<T>(beta, static_cast<T>(image_sign(s, v)), x[2], y[2]);
      out += (g.g * py[s - 1][j - 1] / static_cast<T>(m.norm2[s - 1])) * px[s - 1].template cast<C>();
    }
  }
  return out;
}

struct GreenOptions {
  /// Pairs closer than this are rejected as near-singular.
  double min_separation = 0.0;
};

/// G_j(x, y): column j of the vector Green tensor.
CVec3 vector_green(int j, const Vec3& x, const Vec3& y, const ModeSet& modes, Variant v);

/// The dyadic tensor G(x, y) = G + k^-2 grad div G for the given modes.
/// Throws InputError for coincident points, points outside the guide, or
/// separations below opts.min_separation.
CMat3 dyadic_green(const Vec3& x, const Vec3& y, const ModeSet& modes, Variant v, const GreenOptions& opts = {});

/// Same tensor assembled column by column from G_j with the homogeneous
/// degree of freedom of the s = 2, 3 branches shifted by `gauge`. The shift
/// lies in the null space of k^2 + grad div, so the result must agree with
/// dyadic_green for any gauge value.
CMat3 dyadic_green_gauge(const Vec3& x, const Vec3& y, const ModeSet& modes, Variant v, cplx gauge);

/// Axial profiles evaluated between the array plane x3 = -L and a point y3 > -L.
struct ArrayAxial {
  cplx gm;  // sigma = -1
  cplx gp;  // sigma = +1
};
ArrayAxial array_axial(const ModeEntry& m, double L, double y3, Variant v);

/// Receiver-side factor R of G at the array plane: rows (receiver, component),
/// columns are mode branches; entries Phi^(s)_q(x_r).
Eigen::MatrixXd receiver_matrix(const ModeSet& modes, const std::vector<Vec2>& receivers,
                                const std::vector<int>& components);

/// Voxel-side factor K (branches x 3) with
/// e_q . G((x_r, -L), y) . e_l = sum_b R[(r,q), b] K[b, l](y).
void array_coupling(const ModeSet& modes, Variant v, double L, const Vec3& y, MatrixXc& K);

}  // namespace wgi
