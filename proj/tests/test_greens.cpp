#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wgi/greens.hpp"
#include "wgi/greens_checks.hpp"

using namespace wgi;

namespace {

ModeSet small_set(int budget = 40) { return propagating_set(test::small_scenario(budget)); }

}  // namespace

TEST(AxialKernel, UnitJumpAndWallConditions) {
  const cplx beta(3.7, 0.0);
  const double y3 = -2.3, d = 1e-10;
  for (double sigma : {-1.0, 0.0, 1.0}) {
    const auto up = axial_kernel<double>(beta, sigma, y3 + d, y3);
    const auto dn = axial_kernel<double>(beta, sigma, y3 - d, y3);
    EXPECT_NEAR(std::abs(up.dg - dn.dg - 1.0), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(up.g - dn.g), 0.0, 1e-8);
  }
  EXPECT_NEAR(std::abs(axial_kernel<double>(beta, -1.0, 0.0, y3).g), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(axial_kernel<double>(beta, 1.0, 0.0, y3).dg), 0.0, 1e-15);
  // outgoing in the infinite guide: g ~ e^{i beta |x3 - y3|}
  const auto far = axial_kernel<double>(beta, 0.0, y3 - 5.0, y3);
  EXPECT_NEAR(std::abs(far.dg + kI * beta * far.g), 0.0, 1e-14);
}

TEST(AxialKernel, DerivativesMatchFiniteDifferences) {
  const ModeSet ms = small_set();
  const double y3 = -3.1, h = 1e-5;
  for (std::size_t i = 0; i < ms.size(); i += 5)
    for (int b = 1; b <= ms[i].multiplicity; b += 2)
      for (double x3 : {-1.2, -6.0})
        for (Variant v : {Variant::terminating, Variant::infinite}) {
          const auto p = axial_profile_derivatives(ms[i], b, x3, y3, v);
          const auto gp = axial_profile_derivatives(ms[i], b, x3 + h, y3, v);
          const auto gm = axial_profile_derivatives(ms[i], b, x3 - h, y3, v);
          EXPECT_LT(std::abs((gp.g - gm.g) / (2 * h) - p.dg), 1e-6 * (1 + std::abs(p.dg)));
          EXPECT_LT(std::abs((gp.dg - gm.dg) / (2 * h) - p.d2g), 1e-5 * (1 + std::abs(p.d2g)));
        }
  EXPECT_THROW(axial_profile_derivatives(ms[0], 1, -1.0, -1.0, Variant::terminating), InputError);
}

TEST(Greens, StructuralChecksPass) {
  const auto s = test::small_scenario(60);
  for (const auto& c : run_greens_checks(s)) EXPECT_TRUE(c.pass) << c.name << " = " << c.value << " > " << c.threshold;
}

TEST(Greens, ReciprocityAndWallsOnBothVariants) {
  const ModeSet ms = small_set(80);
  const auto pairs = sample_point_pairs(ms.geometry(), -12.0, -0.5, 12, 3);
  for (Variant v : {Variant::terminating, Variant::infinite}) {
    EXPECT_LT(reciprocity_error(ms, v, pairs), 1e-10);
    EXPECT_LT(sidewall_error(ms, v, pairs), 1e-10);
    EXPECT_LT(gauge_error(ms, v, pairs, cplx(-1.3, 0.4)), 1e-10);
  }
  EXPECT_LT(endwall_error(ms, pairs), 1e-10);
}

TEST(Greens, GradDivMatchesFiniteDifferences) {
  const ModeSet ms = small_set(30);
  EXPECT_LT(graddiv_error(ms, Variant::terminating, Vec3(5.1, 6.3, -4.0), Vec3(8.2, 3.3, -6.5), 1e-4), 1e-5);
}

TEST(Greens, HelmholtzResidualIsSecondOrder) {
  const ModeSet ms = small_set(20);
  const auto fit = helmholtz_convergence(ms, Variant::terminating, Vec3(5.1, 6.3, -4.0), Vec3(8.2, 3.3, -6.5),
                                         {1e-2, 5e-3, 2.5e-3, 1.25e-3});
  EXPECT_NEAR(fit.slope, 2.0, 0.1);
}

TEST(Greens, DyadicIncludesGradDivTerm) {
  const ModeSet ms = small_set(30);
  const Vec3 x(5.1, 6.3, -4.0), y(8.2, 3.3, -6.5);
  const CMat3 D = dyadic_green(x, y, ms, Variant::terminating);
  CMat3 V;
  for (int j = 1; j <= 3; ++j) V.col(j - 1) = vector_green(j, x, y, ms, Variant::terminating);
  EXPECT_GT((D - V).norm(), 1e-3 * D.norm());
  EXPECT_TRUE(D.allFinite());
}

TEST(Greens, VariantsDifferOnlyThroughTheImage) {
  const ModeSet ms = small_set(30);
  const Vec3 x(5.1, 6.3, -4.0), y(8.2, 3.3, -6.5);
  const CMat3 t = dyadic_green(x, y, ms, Variant::terminating);
  const CMat3 i = dyadic_green(x, y, ms, Variant::infinite);
  EXPECT_GT((t - i).norm(), 1e-2 * i.norm());
}

TEST(Greens, MinSeparationGuard) {
  const ModeSet ms = small_set(10);
  GreenOptions o;
  o.min_separation = 0.1;
  EXPECT_THROW(dyadic_green(Vec3(5, 5, -3), Vec3(5.05, 5, -3), ms, Variant::terminating, o), InputError);
  EXPECT_NO_THROW(dyadic_green(Vec3(5, 5, -3), Vec3(5.2, 5, -3), ms, Variant::terminating, o));
}

TEST(ArrayFactorization, ReceiverTimesCouplingEqualsGreenTensor) {
  auto s = test::small_scenario(40);
  s.array.components = {1, 2, 3};
  const ModeSet ms = propagating_set(s);
  const auto rx = build_receiver_grid(s.array, s.geometry);
  const Eigen::MatrixXd R = receiver_matrix(ms, rx, s.array.components);
  ASSERT_EQ(static_cast<std::size_t>(R.rows()), rx.size() * 3);
  ASSERT_EQ(static_cast<std::size_t>(R.cols()), ms.branch_count());
  for (Variant v : {Variant::terminating, Variant::infinite})
    for (const Vec3& y : {Vec3(6.95, 4.73, -10.44), Vec3(3.0, 11.0, -2.0)}) {
      MatrixXc K;
      array_coupling(ms, v, s.source.L, y, K);
      const MatrixXc RK = R.cast<cplx>() * K;
      double worst = 0.0;
      for (std::size_t r = 0; r < rx.size(); r += 9) {
        const Vec3 x(rx[r].x(), rx[r].y(), -s.source.L);
        const CMat3 G = dyadic_green(x, y, ms, v);
        for (int q = 0; q < 3; ++q)
          worst = std::max(worst, (RK.row(r * 3 + q).transpose() - G.row(q).transpose()).norm() / G.norm());
      }
      EXPECT_LT(worst, 1e-12);
    }
}
