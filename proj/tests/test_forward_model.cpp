#include <cmath>

#include <gtest/gtest.h>
#include <omp.h>

#include "test_support.hpp"
#include "wgi/forward_model.hpp"

using namespace wgi;

namespace {

struct Fixture {
  Scenario s = test::small_scenario(40);
  ArrayModel model{s, Variant::terminating, propagating_set(s)};
};

PotentialGrid one_voxel(const VoxelGrid& g, std::size_t idx, double v = 1.0) {
  PotentialGrid p;
  p.grid = g;
  p.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  p.values[static_cast<Eigen::Index>(idx)] = v;
  return p;
}

double rel(const VectorXc& a, const VectorXc& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(Rasterize, PointShellAndAnisotropic) {
  const VoxelGrid g(Box{Vec3(0, 0, -2), Vec3(1, 1, -1)}, 0.25, 0.25);
  const auto p = rasterize(PointReflector{Vec3(0.49, 0.51, -1.5), 2.0}, g);
  ASSERT_EQ(p.support().size(), 1u);
  EXPECT_EQ(g.center(p.support()[0]), Vec3(0.5, 0.5, -1.5));
  EXPECT_EQ(p.values.sum(), 2.0);

  ShellReflector sh{Box{Vec3(0.25, 0.25, -1.75), Vec3(0.75, 0.75, -1.25)},
                    Box{Vec3(0.3, 0.3, -1.7), Vec3(0.7, 0.7, -1.3)}, 1.0};
  EXPECT_EQ(rasterize(sh, g).support().size(), 27u - 1u);

  const auto a = rasterize(AnisotropicPointReflector{Vec3(0.5, 0.5, -1.5), Vec3(1, 2, 3)}, g);
  EXPECT_EQ(a.param, Parameterization::diagonal);
  EXPECT_EQ(a.diagonal(a.support()[0]), Vec3(1, 2, 3));

  EXPECT_THROW(rasterize(PointReflector{Vec3(5, 5, -1.5), 1.0}, g), InputError);
  EXPECT_TRUE(rasterize(PointReflector{Vec3(0.5, 0.5, -1.5), 0.0}, g).support().empty());
}

TEST(ForwardModel, ColumnMatchesDirectGreenSum) {
  Fixture f;
  const VoxelGrid g = f.s.imaging.grid();
  const auto F = assemble_sensing_matrix(f.model, g, Parameterization::isotropic);
  const double k2v = f.s.k * f.s.k * g.voxel_volume();
  const auto& rx = f.model.receivers();
  for (std::size_t v : {std::size_t(0), g.size() / 2, g.size() - 1}) {
    const Vec3 y = g.center(v);
    const CVec3 e = eval_reference_field(y, f.model.modes(), f.model.amplitudes());
    VectorXc col(F.F.rows());
    for (std::size_t r = 0; r < rx.size(); ++r) {
      const CVec3 u = dyadic_green(Vec3(rx[r].x(), rx[r].y(), -f.s.source.L), y, f.model.modes(), Variant::terminating) * e;
      col[static_cast<Eigen::Index>(r)] = k2v * u[1];  // component 2 only
    }
    EXPECT_LT(rel(F.F.col(static_cast<Eigen::Index>(v)), col), 1e-12);
  }
}

TEST(ForwardModel, MatrixTimesIndicatorEqualsSynthesis) {
  Fixture f;
  const VoxelGrid g = f.s.imaging.grid();
  const auto F = assemble_sensing_matrix(f.model, g, Parameterization::isotropic);
  const auto p = one_voxel(g, 17, 0.7);
  const VectorXc Fv = F.F * p.values.cast<cplx>();
  EXPECT_LT(rel(synthesize_data(f.model, p).values, Fv), 1e-13);
}

TEST(ForwardModel, DiagonalChannelsSumToIsotropic) {
  Fixture f;
  const VoxelGrid g = f.s.l1->grid();
  const auto Fi = assemble_sensing_matrix(f.model, g, Parameterization::isotropic);
  const auto Fd = assemble_sensing_matrix(f.model, g, Parameterization::diagonal);
  ASSERT_EQ(Fd.F.cols(), 3 * Fi.F.cols());
  for (Eigen::Index v = 0; v < Fi.F.cols(); ++v) {
    const VectorXc sum = Fd.F.col(3 * v) + Fd.F.col(3 * v + 1) + Fd.F.col(3 * v + 2);
    EXPECT_LT(rel(sum, Fi.F.col(v)), 1e-12);
  }
}

TEST(ForwardModel, SynthesisIsLinearInThePotential) {
  Fixture f;
  const VoxelGrid g = f.s.imaging.grid();
  auto a = one_voxel(g, 3, 1.0), b = one_voxel(g, 40, -0.4);
  PotentialGrid ab = a;
  ab.values += 2.5 * b.values;
  const VectorXc lhs = synthesize_data(f.model, ab).values;
  const VectorXc rhs = synthesize_data(f.model, a).values + 2.5 * synthesize_data(f.model, b).values;
  EXPECT_LT(rel(lhs, rhs), 1e-13);
}

TEST(ForwardModel, ZeroPotentialGivesZeroData) {
  Fixture f;
  const auto d = synthesize_data(f.model, PointReflector{Vec3(6.95, 4.73, -10.44), 0.0});
  EXPECT_EQ(static_cast<std::size_t>(d.values.size()), f.model.receivers().size());
  EXPECT_EQ(d.values.norm(), 0.0);
}

TEST(ForwardModel, MemoryGuardAndFullParameterization) {
  Fixture f;
  const VoxelGrid g = f.s.imaging.grid();
  AssemblyOptions tiny;
  tiny.memory_budget_bytes = 1024;
  EXPECT_THROW(assemble_sensing_matrix(f.model, g, Parameterization::isotropic, tiny), InputError);
  EXPECT_THROW(assemble_sensing_matrix(f.model, g, Parameterization::full), InputError);
  const std::size_t rows = f.model.receivers().size(), br = f.model.modes().branch_count();
  EXPECT_EQ(sensing_matrix_bytes(f.model, g, Parameterization::diagonal), (rows + br) * 3 * g.size() * 16);
}

TEST(ForwardModel, ThreadCountDoesNotChangeData) {
  Fixture f;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto d1 = synthesize_data(f.model, *f.s.reflector);
  omp_set_num_threads(4);
  const auto d2 = synthesize_data(f.model, *f.s.reflector);
  omp_set_num_threads(saved);
  EXPECT_EQ((d1.values - d2.values).norm(), 0.0);
}

TEST(Noise, DeterministicAndCalibrated) {
  DataVector base;
  base.values = VectorXc::Constant(20000, cplx(3.0, -4.0));
  DataVector a = base, b = base, c = base;
  add_noise(a, 20.0, 11);
  add_noise(b, 20.0, 11);
  add_noise(c, 20.0, 12);
  EXPECT_EQ((a.values - b.values).norm(), 0.0);
  EXPECT_GT((a.values - c.values).norm(), 0.0);
  ASSERT_TRUE(a.noise.has_value());
  EXPECT_NEAR(a.noise->sigma, 5.0 * 0.1, 1e-12);
  const VectorXc n = a.values - base.values;
  const double rms = n.norm() / std::sqrt(double(n.size()));
  EXPECT_NEAR(rms, 0.5, 0.02);
  const double re_rms = n.real().norm() / std::sqrt(double(n.size()));
  EXPECT_NEAR(re_rms, 0.5 / std::sqrt(2.0), 0.02);
}

TEST(BornSeries, FirstIterateIsBornData) {
  Fixture f;
  GridSpec interior = f.s.imaging;
  Scenario s2 = f.s;
  s2.synthesis = interior;
  const ArrayModel m2(s2, Variant::terminating, propagating_set(s2));
  ShellReflector box{Box{Vec3(6.7, 4.48, -10.94), Vec3(7.2, 4.98, -9.94)}, Box{}, 0.05};
  const auto r = born_series(m2, box, interior);
  EXPECT_TRUE(r.update_norms.empty());
  EXPECT_EQ((r.data.values - synthesize_data(m2, box).values).norm(), 0.0);
}

TEST(BornSeries, MultipleScatteringIsSecondOrderInContrast) {
  Fixture f;
  const GridSpec interior{Box{Vec3(6.7, 4.48, -10.94), Vec3(7.2, 4.98, -9.94)}, 0.25, 0.5};
  BornSeriesOptions o;
  o.iterations = 3;
  double diff[2];
  int j = 0;
  for (double v : {0.01, 0.02}) {
    ShellReflector box{interior.window, Box{}, v};
    const auto born = born_series(f.model, box, interior);
    const auto ms = born_series(f.model, box, interior, o);
    ASSERT_EQ(ms.update_norms.size(), 2u);
    EXPECT_LT(ms.update_norms[1], ms.update_norms[0]);
    diff[j++] = (ms.data.values - born.data.values).norm();
  }
  EXPECT_NEAR(diff[1] / diff[0], 4.0, 0.2);
}

TEST(BornSeries, ZeroContrastGivesZero) {
  Fixture f;
  BornSeriesOptions o;
  o.iterations = 3;
  const auto r = born_series(f.model, PointReflector{Vec3(6.95, 4.73, -10.44), 0.0}, f.s.imaging, o);
  EXPECT_EQ(r.data.values.norm(), 0.0);
}

TEST(ForwardModel, BoxReflectorConvergesUnderRefinement) {
  // cell-centred sampling of a 0.5 x 0.5 x 0.5 box, pitches 1/12 and 1/24
  Fixture f;
  const Vec3 c(6.95, 4.73, -10.44);
  const Box box{c - Vec3::Constant(0.25), c + Vec3::Constant(0.25)};
  const ShellReflector r{box, Box{}, 1.0};
  VectorXc d[2];
  int j = 0;
  for (double h : {1.0 / 12.0, 1.0 / 24.0}) {
    const VoxelGrid g(Box{box.min + Vec3::Constant(h / 2), box.max - Vec3::Constant(h / 2)}, h, h);
    d[j++] = synthesize_data(f.model, rasterize(r, g)).values;
  }
  EXPECT_LT(rel(d[0], d[1]), 0.02);
}
