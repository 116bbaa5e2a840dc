#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wgi/imaging.hpp"

using namespace wgi;

namespace {

struct Fixture {
  Scenario s = test::small_scenario(40);
  ArrayModel model{s, Variant::terminating, propagating_set(s)};
  DataVector d = synthesize_data(model, *s.reflector);
};

ImageVolume synthetic_volume() {
  ImageVolume img;
  img.grid = VoxelGrid(Box{Vec3(0, 0, -3), Vec3(2, 1.5, -1)}, 0.25, 0.5);
  img.values = MatrixXc::Zero(static_cast<Eigen::Index>(img.grid.size()), 1);
  for (std::size_t v = 0; v < img.grid.size(); ++v) {
    const Vec3 c = img.grid.center(v);
    const double a = std::exp(-(c - Vec3(0.5, 0.75, -2.0)).squaredNorm() / 0.05);
    const double b = 0.4 * std::exp(-(c - Vec3(1.75, 0.75, -2.0)).squaredNorm() / 0.05);
    img.values(static_cast<Eigen::Index>(v), 0) = cplx(a + b, 0.0);
  }
  return img;
}

// Global lasso minimizer by enumerating supports and sign patterns.
Eigen::VectorXd brute_force_lasso(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double lambda) {
  const int n = static_cast<int>(A.cols());
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_obj = 0.5 * b.squaredNorm();
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) idx.push_back(i);
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd As(A.rows(), m);
    for (int j = 0; j < m; ++j) As.col(j) = A.col(idx[j]);
    for (int sg = 0; sg < (1 << m); ++sg) {
      Eigen::VectorXd s(m);
      for (int j = 0; j < m; ++j) s[j] = (sg & (1 << j)) ? -1.0 : 1.0;
      const Eigen::VectorXd xs = (As.transpose() * As).ldlt().solve(As.transpose() * b - lambda * s);
      if (((xs.array() * s.array()) <= 0).any()) continue;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < m; ++j) x[idx[j]] = xs[j];
      const double obj = 0.5 * (A * x - b).squaredNorm() + lambda * x.lpNorm<1>();
      if (obj < best_obj) {
        best_obj = obj;
        best = x;
      }
    }
  }
  return best;
}

}  // namespace

TEST(Rtm, EqualsConjugatedAdjointOfSensingMatrix) {
  Fixture f;
  const VoxelGrid g = f.s.imaging.grid();
  for (auto p : {Parameterization::isotropic, Parameterization::diagonal}) {
    const auto F = assemble_sensing_matrix(f.model, g, p);
    const auto img = rtm_image(f.model, f.d, g, p);
    const VectorXc ref = (F.F.adjoint() * f.d.values).conjugate() / (f.s.k * f.s.k * g.voxel_volume());
    // values are voxel-major in the matrix column order
    VectorXc flat(img.values.size());
    for (Eigen::Index v = 0; v < img.values.rows(); ++v)
      for (Eigen::Index l = 0; l < img.values.cols(); ++l) flat[v * img.values.cols() + l] = img.values(v, l);
    EXPECT_LT((flat - ref).norm(), 1e-12 * ref.norm());
  }
}

TEST(Rtm, FullTensorMatchesDirectGreenSum) {
  Fixture f;
  const VoxelGrid g = f.s.imaging.grid();
  const auto img = rtm_image(f.model, f.d, g, Parameterization::full);
  ASSERT_EQ(img.values.cols(), 9);
  const auto& rx = f.model.receivers();
  for (std::size_t v : {std::size_t(5), g.size() - 3}) {
    const Vec3 y = g.center(v);
    const CVec3 e = eval_reference_field(y, f.model.modes(), f.model.amplitudes());
    CVec3 B = CVec3::Zero();
    for (std::size_t r = 0; r < rx.size(); ++r) {
      const CMat3 G = dyadic_green(Vec3(rx[r].x(), rx[r].y(), -f.s.source.L), y, f.model.modes(), Variant::terminating);
      B += G.row(1).transpose() * std::conj(f.d.values[static_cast<Eigen::Index>(r)]);
    }
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < 3; ++m) {
        const cplx want = B[l] * e[m];
        EXPECT_LT(std::abs(img.values(static_cast<Eigen::Index>(v), 3 * l + m) - want), 1e-11 * B.norm() * e.norm());
      }
  }
}

TEST(Rtm, IsotropicIsTraceOfFullTensor) {
  Fixture f;
  const VoxelGrid g = f.s.imaging.grid();
  const auto iso = rtm_image(f.model, f.d, g, Parameterization::isotropic);
  const auto diag = rtm_image(f.model, f.d, g, Parameterization::diagonal);
  const auto full = rtm_image(f.model, f.d, g, Parameterization::full);
  const VectorXc tr = full.values.col(0) + full.values.col(4) + full.values.col(8);
  EXPECT_LT((iso.values.col(0) - tr).norm(), 1e-12 * tr.norm());
  EXPECT_LT((diag.values.rowwise().sum() - tr).norm(), 1e-12 * tr.norm());
}

TEST(Rtm, ConjugateLinearInData) {
  Fixture f;
  const VoxelGrid g = f.s.imaging.grid();
  DataVector d2 = f.d;
  const cplx a(0.3, -1.7);
  d2.values *= a;
  const auto i1 = rtm_image(f.model, f.d, g);
  const auto i2 = rtm_image(f.model, d2, g);
  EXPECT_LT((i2.values - std::conj(a) * i1.values).norm(), 1e-12 * i2.values.norm());
}

TEST(Rtm, PeaksAtThePointReflector) {
  // range focusing needs a wide spread of axial wavenumbers, hence many modes
  const Scenario s = test::small_scenario(400);
  const ArrayModel model(s, Variant::terminating, propagating_set(s));
  const VoxelGrid g = s.imaging.grid();
  const auto img = rtm_image(model, synthesize_data(model, *s.reflector), g);
  EXPECT_LT((g.center(peak_voxel(img)) - reflector_center(*s.reflector)).norm(), 1e-9);
}

TEST(Rtm, RejectsMismatchedData) {
  Fixture f;
  DataVector bad = f.d;
  bad.components = {1};
  EXPECT_THROW(rtm_image(f.model, bad, f.s.imaging.grid()), InputError);
  bad = f.d;
  bad.values.conservativeResize(bad.values.size() - 1);
  EXPECT_THROW(rtm_image(f.model, bad, f.s.imaging.grid()), InputError);
}

TEST(Slices, AxisMappingAndValues) {
  const auto img = synthetic_volume();
  const auto mag = img.magnitude();
  const auto sx = extract_slice(img, 0, 0.5);
  EXPECT_EQ(sx.u.size(), static_cast<std::size_t>(img.grid.n2()));
  EXPECT_EQ(sx.v.size(), static_cast<std::size_t>(img.grid.n3()));
  EXPECT_EQ(sx.values(3, 2), mag[static_cast<Eigen::Index>(img.grid.index(2, 3, 2))]);
  const auto sz = extract_slice(img, 2, -2.0);
  EXPECT_EQ(sz.u.size(), static_cast<std::size_t>(img.grid.n1()));
  EXPECT_EQ(sz.v.size(), static_cast<std::size_t>(img.grid.n2()));
  EXPECT_EQ(sz.values(7, 1), mag[static_cast<Eigen::Index>(img.grid.index(7, 1, 2))]);
  EXPECT_THROW(extract_slice(img, 2, -5.0), InputError);
  EXPECT_THROW(extract_slice(img, 3, 0.0), InputError);
}

TEST(ImageMetrics, PeakSupportAndSidelobe) {
  const auto img = synthetic_volume();
  const std::size_t pk = peak_voxel(img);
  EXPECT_EQ(img.grid.center(pk), Vec3(0.5, 0.75, -2.0));
  EXPECT_NEAR(secondary_peak_ratio(img), 0.4, 1e-3);
  const auto supp = support_estimate(img, 0.5);
  for (auto v : supp) EXPECT_GE(img.magnitude()[static_cast<Eigen::Index>(v)], 0.5 * img.magnitude().maxCoeff());
  EXPECT_FALSE(supp.empty());
}

TEST(SoftThreshold, ShrinksTowardZero) {
  Eigen::Array2d x(2.0, -0.5);
  const Eigen::Array2d y = soft_threshold(x, 1.0);
  EXPECT_EQ(y[0], 1.0);
  EXPECT_EQ(y[1], 0.0);
  const Eigen::Array2d z = soft_threshold(Eigen::Array2d(-3.0, 2.5), 1.0, true);
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[1], 1.5);
}

TEST(L1Solver, MatchesBruteForceOnThreeUnknowns) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd A(6, 3);
  Eigen::VectorXd b(6);
  for (int t = 0; t < 5; ++t) {
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = n(rng);
    const double lambda = 0.3 * (A.transpose() * b).cwiseAbs().maxCoeff();
    const auto res = solve_lasso(A, b, lambda, L1Options{});
    EXPECT_LT((res.x - brute_force_lasso(A, b, lambda)).norm(), 1e-8);
    EXPECT_TRUE(res.report.certified);
    EXPECT_TRUE(lasso_certificate(A, b, res.x, lambda, 1e-6).ok);
  }
}

TEST(L1Solver, ObjectiveHistoryIsMonotone) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd A(30, 60);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = n(rng);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(60);
  x0[4] = 1.0;
  x0[33] = -2.0;
  const Eigen::VectorXd b = A * x0;
  L1Options o;
  o.record_history = true;
  o.polish = false;
  o.max_iter = 500;
  const auto res = solve_lasso(A, b, 0.1, o);
  ASSERT_GT(res.report.history.size(), 2u);
  for (std::size_t i = 1; i < res.report.history.size(); ++i)
    EXPECT_LE(res.report.history[i], res.report.history[i - 1] * (1 + 1e-14));
}

TEST(L1Solver, ConstrainedModeHitsEpsilon) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd A(40, 80);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = n(rng);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(80);
  x0[10] = 1.5;
  x0[50] = -0.7;
  Eigen::VectorXd b = A * x0;
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += 0.01 * n(rng);
  L1Options o;
  o.epsilon = 0.05 * b.norm();
  const auto res = l1_minimize(A, b, o);
  EXPECT_LE(res.report.residual, *o.epsilon * (1 + 1e-12));
  EXPECT_GE(res.report.residual, *o.epsilon * (1 - 1e-3));
  EXPECT_NEAR((A * res.x - b).norm(), res.report.residual, 1e-10 * b.norm());
  EXPECT_TRUE(res.report.certified);
}

TEST(L1Solver, ZeroDataGivesZero) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4);
  L1Options o;
  o.epsilon = 0.0;
  const auto res = l1_minimize(A, Eigen::VectorXd::Zero(4), o);
  EXPECT_EQ(res.x.norm(), 0.0);
}

TEST(L1Solver, PowerIterationMatchesSvd) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd A(20, 12);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = n(rng);
  const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()[0];
  EXPECT_NEAR(power_norm_squared(A, 200) / (s * s), 1.0, 1e-6);
}

TEST(L1Reconstruct, RecoversPointOnItsOwnGrid) {
  Fixture f;
  const VoxelGrid g = f.s.l1->grid();
  const auto F = assemble_sensing_matrix(f.model, g, Parameterization::isotropic);
  const std::size_t target = g.index(g.nearest(0, 6.95), g.nearest(1, 4.73), g.nearest(2, -10.44));
  DataVector d = f.d;
  d.values = F.F.col(static_cast<Eigen::Index>(target));
  L1Options o;
  o.epsilon = 1e-8 * d.values.norm();
  const auto r = l1_reconstruct(F, d, o);
  EXPECT_EQ(peak_voxel(r.image), target);
  EXPECT_NEAR(r.image.values(static_cast<Eigen::Index>(target), 0).real(), 1.0, 1e-4);
  EXPECT_LT(secondary_peak_ratio(r.image), 1e-3);
}
