#include <fstream>
#include <numeric>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wgi/scenario.hpp"

using namespace wgi;

namespace {

std::string write_json(const std::string& dir, const std::string& name, const nlohmann::json& j) {
  const std::string p = dir + "/" + name;
  std::ofstream(p) << j.dump(2);
  return p;
}

}  // namespace

TEST(Scenario, PresetsValidate) {
  for (auto name : {PresetName::point, PresetName::shell, PresetName::anisotropic}) {
    const auto [s, r] = preset(name);
    EXPECT_TRUE(validate(s).empty());
    EXPECT_TRUE(s.reflector.has_value());
  }
}

TEST(Scenario, PresetReflectorsSitOnNodes) {
  for (auto name : {PresetName::point, PresetName::shell, PresetName::anisotropic}) {
    const auto [s, r] = preset(name);
    const Vec3 c = reflector_center(r);
    for (const auto& g : {s.imaging.grid(), s.l1->grid()})
      for (int a = 0; a < 3; ++a) {
        const int i = g.nearest(a, c[a]);
        ASSERT_GE(i, 0);
        EXPECT_NEAR(g.coord(a, i), c[a], 1e-9);
      }
  }
}

TEST(Scenario, JsonRoundTripKeepsHash) {
  const auto [s, r] = preset(PresetName::shell);
  const Scenario back = scenario_from_json(to_json(s));
  EXPECT_EQ(scenario_hash(back), scenario_hash(s));
  EXPECT_EQ(to_json(back), to_json(s));
}

TEST(Scenario, HashChangesWithContent) {
  auto s = test::small_scenario();
  const auto h = scenario_hash(s);
  s.modes.budget += 1;
  EXPECT_NE(h, scenario_hash(s));
}

TEST(Scenario, LoadReportsEveryViolation) {
  const auto dir = test::scratch_dir("scenario_bad");
  auto j = to_json(test::small_scenario());
  j["geometry"]["L1"] = -1.0;
  j["array"]["components"] = {2, 4};
  j["modes"]["budget"] = 0;
  const auto p = write_json(dir, "bad.json", j);
  try {
    load_scenario(p);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("L1"), std::string::npos);
    EXPECT_NE(msg.find("component 4"), std::string::npos);
    EXPECT_NE(msg.find("budget"), std::string::npos);
  }
}

TEST(Scenario, BudgetAboveModeCountRejected) {
  auto s = test::small_scenario();
  s.modes.budget = 700;
  const auto v = validate(s);
  ASSERT_FALSE(v.empty());
  EXPECT_NE(v.front().find("budget"), std::string::npos);
}

TEST(Scenario, SourceOnWallRejected) {
  auto s = test::small_scenario();
  s.source.position = {0.0, 7.1};
  EXPECT_FALSE(validate(s).empty());
}

TEST(Scenario, MissingFileAndMalformedJson) {
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), InputError);
  const auto dir = test::scratch_dir("scenario_malformed");
  std::ofstream(dir + "/m.json") << "{ not json";
  EXPECT_THROW(load_scenario(dir + "/m.json"), InputError);
}

TEST(Scenario, MinimalFileGetsDefaults) {
  const auto dir = test::scratch_dir("scenario_minimal");
  nlohmann::json j = {
      {"geometry", {{"L1", 13.9}, {"L2", 14.2}}},
      {"k", 2 * kPi},
      {"source", {{"position", {6.95, 7.1}}, {"polarization", {0, 1, 0}}, {"L", 41.8}}},
      {"array", {{"center", {6.95, 7.1}}, {"size", {10.5, 10.65}}, {"spacing", 0.5}, {"components", {2}}}},
      {"modes", {{"budget", 100}, {"evanescent_cutoff", 9}}},
      {"imaging", {{"window_min", {6, 4, -11}}, {"window_max", {8, 5, -10}}, {"pitch_cross", 0.25}, {"pitch_range", 0.5}}},
      {"reflector", {{"type", "point"}, {"center", {6.95, 4.73, -10.44}}, {"value", 1.0}}}};
  const Scenario s = load_scenario(write_json(dir, "min.json", j));
  EXPECT_TRUE(s.geometry.terminating);
  EXPECT_EQ(s.array.decimation, 1);
  EXPECT_NEAR(s.synthesis.pitch_cross, 1.0 / 18.0, 1e-15);
  EXPECT_NEAR(s.synthesis.pitch_range, 1.0 / 6.0, 1e-15);
  EXPECT_FALSE(s.l1.has_value());
}

TEST(ReceiverGrid, SeventyFivePercentApertureAtHalfWavelength) {
  auto [s, r] = preset(PresetName::point);
  s.array.spacing = 0.5;
  const auto rx = build_receiver_grid(s.array, s.geometry);
  EXPECT_EQ(rx.size(), 22u * 22u);
  for (const auto& x : rx) {
    EXPECT_GE(x.x(), s.array.lower().x() + 0.25 - 1e-12);
    EXPECT_LE(x.x(), s.array.upper().x() - 0.25 + 1e-12);
  }
  // symmetric about the aperture centre
  const Vec2 mean = std::accumulate(rx.begin(), rx.end(), Vec2(Vec2::Zero())) / static_cast<double>(rx.size());
  EXPECT_NEAR((mean - s.array.center).norm(), 0.0, 1e-12);
}

TEST(ReceiverGrid, FullApertureStaysInside) {
  WaveguideGeometry g{13.9, 14.2, true};
  ArraySpec a;
  a.center = {6.95, 7.1};
  a.size = {13.9, 14.2};
  a.spacing = 1.0;
  a.components = {1};
  const auto rx = build_receiver_grid(a, g);
  EXPECT_EQ(rx.size(), 14u * 15u);
  for (const auto& x : rx) EXPECT_TRUE(g.strictly_inside(x));
}

TEST(ReceiverGrid, DecimationKeepsEveryRthPoint) {
  auto [s, r] = preset(PresetName::point);
  s.array.spacing = 0.5;
  const auto full = build_receiver_grid(s.array, s.geometry);
  s.array.decimation = 3;
  const auto dec = build_receiver_grid(s.array, s.geometry);
  EXPECT_EQ(dec.size(), 8u * 8u);
  EXPECT_EQ(dec.front(), full.front());
}

TEST(ReceiverGrid, SpacingWiderThanApertureRejected) {
  auto [s, r] = preset(PresetName::point);
  s.array.spacing = 20.0;
  EXPECT_THROW(build_receiver_grid(s.array, s.geometry), InputError);
}

TEST(VoxelGrid, IndexingAndNearest) {
  const VoxelGrid g(Box{Vec3(1, 2, -3), Vec3(2, 3, -2)}, 0.25, 0.5);
  EXPECT_EQ(g.n1(), 5);
  EXPECT_EQ(g.n3(), 3);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto u = g.unravel(i);
    EXPECT_EQ(g.index(u[0], u[1], u[2]), i);
  }
  EXPECT_EQ(g.nearest(0, 1.6), 2);
  EXPECT_EQ(g.nearest(2, -4.0), -1);
  EXPECT_NEAR(g.voxel_volume(), 0.25 * 0.25 * 0.5, 1e-15);
}
