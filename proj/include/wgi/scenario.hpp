#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wgi/types.hpp"

namespace wgi {

// All lengths are in units of the wavelength; eps_o = mu_o = 1 so k = omega.

struct WaveguideGeometry {
  double L1 = 0.0;
  double L2 = 0.0;
  bool terminating = true;

  Variant variant() const { return terminating ? Variant::terminating : Variant::infinite; }
  bool strictly_inside(const Vec2& x) const {
    return x.x() > 0.0 && x.x() < L1 && x.y() > 0.0 && x.y() < L2;
  }
};

/// Point dipole J(x) = p delta(x - position) on the plane x3 = -L.
struct SourceSpec {
  Vec2 position = Vec2::Zero();
  Vec3 polarization = Vec3::Zero();
  double L = 0.0;
};

struct ArraySpec {
  Vec2 center = Vec2::Zero();
  Vec2 size = Vec2::Zero();
  double spacing = 0.0;
  std::vector<int> components;  // subset of {1,2,3}
  int decimation = 1;           // keep every r-th receiver per axis

  Vec2 lower() const { return center - 0.5 * size; }
  Vec2 upper() const { return center + 0.5 * size; }
};

struct ModeSettings {
  int budget = 1;
  double evanescent_cutoff = 9.0;  // lambda_max = evanescent_cutoff * k^2
  bool include_evanescent = false;  // evanescent terms in the reference field
  double cutoff_tolerance = 1e-9;   // |k^2 - lambda_n| < tol * k^2 is rejected
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() > min.array()).all() && (p.array() < max.array()).all();
  }
  Vec3 center() const { return 0.5 * (min + max); }
};

/// Node-centred voxel grid: centres at min + i * pitch along each axis.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(const Box& window, double pitch_cross, double pitch_range);

  const Vec3& origin() const { return origin_; }
  double pitch_cross() const { return pitch_cross_; }
  double pitch_range() const { return pitch_range_; }
  double voxel_volume() const { return pitch_cross_ * pitch_cross_ * pitch_range_; }
  int n1() const { return n_[0]; }
  int n2() const { return n_[1]; }
  int n3() const { return n_[2]; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
  }
  double pitch(int axis) const { return axis == 2 ? pitch_range_ : pitch_cross_; }
  int count(int axis) const { return n_[axis]; }

  /// x1 slowest, x3 fastest.
  std::size_t index(int i1, int i2, int i3) const {
    return (static_cast<std::size_t>(i1) * n_[1] + i2) * n_[2] + i3;
  }
  std::array<int, 3> unravel(std::size_t idx) const;
  double coord(int axis, int i) const { return origin_[axis] + i * pitch(axis); }
  Vec3 center(int i1, int i2, int i3) const {
    return {coord(0, i1), coord(1, i2), coord(2, i3)};
  }
  Vec3 center(std::size_t idx) const {
    const auto i = unravel(idx);
    return center(i[0], i[1], i[2]);
  }
  /// Nearest node index along an axis, or -1 when c is more than half a pitch
  /// outside the grid.
  int nearest(int axis, double c) const;

  bool operator==(const VoxelGrid&) const = default;

 private:
  Vec3 origin_ = Vec3::Zero();
  double pitch_cross_ = 0.0;
  double pitch_range_ = 0.0;
  std::array<int, 3> n_{0, 0, 0};
};

struct GridSpec {
  Box window;
  double pitch_cross = 0.0;
  double pitch_range = 0.0;

  VoxelGrid grid() const { return VoxelGrid(window, pitch_cross, pitch_range); }
};

struct PointReflector {
  Vec3 center = Vec3::Zero();
  double value = 1.0;
};

/// Potential equals `value` on outer \ inner.
struct ShellReflector {
  Box outer;
  Box inner;
  double value = 1.0;
};

struct AnisotropicPointReflector {
  Vec3 center = Vec3::Zero();
  Vec3 values = Vec3::Ones();  // diagonal of V
};

using ReflectorSpec = std::variant<PointReflector, ShellReflector, AnisotropicPointReflector>;

/// Nominal centre of a reflector: the point itself, or the outer box centre.
Vec3 reflector_center(const ReflectorSpec& r);
bool reflector_is_anisotropic(const ReflectorSpec& r);

struct Scenario {
  WaveguideGeometry geometry;
  double k = 2.0 * kPi;
  SourceSpec source;
  ArraySpec array;
  ModeSettings modes;
  GridSpec imaging;
  GridSpec synthesis;  // data-generation grid (defaults: lambda/18, lambda/6)
  std::optional<GridSpec> l1;  // optional coarser inversion grid
  std::optional<ReflectorSpec> reflector;
  std::string units = "wavelength";

  Variant variant() const { return geometry.variant(); }
};

/// Every violated invariant, one message each. Empty means valid.
std::vector<std::string> validate(const Scenario& s);

nlohmann::json to_json(const Scenario& s);
nlohmann::json to_json(const ReflectorSpec& r);
ReflectorSpec reflector_from_json(const nlohmann::json& j);
/// Parses without validating.
Scenario scenario_from_json(const nlohmann::json& j);

/// Parses and validates; throws InputError naming every violation.
Scenario load_scenario(const std::string& path);
void write_scenario(const Scenario& s, const std::string& path);

/// FNV-1a over the canonical JSON serialization.
std::uint64_t scenario_hash(const Scenario& s);

enum class PresetName { point, shell, anisotropic };
PresetName preset_from_string(const std::string& name);
std::pair<Scenario, ReflectorSpec> preset(PresetName name);

/// Receivers on the aperture, x1-major. Each axis carries floor(side/spacing)+1
/// points spread uniformly between margins of spacing/2 from the aperture edges.
std::vector<Vec2> build_receiver_grid(const ArraySpec& array, const WaveguideGeometry& geometry);

}  // namespace wgi
