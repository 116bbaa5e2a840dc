#include "wgi/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "wgi/modes.hpp"

namespace wgi {

using nlohmann::json;

namespace {

constexpr double kGridSlack = 1e-9;

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec2 vec2_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw InputError(std::string(what) + ": expected [x1, x2]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InputError(std::string(what) + ": expected [x1, x2, x3]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json box_json(const Box& b) { return {{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}; }

Box box_from(const json& j, const char* what) {
  return {vec3_from(j.at("min"), what), vec3_from(j.at("max"), what)};
}

json grid_json(const GridSpec& g) {
  return {{"window_min", vec_json(g.window.min)},
          {"window_max", vec_json(g.window.max)},
          {"pitch_cross", g.pitch_cross},
          {"pitch_range", g.pitch_range}};
}

GridSpec grid_from(const json& j, const char* what) {
  GridSpec g;
  g.window.min = vec3_from(j.at("window_min"), what);
  g.window.max = vec3_from(j.at("window_max"), what);
  g.pitch_cross = j.at("pitch_cross").get<double>();
  g.pitch_range = j.at("pitch_range").get<double>();
  return g;
}

bool finite(const Vec3& v) { return v.allFinite(); }

void check_grid(const GridSpec& g, const Scenario& s, const std::string& name,
                std::vector<std::string>& out) {
  const Box& w = g.window;
  if (!finite(w.min) || !finite(w.max)) {
    out.push_back(name + ": window is not finite");
    return;
  }
  if (!(g.pitch_cross > 0.0) || !(g.pitch_range > 0.0))
    out.push_back(name + ": voxel pitches must be positive");
  if ((w.min.array() > w.max.array()).any()) out.push_back(name + ": window_min exceeds window_max");
  if (!(w.min.z() > -s.source.L) || !(w.max.z() < 0.0))
    out.push_back(name + ": window must lie strictly between the array plane x3=-L and the end wall x3=0");
  if (!(w.min.x() > 0.0) || !(w.max.x() < s.geometry.L1) || !(w.min.y() > 0.0) ||
      !(w.max.y() < s.geometry.L2))
    out.push_back(name + ": window must lie strictly inside the cross-section");
}

bool box_inside(const Box& inner, const Box& outer) {
  return (inner.min.array() >= outer.min.array()).all() &&
         (inner.max.array() <= outer.max.array()).all();
}

}  // namespace

VoxelGrid::VoxelGrid(const Box& window, double pitch_cross, double pitch_range)
    : origin_(window.min), pitch_cross_(pitch_cross), pitch_range_(pitch_range) {
  if (!(pitch_cross > 0.0) || !(pitch_range > 0.0)) throw InputError("voxel pitches must be positive");
  for (int a = 0; a < 3; ++a) {
    const double span = window.max[a] - window.min[a];
    if (span < 0.0) throw InputError("grid window has negative extent");
    n_[a] = static_cast<int>(std::floor(span / pitch(a) + kGridSlack)) + 1;
  }
}

std::array<int, 3> VoxelGrid::unravel(std::size_t idx) const {
  const int i3 = static_cast<int>(idx % n_[2]);
  idx /= n_[2];
  const int i2 = static_cast<int>(idx % n_[1]);
  const int i1 = static_cast<int>(idx / n_[1]);
  return {i1, i2, i3};
}

int VoxelGrid::nearest(int axis, double c) const {
  const double t = (c - origin_[axis]) / pitch(axis);
  const int i = static_cast<int>(std::lround(t));
  if (i < 0 || i >= n_[axis]) return -1;
  if (std::abs(t - i) > 0.5 + kGridSlack) return -1;
  return i;
}

Vec3 reflector_center(const ReflectorSpec& r) {
  return std::visit(
      [](const auto& x) -> Vec3 {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ShellReflector>)
          return x.outer.center();
        else
          return x.center;
      },
      r);
}

bool reflector_is_anisotropic(const ReflectorSpec& r) {
  return std::holds_alternative<AnisotropicPointReflector>(r);
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> v;
  const auto& g = s.geometry;
  if (!(g.L1 > 0.0) || !(g.L2 > 0.0)) v.push_back("geometry: L1 and L2 must be positive");
  if (!(s.k > 0.0) || !std::isfinite(s.k)) v.push_back("k: wavenumber must be positive and finite");
  if (s.units != "wavelength") v.push_back("units: only 'wavelength' is supported");

  if (!g.strictly_inside(s.source.position)) v.push_back("source: position must lie strictly inside the cross-section");
  if (!s.source.polarization.allFinite() || s.source.polarization.norm() == 0.0)
    v.push_back("source: polarization must be a nonzero finite vector");
  if (!(s.source.L > 0.0)) v.push_back("source: L must be positive");

  const auto& a = s.array;
  if (!(a.size.x() > 0.0) || !(a.size.y() > 0.0)) v.push_back("array: aperture sides must be positive");
  if (!(a.lower().x() >= 0.0) || !(a.lower().y() >= 0.0) || !(a.upper().x() <= g.L1) ||
      !(a.upper().y() <= g.L2))
    v.push_back("array: aperture must be contained in the cross-section");
  if (!(a.spacing > 0.0)) v.push_back("array: receiver spacing must be positive");
  if (a.decimation < 1) v.push_back("array: decimation must be >= 1");
  if (a.components.empty()) v.push_back("array: measured components must be nonempty");
  {
    std::set<int> seen;
    for (int q : a.components) {
      if (q < 1 || q > 3) v.push_back("array: component " + std::to_string(q) + " is not in {1,2,3}");
      if (!seen.insert(q).second) v.push_back("array: component " + std::to_string(q) + " listed twice");
    }
  }

  if (!(s.modes.evanescent_cutoff >= 1.0)) v.push_back("modes: evanescent_cutoff must be >= 1");
  if (!(s.modes.cutoff_tolerance >= 0.0)) v.push_back("modes: cutoff_tolerance must be >= 0");
  if (s.modes.budget < 1) {
    v.push_back("modes: budget must be >= 1");
  } else if (g.L1 > 0.0 && g.L2 > 0.0 && s.k > 0.0 && std::isfinite(s.k)) {
    const std::size_t n = count_propagating(g, s.k);
    if (static_cast<std::size_t>(s.modes.budget) > n)
      v.push_back("modes: budget " + std::to_string(s.modes.budget) + " exceeds the " +
                  std::to_string(n) + " propagating index pairs");
  }

  check_grid(s.imaging, s, "imaging", v);
  check_grid(s.synthesis, s, "synthesis", v);
  if (s.l1) check_grid(*s.l1, s, "l1", v);

  if (s.reflector) {
    const Box& w = s.imaging.window;
    auto inside_window = [&](const Vec3& p) {
      return (p.array() >= w.min.array()).all() && (p.array() <= w.max.array()).all();
    };
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, PointReflector>) {
            if (!std::isfinite(r.value)) v.push_back("reflector: value must be finite");
            if (!inside_window(r.center)) v.push_back("reflector: point must lie inside the imaging window");
          } else if constexpr (std::is_same_v<T, AnisotropicPointReflector>) {
            if (!r.values.allFinite()) v.push_back("reflector: values must be finite");
            if (!inside_window(r.center)) v.push_back("reflector: point must lie inside the imaging window");
          } else {
            if (!std::isfinite(r.value)) v.push_back("reflector: value must be finite");
            if ((r.outer.min.array() >= r.outer.max.array()).any() ||
                (r.inner.min.array() >= r.inner.max.array()).any())
              v.push_back("reflector: shell boxes must have positive extent");
            if (!box_inside(r.outer, w)) v.push_back("reflector: shell must lie inside the imaging window");
            const bool overlap = (r.inner.min.array() < r.outer.max.array()).all() &&
                                 (r.inner.max.array() > r.outer.min.array()).all();
            if (!overlap) v.push_back("reflector: inner box must overlap the outer box");
            if (box_inside(r.outer, r.inner)) v.push_back("reflector: shell R \\ R_o is empty");
          }
        },
        *s.reflector);
  }
  return v;
}

json to_json(const ReflectorSpec& r) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PointReflector>)
          return {{"type", "point"}, {"center", vec_json(x.center)}, {"value", x.value}};
        else if constexpr (std::is_same_v<T, AnisotropicPointReflector>)
          return {{"type", "anisotropic"}, {"center", vec_json(x.center)}, {"values", vec_json(x.values)}};
        else
          return {{"type", "shell"}, {"outer", box_json(x.outer)}, {"inner", box_json(x.inner)}, {"value", x.value}};
      },
      r);
}

ReflectorSpec reflector_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "point") return PointReflector{vec3_from(j.at("center"), "reflector.center"), j.at("value").get<double>()};
  if (type == "anisotropic")
    return AnisotropicPointReflector{vec3_from(j.at("center"), "reflector.center"),
                                     vec3_from(j.at("values"), "reflector.values")};
  if (type == "shell")
    return ShellReflector{box_from(j.at("outer"), "reflector.outer"), box_from(j.at("inner"), "reflector.inner"),
                          j.at("value").get<double>()};
  throw InputError("reflector: unknown type '" + type + "'");
}

json to_json(const Scenario& s) {
  json j;
  j["geometry"] = {{"L1", s.geometry.L1}, {"L2", s.geometry.L2}, {"terminating", s.geometry.terminating}};
  j["k"] = s.k;
  j["units"] = s.units;
  j["source"] = {{"position", vec_json(s.source.position)},
                 {"polarization", vec_json(s.source.polarization)},
                 {"L", s.source.L}};
  j["array"] = {{"center", vec_json(s.array.center)},
                {"size", vec_json(s.array.size)},
                {"spacing", s.array.spacing},
                {"components", s.array.components},
                {"decimation", s.array.decimation}};
  j["modes"] = {{"budget", s.modes.budget},
                {"evanescent_cutoff", s.modes.evanescent_cutoff},
                {"include_evanescent", s.modes.include_evanescent},
                {"cutoff_tolerance", s.modes.cutoff_tolerance}};
  j["imaging"] = grid_json(s.imaging);
  j["synthesis"] = grid_json(s.synthesis);
  if (s.l1) j["l1"] = grid_json(*s.l1);
  if (s.reflector) j["reflector"] = to_json(*s.reflector);
  return j;
}

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    const auto& g = j.at("geometry");
    s.geometry.L1 = g.at("L1").get<double>();
    s.geometry.L2 = g.at("L2").get<double>();
    s.geometry.terminating = g.value("terminating", true);
    s.k = j.value("k", 2.0 * kPi);
    s.units = j.value("units", std::string("wavelength"));
    const auto& src = j.at("source");
    s.source.position = vec2_from(src.at("position"), "source.position");
    s.source.polarization = vec3_from(src.at("polarization"), "source.polarization");
    s.source.L = src.at("L").get<double>();
    const auto& arr = j.at("array");
    s.array.center = vec2_from(arr.at("center"), "array.center");
    s.array.size = vec2_from(arr.at("size"), "array.size");
    s.array.spacing = arr.at("spacing").get<double>();
    s.array.components = arr.at("components").get<std::vector<int>>();
    s.array.decimation = arr.value("decimation", 1);
    const auto& m = j.at("modes");
    s.modes.budget = m.at("budget").get<int>();
    s.modes.evanescent_cutoff = m.value("evanescent_cutoff", 9.0);
    s.modes.include_evanescent = m.value("include_evanescent", false);
    s.modes.cutoff_tolerance = m.value("cutoff_tolerance", 1e-9);
    s.imaging = grid_from(j.at("imaging"), "imaging");
    if (j.contains("synthesis")) {
      s.synthesis = grid_from(j.at("synthesis"), "synthesis");
    } else {
      s.synthesis = s.imaging;
      s.synthesis.pitch_cross = 1.0 / 18.0;
      s.synthesis.pitch_range = 1.0 / 6.0;
    }
    if (j.contains("l1")) s.l1 = grid_from(j.at("l1"), "l1");
    if (j.contains("reflector") && !j.at("reflector").is_null()) s.reflector = reflector_from_json(j.at("reflector"));
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("scenario parse error: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("scenario parse error in '" + path + "': " + e.what());
  }
  Scenario s = scenario_from_json(j);
  const auto violations = validate(s);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "scenario '" << path << "' is invalid:";
    for (const auto& v : violations) msg << "\n  " << v;
    throw InputError(msg.str());
  }
  return s;
}

void write_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write scenario file '" + path + "'");
  out << to_json(s).dump(2) << '\n';
}

std::uint64_t scenario_hash(const Scenario& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

PresetName preset_from_string(const std::string& name) {
  if (name == "point") return PresetName::point;
  if (name == "shell") return PresetName::shell;
  if (name == "anisotropic") return PresetName::anisotropic;
  throw InputError("unknown preset '" + name + "' (expected point, shell or anisotropic)");
}

std::pair<Scenario, ReflectorSpec> preset(PresetName name) {
  Scenario s;
  s.geometry = {13.9, 14.2, true};
  s.k = 2.0 * kPi;
  s.source.position = {6.95, 7.1};
  s.source.polarization = name == PresetName::anisotropic ? Vec3(1, 1, 1) : Vec3(0, 1, 0);
  s.source.L = 41.8;
  // 75% aperture centred on the waveguide axis.
  s.array.center = {6.95, 7.1};
  s.array.size = {10.5, 10.65};
  s.array.spacing = 1.0 / 18.0;
  s.array.components = {2};
  s.modes.budget = 350;

  const double fine_cross = 1.0 / 18.0;
  const double fine_range = 1.0 / 6.0;
  const double coarse_cross = 0.29;
  const double coarse_range = 0.87;

  // Windows are built around the reflector centre so that it falls on a node.
  auto window = [](const Vec3& c, int h_cross, int h_range, double pc, double pr) {
    const Vec3 half(h_cross * pc, h_cross * pc, h_range * pr);
    return Box{c - half, c + half};
  };

  ReflectorSpec reflector;
  Vec3 c;
  int fine_half_range = 18;
  int coarse_half_range = 3;
  switch (name) {
    case PresetName::point:
      c = {6.95, 4.73, -10.44};
      reflector = PointReflector{c, 1.0};
      break;
    case PresetName::anisotropic:
      c = {6.95, 4.73, -10.44};
      reflector = AnisotropicPointReflector{c, Vec3(3, 1, 5)};
      break;
    case PresetName::shell:
      reflector = ShellReflector{Box{Vec3(6.38, 6.51, -13.09), Vec3(7.54, 7.69, -9.19)},
                                 Box{Vec3(6.09, 6.22, -12.22), Vec3(7.25, 7.40, -8.32)}, 8.0};
      c = std::get<ShellReflector>(reflector).outer.center();  // (6.96, 7.10, -11.14)
      fine_half_range = 21;
      coarse_half_range = 4;
      break;
  }
  s.imaging = {window(c, 36, fine_half_range, fine_cross, fine_range), fine_cross, fine_range};
  s.synthesis = s.imaging;
  s.l1 = GridSpec{window(c, 6, coarse_half_range, coarse_cross, coarse_range), coarse_cross, coarse_range};
  s.reflector = reflector;
  return {s, reflector};
}

std::vector<Vec2> build_receiver_grid(const ArraySpec& array, const WaveguideGeometry& geometry) {
  if (!(array.spacing > 0.0)) throw InputError("receiver spacing must be positive");
  std::array<std::vector<double>, 2> axes;
  for (int a = 0; a < 2; ++a) {
    const double side = array.size[a];
    if (!(array.spacing < side))
      throw InputError("receiver spacing " + std::to_string(array.spacing) + " does not fit the aperture side " +
                       std::to_string(side));
    const int n = static_cast<int>(std::floor(side / array.spacing + 1e-12)) + 1;
    const double lo = array.lower()[a] + 0.5 * array.spacing;
    const double step = (side - array.spacing) / (n - 1);
    const int r = std::max(1, array.decimation);
    for (int i = 0; i < n; i += r) axes[a].push_back(lo + i * step);
  }
  std::vector<Vec2> pts;
  pts.reserve(axes[0].size() * axes[1].size());
  for (double x1 : axes[0])
    for (double x2 : axes[1]) {
      const Vec2 p(x1, x2);
      if (!geometry.strictly_inside(p)) throw InputError("receiver falls outside the cross-section");
      pts.push_back(p);
    }
  return pts;
}

}  // namespace wgi
