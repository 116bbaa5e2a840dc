#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wgi/imaging.hpp"
#include "wgi/scenario.hpp"

namespace wgi {

inline constexpr const char* kToolVersion = "0.1.0";

struct ExportOptions {
  /// Also write the off-diagonal channels of a full-tensor image.
  bool full_tensor = false;
};

/// Paper-style planes: x1 through the reflector (or source) and x3 through the
/// reflector depth (or window centre). Writes CSV + PGM per channel and a
/// sidecar JSON with axis metadata; returns the file names written.
std::vector<std::string> export_figures(const ImageVolume& img, const Scenario& s, const std::string& dir,
                                        const std::string& prefix, const ExportOptions& opts = {});

/// Planes export_figures uses for this scenario, as (axis, coordinate).
std::vector<std::pair<int, double>> figure_planes(const Scenario& s);

struct RunManifest {
  std::uint64_t scenario_hash = 0;
  std::string scenario_path;
  std::string tool_version = kToolVersion;
  std::map<std::string, std::string> files;  // name relative to the run dir -> blob sha1
  std::map<std::string, double> timings;     // seconds per stage
  nlohmann::json solver = nlohmann::json::object();
  std::optional<double> noise_snr_db;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

struct PipelineOptions {
  std::string out_dir;
  /// Any of modes, synthesize, rtm, l1, export; empty means all.
  std::vector<std::string> stages;
  std::optional<double> noise_snr_db;
  std::uint64_t seed = 0;
  double epsilon_rel = 1e-8;  // l1 constraint relative to ||d||
  bool rebuild_matrix = false;
};

/// Runs the requested stages in order and writes manifest.json to out_dir.
/// Stage failures are rethrown with the stage name prefixed.
RunManifest run_pipeline(const std::string& scenario_path, const PipelineOptions& opts);

}  // namespace wgi
