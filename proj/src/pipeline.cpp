#include "wgi/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "wgi/io.hpp"

namespace wgi {

namespace fs = std::filesystem;

namespace {

std::string fmt_coord(double c) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2) << c;
  return o.str();
}

const char* axis_name(int a) { return a == 0 ? "x1" : (a == 1 ? "x2" : "x3"); }

}  // namespace

std::vector<std::pair<int, double>> figure_planes(const Scenario& s) {
  Vec3 c;
  if (s.reflector) {
    c = reflector_center(*s.reflector);
  } else {
    c = s.imaging.window.center();
    c[0] = s.source.position.x();
  }
  return {{0, c[0]}, {2, c[2]}};
}

std::vector<std::string> export_figures(const ImageVolume& img, const Scenario& s, const std::string& dir,
                                        const std::string& prefix, const ExportOptions& opts) {
  if (img.grid.size() == 0 || img.values.size() == 0) throw InputError("export: empty image volume");
  fs::create_directories(dir);
  std::vector<std::pair<int, std::string>> channels{{-1, ""}};
  const auto ch = static_cast<int>(img.values.cols());
  if (ch == 3) {
    for (int l = 0; l < 3; ++l) channels.emplace_back(l, "_c" + std::to_string(l + 1) + std::to_string(l + 1));
  } else if (ch == 9) {
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < 3; ++m)
        if (l == m || opts.full_tensor)
          channels.emplace_back(3 * l + m, "_c" + std::to_string(l + 1) + std::to_string(m + 1));
  }
  std::vector<std::string> written;
  nlohmann::json side;
  side["units"] = "wavelength";
  side["value"] = "magnitude";
  side["planes"] = nlohmann::json::array();
  for (const auto& [axis, coord] : figure_planes(s)) {
    const std::string base = prefix + "_" + axis_name(axis) + "_" + fmt_coord(coord);
    nlohmann::json pj;
    for (const auto& [c, suffix] : channels) {
      const Slice sl = extract_slice(img, axis, coord, c);
      const std::string stem = base + suffix;
      write_slice_csv(sl, (fs::path(dir) / (stem + ".csv")).string());
      write_slice_pgm(sl, (fs::path(dir) / (stem + ".pgm")).string());
      written.push_back(stem + ".csv");
      written.push_back(stem + ".pgm");
      if (pj.is_null()) {
        const int a = axis == 0 ? 1 : 0;
        const int b = axis == 2 ? 1 : 2;
        pj["normal"] = axis_name(axis);
        pj["requested"] = coord;
        pj["actual"] = sl.coord;
        pj["u_axis"] = {{"name", axis_name(a)}, {"min", sl.u.front()}, {"max", sl.u.back()}, {"count", sl.u.size()}};
        pj["v_axis"] = {{"name", axis_name(b)}, {"min", sl.v.front()}, {"max", sl.v.back()}, {"count", sl.v.size()}};
        pj["pgm_orientation"] = "columns follow u, rows follow v with v increasing upwards";
      }
      pj["files"].push_back(stem + ".csv");
      pj["files"].push_back(stem + ".pgm");
    }
    side["planes"].push_back(pj);
  }
  const std::string sidecar = prefix + "_slices.json";
  std::ofstream(fs::path(dir) / sidecar) << side.dump(2) << '\n';
  written.push_back(sidecar);
  return written;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = "wgi";
  j["version"] = tool_version;
  j["scenario"] = {{"path", scenario_path}, {"hash", scenario_hash}};
  j["seed"] = seed;
  j["noise_snr_db"] = noise_snr_db ? nlohmann::json(*noise_snr_db) : nlohmann::json(nullptr);
  j["files"] = files;
  j["timings_s"] = timings;
  j["solver"] = solver;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.tool_version = j.at("version").get<std::string>();
  m.scenario_path = j.at("scenario").at("path").get<std::string>();
  m.scenario_hash = j.at("scenario").at("hash").get<std::uint64_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("noise_snr_db").is_null()) m.noise_snr_db = j.at("noise_snr_db").get<double>();
  m.files = j.at("files").get<std::map<std::string, std::string>>();
  m.timings = j.at("timings_s").get<std::map<std::string, double>>();
  m.solver = j.at("solver");
  return m;
}

namespace {

const std::vector<std::string> kStages{"modes", "synthesize", "rtm", "l1", "export"};

template <typename F>
void run_stage(const std::string& name, RunManifest& m, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const NumericalError& e) {
    throw NumericalError("[" + name + "] " + e.what());
  } catch (const InputError& e) {
    throw InputError("[" + name + "] " + e.what());
  }
  m.timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Parameterization default_param(const Scenario& s) {
  return s.reflector && reflector_is_anisotropic(*s.reflector) ? Parameterization::diagonal
                                                                : Parameterization::isotropic;
}

}  // namespace

RunManifest run_pipeline(const std::string& scenario_path, const PipelineOptions& opts) {
  std::vector<std::string> stages = opts.stages.empty() ? kStages : opts.stages;
  for (const auto& st : stages)
    if (std::find(kStages.begin(), kStages.end(), st) == kStages.end())
      throw InputError("unknown stage '" + st + "' (modes, synthesize, rtm, l1, export)");
  auto wants = [&](const std::string& st) { return std::find(stages.begin(), stages.end(), st) != stages.end(); };

  const Scenario s = load_scenario(scenario_path);
  if (opts.out_dir.empty()) throw InputError("run: output directory required");
  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  const std::uint64_t hash = scenario_hash(s);
  auto path = [&](const std::string& name) { return (out / name).string(); };

  std::optional<RunManifest> old;
  if (fs::exists(out / "manifest.json")) {
    try {
      old = RunManifest::from_json(nlohmann::json::parse(std::ifstream(out / "manifest.json")));
    } catch (const std::exception&) {
      old.reset();
    }
  }

  RunManifest m;
  m.scenario_hash = hash;
  m.scenario_path = scenario_path;
  m.seed = opts.seed;
  m.noise_snr_db = opts.noise_snr_db;

  std::set<std::string> produced;
  auto record = [&](const std::string& name) {
    m.files[name] = git_blob_sha1(path(name));
    produced.insert(name);
  };
  // a file left by an earlier run is usable only if that run saw the same scenario
  auto fresh = [&](const std::string& name, bool noise_sensitive) {
    if (!old || old->scenario_hash != hash || !fs::exists(path(name))) return false;
    if (noise_sensitive && (old->seed != opts.seed || old->noise_snr_db != opts.noise_snr_db)) return false;
    const auto it = old->files.find(name);
    return it != old->files.end() && it->second == git_blob_sha1(path(name));
  };
  auto require_input = [&](const std::string& name, bool noise_sensitive) {
    if (produced.count(name)) return;
    if (!fs::exists(path(name))) throw InputError("missing input " + path(name) + "; run the stage that produces it");
    if (!fresh(name, noise_sensitive)) throw InputError("stale input " + path(name) + " does not match this scenario");
    record(name);
  };

  // the noise actually present in the data wins over the command line
  auto adopt_noise = [&](const DataVector& d) {
    if (d.noise) {
      m.seed = d.noise->seed;
      m.noise_snr_db = d.noise->snr_db;
    }
  };

  const ModeSet modes = propagating_set(s);

  if (wants("modes"))
    run_stage("modes", m, [&] {
      const auto all = enumerate_propagating(s.geometry, s.k, s.modes.cutoff_tolerance);
      std::ofstream csv(path("modes.csv"));
      csv << std::setprecision(17) << "rank,n1,n2,lambda,beta_re,beta_im,multiplicity,retained\n";
      for (std::size_t i = 0; i < all.size(); ++i)
        csv << i + 1 << ',' << all[i].n1 << ',' << all[i].n2 << ',' << all[i].lambda << ',' << all[i].beta.real()
            << ',' << all[i].beta.imag() << ',' << all[i].multiplicity << ','
            << (static_cast<int>(i) < s.modes.budget ? 1 : 0) << '\n';
      csv.close();
      record("modes.csv");
      m.solver["modes"] = {{"propagating_pairs", all.size()},
                           {"lattice_points", count_propagating_lattice_points(s.geometry, s.k)},
                           {"budget", s.modes.budget},
                           {"branches", modes.branch_count()}};
    });

  std::optional<ArrayModel> model;
  auto get_model = [&]() -> const ArrayModel& {
    if (!model) model.emplace(s, s.variant(), modes);
    return *model;
  };

  if (wants("synthesize"))
    run_stage("synthesize", m, [&] {
      if (!s.reflector) throw InputError("scenario has no reflector to synthesize data from");
      if (fresh("data.bin", true) && fresh("data.csv", true)) {
        record("data.bin");
        record("data.csv");
        return;
      }
      DataVector d = synthesize_data(get_model(), *s.reflector);
      if (opts.noise_snr_db) add_noise(d, *opts.noise_snr_db, opts.seed);
      write_data(d, path("data.bin"));
      write_data_csv(d, path("data.csv"));
      record("data.bin");
      record("data.csv");
    });

  const Parameterization param = default_param(s);

  if (wants("rtm"))
    run_stage("rtm", m, [&] {
      require_input("data.bin", false);
      const DataVector d = read_data(path("data.bin"));
      adopt_noise(d);
      const ImageVolume img = rtm_image(get_model(), d, s.imaging.grid(), param);
      write_image(img, path("rtm.wgiv"));
      record("rtm.wgiv");
    });

  if (wants("l1"))
    run_stage("l1", m, [&] {
      if (!s.l1) throw InputError("scenario has no l1 grid");
      require_input("data.bin", false);
      const DataVector d = read_data(path("data.bin"));
      adopt_noise(d);
      const VoxelGrid grid = s.l1->grid();
      SensingMatrix F;
      const std::string cache = path("matrix.wgim");
      if (fs::exists(cache) && !opts.rebuild_matrix) {
        const SensingMatrix hdr = read_matrix_header(cache);
        if (hdr.scenario_hash != hash || !(hdr.grid == grid) || hdr.param != param)
          throw InputError("stale matrix cache " + cache + " (scenario hash or grid mismatch); rebuild it");
        F = read_matrix(cache);
      } else {
        F = assemble_sensing_matrix(get_model(), grid, param);
        write_matrix(F, cache);
      }
      record("matrix.wgim");
      L1Options lo;
      lo.epsilon = d.noise ? d.noise->sigma * std::sqrt(static_cast<double>(d.values.size()))
                           : opts.epsilon_rel * d.values.norm();
      const L1Image res = l1_reconstruct(F, d, lo);
      write_image(res.image, path("l1.wgiv"));
      record("l1.wgiv");
      m.solver["l1"] = {{"iterations", res.report.iterations}, {"residual", res.report.residual},
                        {"objective", res.report.objective},   {"lambda", res.report.lambda},
                        {"epsilon", *lo.epsilon},              {"converged", res.report.converged},
                        {"certified", res.report.certified},   {"warnings", res.report.warnings}};
    });

  if (wants("export"))
    run_stage("export", m, [&] {
      bool any = false;
      for (const std::string name : {"rtm", "l1"}) {
        const std::string vol = name + ".wgiv";
        if (!produced.count(vol)) {
          if (!fs::exists(path(vol))) continue;
          require_input(vol, false);
        }
        any = true;
        for (const auto& f : export_figures(read_image(path(vol)), s, out.string(), name)) record(f);
      }
      if (!any) throw InputError("missing input: no image volume (rtm.wgiv or l1.wgiv) in " + out.string());
    });

  // carry over files from earlier runs that are still consistent with this scenario
  if (old && old->scenario_hash == hash)
    for (const auto& [name, sha] : old->files)
      if (!produced.count(name) && fs::exists(path(name)) && git_blob_sha1(path(name)) == sha) m.files[name] = sha;

  std::ofstream(out / "manifest.json") << m.to_json().dump(2) << '\n';
  return m;
}

}  // namespace wgi
