// wgi: waveguide imaging command-line tool.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <omp.h>

#include <CLI11.hpp>

#include "wgi/greens_checks.hpp"
#include "wgi/io.hpp"
#include "wgi/pipeline.hpp"

namespace fs = std::filesystem;
using namespace wgi;

namespace {

void apply_thread_cap() {
  if (const char* env = std::getenv("WGI_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw InputError("WGI_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(n));
  }
}

Variant pick_variant(const Scenario& s, const std::string& v) {
  if (v.empty()) return s.variant();
  if (v == "terminating") return Variant::terminating;
  if (v == "infinite") return Variant::infinite;
  throw InputError("unknown variant '" + v + "' (terminating, infinite)");
}

Parameterization pick_param(const Scenario& s, const std::string& p) {
  if (!p.empty()) return parameterization_from_string(p);
  return s.reflector && reflector_is_anisotropic(*s.reflector) ? Parameterization::diagonal
                                                                : Parameterization::isotropic;
}

int cmd_validate(const std::string& path) {
  const auto j = [&] {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ": " + e.what());
    }
  }();
  Scenario s;
  try {
    s = scenario_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  const auto problems = validate(s);
  for (const auto& p : problems) std::cout << path << ": " << p << '\n';
  if (!problems.empty()) return 1;
  std::cout << path << ": ok\n";
  return 0;
}

int cmd_modes(const std::string& path, const std::string& csv, int list) {
  const Scenario s = load_scenario(path);
  const auto all = enumerate_propagating(s.geometry, s.k, s.modes.cutoff_tolerance);
  std::cout << "propagating index pairs: " << all.size() << '\n'
            << "lattice points with lambda_n < k^2 (origin included): "
            << count_propagating_lattice_points(s.geometry, s.k) << '\n'
            << "retained (first arriving): " << s.modes.budget << '\n';
  const int shown = list < 0 ? s.modes.budget : std::min(list, s.modes.budget);
  std::cout << std::setw(6) << "rank" << std::setw(5) << "n1" << std::setw(5) << "n2" << std::setw(14) << "lambda"
            << std::setw(14) << "beta" << '\n';
  for (int i = 0; i < shown; ++i)
    std::cout << std::setw(6) << i + 1 << std::setw(5) << all[i].n1 << std::setw(5) << all[i].n2 << std::setw(14)
              << std::setprecision(8) << all[i].lambda << std::setw(14) << all[i].beta.real() << '\n';
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw InputError("cannot open " + csv);
    out << std::setprecision(17) << "rank,n1,n2,lambda,beta_re,beta_im,multiplicity\n";
    for (std::size_t i = 0; i < all.size(); ++i)
      out << i + 1 << ',' << all[i].n1 << ',' << all[i].n2 << ',' << all[i].lambda << ',' << all[i].beta.real() << ','
          << all[i].beta.imag() << ',' << all[i].multiplicity << '\n';
  }
  return 0;
}

int cmd_field(const std::string& path, const std::string& plane, const std::string& out, const std::string& var) {
  const Scenario s = load_scenario(path);
  const auto eq = plane.find('=');
  if (eq == std::string::npos) throw InputError("plane must look like x3=-10.44 or x1=6.95");
  const std::string ax = plane.substr(0, eq);
  const int axis = ax == "x1" ? 0 : ax == "x2" ? 1 : ax == "x3" ? 2 : -1;
  if (axis < 0) throw InputError("plane axis must be x1, x2 or x3");
  double c = 0.0;
  try {
    c = std::stod(plane.substr(eq + 1));
  } catch (const std::exception&) {
    throw InputError("plane coordinate is not a number: " + plane);
  }
  const Variant v = pick_variant(s, var);
  const ModeSet modes = illumination_set(s, propagating_set(s));
  const ModeAmplitudes amps = compute_amplitudes(modes, s.source, v);
  Box win = s.imaging.window;
  win.min[axis] = win.max[axis] = c;
  const VoxelGrid grid(win, s.imaging.pitch_cross, s.imaging.pitch_range);
  std::ofstream o(out);
  if (!o) throw InputError("cannot open " + out);
  o << std::setprecision(12) << "x1,x2,x3,abs_e1,abs_e2,abs_e3\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.center(i);
    const CVec3 e = eval_reference_field(x, modes, amps);
    o << x[0] << ',' << x[1] << ',' << x[2] << ',' << std::abs(e[0]) << ',' << std::abs(e[1]) << ','
      << std::abs(e[2]) << '\n';
  }
  std::cout << "wrote " << grid.size() << " points to " << out << '\n';
  return 0;
}

int cmd_greens(const std::string& path, std::uint64_t seed) {
  const Scenario s = load_scenario(path);
  const auto results = run_greens_checks(s, seed);
  bool ok = true;
  std::cout << std::left << std::setw(28) << "check" << std::setw(14) << "value" << std::setw(12) << "threshold"
            << "result\n";
  for (const auto& r : results) {
    std::cout << std::left << std::setw(28) << r.name << std::setw(14) << std::setprecision(4) << r.value
              << std::setw(12) << r.threshold << (r.pass ? "PASS" : "FAIL") << '\n';
    ok = ok && r.pass;
  }
  return ok ? 0 : 2;
}

int cmd_synthesize(const std::string& path, const std::string& out, const std::string& csv,
                   std::optional<double> snr, std::uint64_t seed, const std::string& var) {
  const Scenario s = load_scenario(path);
  if (!s.reflector) throw InputError("scenario has no reflector to synthesize data from");
  const ArrayModel model(s, pick_variant(s, var), propagating_set(s));
  DataVector d = synthesize_data(model, *s.reflector);
  if (snr) add_noise(d, *snr, seed);
  write_data(d, out);
  if (!csv.empty()) write_data_csv(d, csv);
  std::cout << "wrote " << d.values.size() << " measurements (" << d.receivers.size() << " receivers) to " << out
            << '\n';
  return 0;
}

int cmd_rtm(const std::string& path, const std::string& data, const std::string& out, const std::string& param,
            const std::string& var, bool full_export) {
  const Scenario s = load_scenario(path);
  const ArrayModel model(s, pick_variant(s, var), propagating_set(s));
  const ImageVolume img = rtm_image(model, read_data(data), s.imaging.grid(), pick_param(s, param));
  fs::create_directories(out);
  write_image(img, (fs::path(out) / "rtm.wgiv").string());
  ExportOptions eo;
  eo.full_tensor = full_export;
  const auto files = export_figures(img, s, out, "rtm", eo);
  std::cout << "wrote rtm.wgiv and " << files.size() << " slice files to " << out << '\n';
  return 0;
}

int cmd_l1(const std::string& path, const std::string& data, const std::string& matrix, std::optional<double> eps,
           std::optional<double> eps_rel, std::optional<double> lambda, int max_iter, double tol, bool nonneg,
           bool strict, const std::string& out, const std::string& param, const std::string& var, bool rebuild) {
  const Scenario s = load_scenario(path);
  if (!s.l1) throw InputError("scenario has no l1 grid");
  const DataVector d = read_data(data);
  const Parameterization p = pick_param(s, param);
  const VoxelGrid grid = s.l1->grid();
  const Variant v = pick_variant(s, var);
  SensingMatrix F;
  if (fs::exists(matrix) && !rebuild) {
    const SensingMatrix hdr = read_matrix_header(matrix);
    if (hdr.scenario_hash != scenario_hash(s) || !(hdr.grid == grid) || hdr.param != p || hdr.variant != v)
      throw InputError("stale matrix cache " + matrix + "; pass --rebuild-matrix to replace it");
    F = read_matrix(matrix);
  } else {
    const ArrayModel model(s, v, propagating_set(s));
    F = assemble_sensing_matrix(model, grid, p);
    write_matrix(F, matrix);
  }
  L1Options o;
  if (lambda) {
    o.lambda = *lambda;
  } else {
    o.epsilon = eps ? *eps : eps_rel.value_or(1e-8) * d.values.norm();
  }
  o.max_iter = max_iter;
  o.tol = tol;
  o.nonnegative = nonneg;
  const L1Image res = l1_reconstruct(F, d, o);
  fs::create_directories(out);
  write_image(res.image, (fs::path(out) / "l1.wgiv").string());
  export_figures(res.image, s, out, "l1");
  const auto& r = res.report;
  std::cout << "iterations " << r.iterations << ", residual " << r.residual << ", objective " << r.objective
            << ", lambda " << r.lambda << ", converged " << (r.converged ? "yes" : "no") << '\n';
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (strict && !r.converged) throw NumericalError("l1 solver did not converge");
  return 0;
}

int cmd_export(const std::string& volume, const std::string& scenario, const std::string& out,
               const std::string& prefix, bool full) {
  const Scenario s = load_scenario(scenario);
  ExportOptions eo;
  eo.full_tensor = full;
  const auto files = export_figures(read_image(volume), s, out, prefix, eo);
  for (const auto& f : files) std::cout << f << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electromagnetic imaging in a rectangular waveguide"};
  app.require_subcommand(1);

  auto* scen = app.add_subcommand("scenario", "Scenario files");
  scen->require_subcommand(1);
  std::string path;
  auto* validate_cmd = scen->add_subcommand("validate", "Check a scenario file, one line per violation");
  validate_cmd->add_option("path", path)->required();
  std::string preset_name, preset_out;
  auto* preset_cmd = scen->add_subcommand("preset", "Write a built-in scenario (point, shell, anisotropic)");
  preset_cmd->add_option("name", preset_name)->required();
  preset_cmd->add_option("--out", preset_out, "Output JSON path (stdout if omitted)");

  std::string csv;
  int list = -1;
  auto* modes_cmd = app.add_subcommand("modes", "Propagating mode table");
  modes_cmd->add_option("scenario", path)->required();
  modes_cmd->add_option("--csv", csv, "Write the full propagating table as CSV");
  modes_cmd->add_option("--list", list, "Rows to print (default: the mode budget)");

  std::string plane, out, variant;
  auto* field_cmd = app.add_subcommand("field", "Reference field magnitudes on a plane");
  field_cmd->add_option("scenario", path)->required();
  field_cmd->add_option("--plane", plane, "x1=<c>, x2=<c> or x3=<c>")->required();
  field_cmd->add_option("--out", out)->required();
  field_cmd->add_option("--variant", variant, "terminating or infinite (default from scenario)");

  std::uint64_t seed = 0;
  auto* greens_cmd = app.add_subcommand("greens-check", "Green tensor property checks");
  greens_cmd->add_option("scenario", path)->required();
  greens_cmd->add_option("--seed", seed, "Seed for the sampled point pairs")->default_val(7);

  std::optional<double> snr;
  auto* synth_cmd = app.add_subcommand("synthesize", "Born data for the scenario's reflector");
  synth_cmd->add_option("scenario", path)->required();
  synth_cmd->add_option("--out", out)->required();
  synth_cmd->add_option("--csv", csv, "Also write a CSV copy");
  synth_cmd->add_option("--noise-snr", snr, "Add complex Gaussian noise at this SNR (dB)");
  synth_cmd->add_option("--seed", seed, "Noise seed");
  synth_cmd->add_option("--variant", variant);

  std::string data, param;
  bool full_export = false;
  auto* rtm_cmd = app.add_subcommand("rtm", "Reverse-time-migration image");
  rtm_cmd->add_option("scenario", path)->required();
  rtm_cmd->add_option("--data", data)->required();
  rtm_cmd->add_option("--out", out)->required();
  rtm_cmd->add_option("--param", param, "isotropic, diagonal or full");
  rtm_cmd->add_option("--variant", variant);
  rtm_cmd->add_flag("--export-full", full_export, "Export off-diagonal channels of a full-tensor image");

  std::string matrix;
  std::optional<double> eps, eps_rel, lambda;
  int max_iter = 20000;
  double tol = 1e-12;
  bool nonneg = false, strict = false, rebuild = false;
  auto* l1_cmd = app.add_subcommand("l1", "Sparse reconstruction on the l1 grid");
  l1_cmd->add_option("scenario", path)->required();
  l1_cmd->add_option("--data", data)->required();
  l1_cmd->add_option("--matrix", matrix, "Sensing matrix cache (built when absent)")->required();
  l1_cmd->add_option("--epsilon", eps, "Absolute residual bound");
  l1_cmd->add_option("--epsilon-rel", eps_rel, "Residual bound relative to ||d|| (default 1e-8)");
  l1_cmd->add_option("--lambda", lambda, "Penalized form with this lambda");
  l1_cmd->add_option("--max-iter", max_iter);
  l1_cmd->add_option("--tol", tol);
  l1_cmd->add_flag("--nonneg", nonneg);
  l1_cmd->add_flag("--strict", strict, "Exit 2 when the solver does not converge");
  l1_cmd->add_flag("--rebuild-matrix", rebuild);
  l1_cmd->add_option("--out", out)->required();
  l1_cmd->add_option("--param", param);
  l1_cmd->add_option("--variant", variant);

  std::string stages;
  auto* run_cmd = app.add_subcommand("run", "Full pipeline with a manifest");
  run_cmd->add_option("scenario", path)->required();
  run_cmd->add_option("--out", out)->required();
  run_cmd->add_option("--stages", stages, "Comma-separated subset of modes,synthesize,rtm,l1,export");
  run_cmd->add_option("--noise-snr", snr);
  run_cmd->add_option("--seed", seed);
  run_cmd->add_option("--epsilon-rel", eps_rel);
  run_cmd->add_flag("--rebuild-matrix", rebuild);

  std::string volume, prefix = "image";
  auto* export_cmd = app.add_subcommand("export", "Paper-style slices of an image volume");
  export_cmd->add_option("volume", volume)->required();
  export_cmd->add_option("--scenario", path)->required();
  export_cmd->add_option("--out", out)->required();
  export_cmd->add_option("--prefix", prefix);
  export_cmd->add_flag("--export-full", full_export);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    apply_thread_cap();
    if (*validate_cmd) return cmd_validate(path);
    if (*preset_cmd) {
      const auto [s, r] = preset(preset_from_string(preset_name));
      Scenario full = s;
      full.reflector = r;
      if (preset_out.empty()) {
        std::cout << to_json(full).dump(2) << '\n';
      } else {
        write_scenario(full, preset_out);
      }
      return 0;
    }
    if (*modes_cmd) return cmd_modes(path, csv, list);
    if (*field_cmd) return cmd_field(path, plane, out, variant);
    if (*greens_cmd) return cmd_greens(path, seed);
    if (*synth_cmd) return cmd_synthesize(path, out, csv, snr, seed, variant);
    if (*rtm_cmd) return cmd_rtm(path, data, out, param, variant, full_export);
    if (*l1_cmd)
      return cmd_l1(path, data, matrix, eps, eps_rel, lambda, max_iter, tol, nonneg, strict, out, param, variant,
                    rebuild);
    if (*run_cmd) {
      PipelineOptions po;
      po.out_dir = out;
      std::stringstream ss(stages);
      for (std::string st; std::getline(ss, st, ',');)
        if (!st.empty()) po.stages.push_back(st);
      po.noise_snr_db = snr;
      po.seed = seed;
      if (eps_rel) po.epsilon_rel = *eps_rel;
      po.rebuild_matrix = rebuild;
      const RunManifest m = run_pipeline(path, po);
      std::cout << "manifest: " << (fs::path(out) / "manifest.json").string() << " (" << m.files.size()
                << " files)\n";
      return 0;
    }
    if (*export_cmd) return cmd_export(volume, path, out, prefix, full_export);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
