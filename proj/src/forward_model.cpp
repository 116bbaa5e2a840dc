#include "wgi/forward_model.hpp"

#include <random>
#include <sstream>

namespace wgi {

int channel_count(Parameterization p) {
  switch (p) {
    case Parameterization::isotropic: return 1;
    case Parameterization::diagonal: return 3;
    case Parameterization::full: return 9;
  }
  return 1;
}

const char* to_string(Parameterization p) {
  switch (p) {
    case Parameterization::isotropic: return "isotropic";
    case Parameterization::diagonal: return "diagonal";
    case Parameterization::full: return "full";
  }
  return "isotropic";
}

Parameterization parameterization_from_string(const std::string& s) {
  if (s == "isotropic") return Parameterization::isotropic;
  if (s == "diagonal") return Parameterization::diagonal;
  if (s == "full") return Parameterization::full;
  throw InputError("unknown parameterization '" + s + "' (isotropic, diagonal, full)");
}

Vec3 PotentialGrid::diagonal(std::size_t idx) const {
  if (param == Parameterization::isotropic) return Vec3::Constant(values[static_cast<Eigen::Index>(idx)]);
  return values.segment<3>(static_cast<Eigen::Index>(3 * idx));
}

std::vector<std::size_t> PotentialGrid::support() const {
  const std::size_t ch = static_cast<std::size_t>(channel_count(param));
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < grid.size(); ++v)
    for (std::size_t l = 0; l < ch; ++l)
      if (values[static_cast<Eigen::Index>(v * ch + l)] != 0.0) {
        out.push_back(v);
        break;
      }
  return out;
}

namespace {

std::size_t nearest_node(const VoxelGrid& grid, const Vec3& c) {
  std::array<int, 3> i{};
  for (int a = 0; a < 3; ++a) {
    i[a] = grid.nearest(a, c[a]);
    if (i[a] < 0) throw InputError("reflector lies outside the voxel grid");
  }
  return grid.index(i[0], i[1], i[2]);
}

bool in_closed(const Box& b, const Vec3& p, double tol) {
  return (p.array() >= b.min.array() - tol).all() && (p.array() <= b.max.array() + tol).all();
}

}  // namespace

PotentialGrid rasterize(const ReflectorSpec& r, const VoxelGrid& grid) {
  PotentialGrid pg;
  pg.grid = grid;
  if (grid.size() == 0) throw InputError("rasterize: empty voxel grid");
  if (const auto* p = std::get_if<PointReflector>(&r)) {
    pg.param = Parameterization::isotropic;
    pg.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    pg.values[static_cast<Eigen::Index>(nearest_node(grid, p->center))] = p->value;
  } else if (const auto* a = std::get_if<AnisotropicPointReflector>(&r)) {
    pg.param = Parameterization::diagonal;
    pg.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * grid.size()));
    pg.values.segment<3>(static_cast<Eigen::Index>(3 * nearest_node(grid, a->center))) = a->values;
  } else {
    const auto& s = std::get<ShellReflector>(r);
    pg.param = Parameterization::isotropic;
    pg.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    const double tol = 1e-9;
    bool hit = false;
    for (std::size_t v = 0; v < grid.size(); ++v) {
      const Vec3 c = grid.center(v);
      if (in_closed(s.outer, c, tol) && !s.inner.contains(c)) {
        pg.values[static_cast<Eigen::Index>(v)] = s.value;
        hit = true;
      }
    }
    if (!hit) throw InputError("rasterize: reflector covers no voxel of the grid");
  }
  return pg;
}

ModeSet illumination_set(const Scenario& s, const ModeSet& propagating) {
  if (!s.modes.include_evanescent) return propagating;
  auto entries = propagating.entries();
  for (const auto& m : full_set(s).entries())
    if (!m.propagating) entries.push_back(m);
  return ModeSet(s.geometry, s.k, std::move(entries));
}

ArrayModel::ArrayModel(const Scenario& s, Variant v, ModeSet modes)
    : scenario_(s),
      variant_(v),
      modes_(std::move(modes)),
      illum_(illumination_set(s, modes_)),
      amps_(compute_amplitudes(illum_, s.source, v)),
      receivers_(build_receiver_grid(s.array, s.geometry)),
      R_(wgi::receiver_matrix(modes_, receivers_, s.array.components)) {}

CVec3 ArrayModel::reference_field(const Vec3& y) const { return eval_reference_field(y, illum_, amps_); }

void ArrayModel::coupling(const Vec3& y, MatrixXc& K) const {
  array_coupling(modes_, variant_, scenario_.source.L, y, K);
}

VectorXc ArrayModel::array_trace(const std::vector<Vec3>& pos, const std::vector<CVec3>& currents,
                                 double vol) const {
  constexpr std::size_t kChunk = 64;
  const std::size_t n = pos.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  const auto nb = static_cast<Eigen::Index>(modes_.branch_count());
  std::vector<VectorXc> partial(chunks, VectorXc::Zero(nb));
#pragma omp parallel for schedule(static)
  for (long c = 0; c < static_cast<long>(chunks); ++c) {
    MatrixXc K;
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk, hi = std::min(n, lo + kChunk);
    for (std::size_t i = lo; i < hi; ++i) {
      coupling(pos[i], K);
      partial[static_cast<std::size_t>(c)] += K * currents[i];
    }
  }
  VectorXc acc = VectorXc::Zero(nb);
  for (const auto& p : partial) acc += p;
  const double k2 = scenario_.k * scenario_.k;
  return (k2 * vol) * (R_.cast<cplx>() * acc);
}

std::size_t sensing_matrix_bytes(const ArrayModel& model, const VoxelGrid& grid, Parameterization p) {
  const std::size_t cols = grid.size() * static_cast<std::size_t>(channel_count(p));
  const std::size_t rows = static_cast<std::size_t>(model.receiver_matrix().rows());
  return (rows + model.modes().branch_count()) * cols * sizeof(cplx);
}

SensingMatrix assemble_sensing_matrix(const ArrayModel& model, const VoxelGrid& grid, Parameterization p,
                                      const AssemblyOptions& opts) {
  if (p == Parameterization::full) throw InputError("sensing matrix supports isotropic or diagonal unknowns only");
  const std::size_t bytes = sensing_matrix_bytes(model, grid, p);
  if (bytes > opts.memory_budget_bytes) {
    std::ostringstream msg;
    msg << "sensing matrix needs " << bytes / (1 << 20) << " MiB, budget is " << opts.memory_budget_bytes / (1 << 20)
        << " MiB; coarsen the inversion grid";
    throw InputError(msg.str());
  }
  const Scenario& s = model.scenario();
  const int ch = channel_count(p);
  const double scale = s.k * s.k * grid.voxel_volume();
  const auto E = eval_reference_field(grid, model.illumination_modes(), model.amplitudes());
  MatrixXc T(static_cast<Eigen::Index>(model.modes().branch_count()), static_cast<Eigen::Index>(grid.size() * ch));
#pragma omp parallel
  {
    MatrixXc K;
#pragma omp for schedule(static)
    for (long v = 0; v < static_cast<long>(grid.size()); ++v) {
      const auto idx = static_cast<std::size_t>(v);
      model.coupling(grid.center(idx), K);
      if (ch == 1) {
        T.col(v) = scale * (K * E[idx]);
      } else {
        for (int l = 0; l < 3; ++l) T.col(3 * v + l) = (scale * E[idx][l]) * K.col(l);
      }
    }
  }
  SensingMatrix out;
  out.F.noalias() = model.receiver_matrix().cast<cplx>() * T;
  out.scenario_hash = scenario_hash(s);
  out.voxel_volume = grid.voxel_volume();
  out.mode_budget = static_cast<int>(model.modes().size());
  out.param = p;
  out.variant = model.variant();
  out.grid = grid;
  out.receivers = model.receivers();
  out.components = model.components();
  return out;
}

void add_noise(DataVector& d, double snr_db, std::uint64_t seed) {
  const auto n = d.values.size();
  if (n == 0) throw InputError("add_noise: empty data vector");
  const double rms = d.values.norm() / std::sqrt(static_cast<double>(n));
  const double sigma = rms * std::pow(10.0, -snr_db / 20.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    d.values[i] += sigma * cplx(re, im) / std::sqrt(2.0);
  }
  d.noise = NoiseRecord{snr_db, seed, sigma};
}

namespace {

DataVector empty_data(const ArrayModel& model) {
  DataVector d;
  d.receivers = model.receivers();
  d.components = model.components();
  return d;
}

}  // namespace

DataVector synthesize_data(const ArrayModel& model, const PotentialGrid& v) {
  const auto supp = v.support();
  std::vector<Vec3> pos(supp.size());
  std::vector<CVec3> cur(supp.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(supp.size()); ++i) {
    const auto idx = supp[static_cast<std::size_t>(i)];
    pos[static_cast<std::size_t>(i)] = v.grid.center(idx);
    cur[static_cast<std::size_t>(i)] = effective_source(v.diagonal(idx), model.reference_field(v.grid.center(idx)));
  }
  DataVector d = empty_data(model);
  d.values = model.array_trace(pos, cur, v.grid.voxel_volume());
  return d;
}

DataVector synthesize_data(const ArrayModel& model, const ReflectorSpec& r) {
  return synthesize_data(model, rasterize(r, model.scenario().synthesis.grid()));
}

BornSeriesResult born_series(const ArrayModel& model, const ReflectorSpec& r, const GridSpec& interior,
                             const BornSeriesOptions& opts) {
  if (opts.iterations < 1) throw InputError("born series: iterations must be >= 1");
  const Scenario& s = model.scenario();
  const auto pot = rasterize(r, interior.grid());
  const auto supp = pot.support();
  const std::size_t n = supp.size();
  const double vol = pot.grid.voxel_volume();
  std::vector<Vec3> pos(n);
  std::vector<Vec3> vd(n);
  VectorXc e0(static_cast<Eigen::Index>(3 * n));
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = pot.grid.center(supp[i]);
    vd[i] = pot.diagonal(supp[i]);
    e0.segment<3>(static_cast<Eigen::Index>(3 * i)) = model.reference_field(pos[i]);
  }
  Eigen::VectorXcd vdiag(static_cast<Eigen::Index>(3 * n));
  for (std::size_t i = 0; i < n; ++i) vdiag.segment<3>(static_cast<Eigen::Index>(3 * i)) = vd[i].cast<cplx>();

  BornSeriesResult res;
  VectorXc u = e0;
  if (opts.iterations > 1) {
    const ModeSet full = full_set(s);
    GreenOptions go;
    go.min_separation = 0.5 * std::min(pot.grid.pitch_cross(), pot.grid.pitch_range());
    const double scale = s.k * s.k * vol;
    MatrixXc A = MatrixXc::Zero(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(3 * n));
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(n); ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (static_cast<std::size_t>(i) == j) continue;
        A.block<3, 3>(3 * i, static_cast<Eigen::Index>(3 * j)) =
            scale * dyadic_green(pos[static_cast<std::size_t>(i)], pos[j], full, model.variant(), go);
      }
    int growing = 0;
    for (int m = 1; m < opts.iterations; ++m) {
      VectorXc next = e0 + A * vdiag.cwiseProduct(u);
      const double upd = (next - u).norm();
      if (!std::isfinite(upd)) throw NumericalError("born series: non-finite field iterate");
      if (!res.update_norms.empty() && upd > res.update_norms.back()) {
        if (++growing >= opts.divergence_patience)
          throw NumericalError("born series diverges: the update grew for " + std::to_string(growing) +
                               " consecutive iterations");
      } else {
        growing = 0;
      }
      res.update_norms.push_back(upd);
      u = std::move(next);
    }
  }
  std::vector<CVec3> cur(n);
  for (std::size_t i = 0; i < n; ++i)
    cur[i] = effective_source(vd[i], u.segment<3>(static_cast<Eigen::Index>(3 * i)));
  res.data = empty_data(model);
  res.data.values = model.array_trace(pos, cur, vol);
  return res;
}

}  // namespace wgi
