#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wgi/greens.hpp"
#include "wgi/modes.hpp"
#include "wgi/reference_field.hpp"
#include "wgi/scenario.hpp"

namespace wgi {

/// Unknowns per voxel: one scalar (isotropic), the diagonal of V, or all nine
/// entries (imaging only).
enum class Parameterization { isotropic, diagonal, full };

int channel_count(Parameterization p);
const char* to_string(Parameterization p);
Parameterization parameterization_from_string(const std::string& s);

/// Potential sampled on a voxel grid; values are laid out voxel * channels + l.
struct PotentialGrid {
  VoxelGrid grid;
  Parameterization param = Parameterization::isotropic;
  Eigen::VectorXd values;

  /// Diagonal of V at voxel idx.
  Vec3 diagonal(std::size_t idx) const;
  /// Voxels with a nonzero entry, ascending.
  std::vector<std::size_t> support() const;
};

/// Throws InputError if the reflector misses every voxel of the grid. A zero
/// value is allowed and gives an empty support.
PotentialGrid rasterize(const ReflectorSpec& r, const VoxelGrid& grid);

/// V E^o for diagonal V.
inline CVec3 effective_source(const Vec3& v_diag, const CVec3& e) { return v_diag.cast<cplx>().cwiseProduct(e); }

/// Mode set driving the reference field: the first-arriving set, extended by
/// the evanescent pairs when the scenario asks for them.
ModeSet illumination_set(const Scenario& s, const ModeSet& propagating);

/// Everything needed to map voxel sources to array data:
/// d = k^2 vol R sum_y K(y) (V E^o)(y).
class ArrayModel {
 public:
  ArrayModel(const Scenario& s, Variant v, ModeSet modes);

  const Scenario& scenario() const { return scenario_; }
  Variant variant() const { return variant_; }
  const ModeSet& modes() const { return modes_; }
  const ModeSet& illumination_modes() const { return illum_; }
  const ModeAmplitudes& amplitudes() const { return amps_; }
  const std::vector<Vec2>& receivers() const { return receivers_; }
  const std::vector<int>& components() const { return scenario_.array.components; }
  const Eigen::MatrixXd& receiver_matrix() const { return R_; }

  CVec3 reference_field(const Vec3& y) const;
  /// K(y), branches x 3.
  void coupling(const Vec3& y, MatrixXc& K) const;
  /// Array data of the voxel currents u_i at positions y_i, weighted by k^2 vol.
  /// Summation order is fixed, so the result does not depend on thread count.
  VectorXc array_trace(const std::vector<Vec3>& pos, const std::vector<CVec3>& currents, double vol) const;

 private:
  Scenario scenario_;
  Variant variant_;
  ModeSet modes_;
  ModeSet illum_;
  ModeAmplitudes amps_;
  std::vector<Vec2> receivers_;
  Eigen::MatrixXd R_;
};

struct SensingMatrix {
  MatrixXc F;  // rows receiver * |Q| + q, columns voxel * channels + l
  std::uint64_t scenario_hash = 0;
  double voxel_volume = 0.0;
  int mode_budget = 0;
  Parameterization param = Parameterization::isotropic;
  Variant variant = Variant::terminating;
  VoxelGrid grid;
  std::vector<Vec2> receivers;
  std::vector<int> components;
};

struct AssemblyOptions {
  std::size_t memory_budget_bytes = std::size_t(4) << 30;
};

/// Bytes held while assembling F for this grid (F plus the branch factor).
std::size_t sensing_matrix_bytes(const ArrayModel& model, const VoxelGrid& grid, Parameterization p);

SensingMatrix assemble_sensing_matrix(const ArrayModel& model, const VoxelGrid& grid, Parameterization p,
                                      const AssemblyOptions& opts = {});

struct NoiseRecord {
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  double sigma = 0.0;
};

struct DataVector {
  std::vector<Vec2> receivers;
  std::vector<int> components;
  VectorXc values;  // receiver * |Q| + q
  std::optional<NoiseRecord> noise;
};

/// Circular complex Gaussian noise with sigma = rms(d) 10^(-snr/20).
void add_noise(DataVector& d, double snr_db, std::uint64_t seed);

/// Born data of a reflector sampled on the scenario's synthesis grid.
DataVector synthesize_data(const ArrayModel& model, const ReflectorSpec& r);
DataVector synthesize_data(const ArrayModel& model, const PotentialGrid& v);

struct BornSeriesOptions {
  int iterations = 1;       // number of field iterates used; 1 reproduces the Born data
  int divergence_patience = 2;  // consecutive growing updates before aborting
};

struct BornSeriesResult {
  DataVector data;
  std::vector<double> update_norms;  // ||u^(m+1) - u^(m)|| per iteration
};

/// Array trace of the field iterates u^(m+1) = E^o + L(V u^(m)), where L uses
/// the full tensor (propagating plus evanescent pairs), midpoint quadrature
/// and excludes the self voxel. Throws NumericalError on divergence.
BornSeriesResult born_series(const ArrayModel& model, const ReflectorSpec& r, const GridSpec& interior,
                             const BornSeriesOptions& opts = {});

}  // namespace wgi
