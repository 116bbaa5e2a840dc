#pragma once

#include <vector>

#include "wgi/forward_model.hpp"
#include "wgi/l1_solver.hpp"

namespace wgi {

/// Complex image on a voxel grid; values(voxel, channel).
struct ImageVolume {
  VoxelGrid grid;
  Parameterization param = Parameterization::isotropic;
  MatrixXc values;

  /// sqrt(sum_l |value_l|^2) per voxel.
  Eigen::VectorXd magnitude() const;
};

/// Receivers and components of d must match the model's array.
void check_data_layout(const ArrayModel& model, const DataVector& d);

/// Reverse-time-migration image
///   I_l(y) = E^o_l(y) sum_{r,q} [G^P((x_r,-L), y)]_{ql} conj(d_q(x_r)),
/// summed over l for isotropic unknowns; full gives all nine V_{lm} channels
/// (index 3 l + m). Equals conj(F^H d) / (k^2 vol) for the sensing matrix F.
ImageVolume rtm_image(const ArrayModel& model, const DataVector& d, const VoxelGrid& grid,
                      Parameterization p = Parameterization::isotropic);

struct L1Image {
  ImageVolume image;
  L1Report report;
};

/// l1 reconstruction of real voxel values from d with the given sensing matrix.
L1Image l1_reconstruct(const SensingMatrix& F, const DataVector& d, const L1Options& opts);

/// One plane through a volume: |value| of one channel (or the combined
/// magnitude when channel < 0) on the two remaining axes.
struct Slice {
  int axis = 0;       // normal axis, 0..2
  int index = 0;      // node index along the normal
  double coord = 0.0;
  std::vector<double> u, v;  // coordinates along the in-plane axes (ascending axis order)
  Eigen::MatrixXd values;    // u.size() x v.size()
};

/// Throws InputError when the plane misses the grid by more than half a pitch.
Slice extract_slice(const ImageVolume& img, int axis, double coord, int channel = -1);

/// Voxels whose combined magnitude is at least fraction * max.
std::vector<std::size_t> support_estimate(const ImageVolume& img, double fraction);

/// Largest local maximum (26-neighbourhood) of the combined magnitude other
/// than the global peak, relative to the peak. Zero if there is none.
double secondary_peak_ratio(const ImageVolume& img);

/// Index of the voxel with the largest combined magnitude.
std::size_t peak_voxel(const ImageVolume& img);

}  // namespace wgi
