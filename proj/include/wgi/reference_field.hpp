#pragma once

#include <vector>

#include "wgi/modes.hpp"
#include "wgi/scenario.hpp"
#include "wgi/types.hpp"

namespace wgi {

/// How the longitudinal source projection <Phi^(3), J> enters the TM amplitudes.
///
/// `green_consistent` uses the factor i k/(2 k^2), which makes the reference
/// field identical to -i k G(x, x_s) p for the dyadic Green tensor.
/// `literal` keeps the printed i k/(2 lambda_n) factor. The two only differ for
/// sources with a longitudinal polarization component.
enum class TmSourceScaling { green_consistent, literal };

/// <Phi_n^(s), J> for the point dipole J = p delta(x - x_s).
double source_projection(const ModeEntry& m, int s, const SourceSpec& source);
double source_projection(int n1, int n2, int s, const SourceSpec& source, const WaveguideGeometry& g);

/// TE/TM mode amplitudes of the unperturbed field.
///
/// Stored as the per-mode source factors so that evaluation can combine the
/// exponentials e^{i beta (x3 + L)} etc. without overflow for evanescent modes.
class ModeAmplitudes {
 public:
  struct SourceFactors {
    cplx te;   // k <Phi1,J> / (2 beta ||Phi1||^2)
    cplx tm2;  // beta <Phi2,J> / (2 k ||Phi2||^2)
    cplx tm3;  // c <Phi3,J> / ||Phi3||^2, c per TmSourceScaling
  };

  ModeAmplitudes(const ModeSet& modes, double L, Variant variant, std::vector<SourceFactors> factors);

  Variant variant() const { return variant_; }
  double L() const { return L_; }
  std::size_t size() const { return factors_.size(); }
  const SourceFactors& factors(std::size_t i) const { return factors_[i]; }

  // Physical amplitudes of e^{+-i beta x3}; s = 1 (TE) or 2 (TM).
  cplx a_plus(std::size_t i, int s) const;
  cplx b_plus(std::size_t i, int s) const;
  cplx b_minus(std::size_t i, int s) const;

 private:
  std::vector<cplx> beta_;
  double L_;
  Variant variant_;
  std::vector<SourceFactors> factors_;
};

ModeAmplitudes compute_amplitudes(const ModeSet& modes, const SourceSpec& source, Variant variant,
                                  TmSourceScaling scaling = TmSourceScaling::green_consistent);

/// Axial coefficient functions of one mode: E^o = sum g1 Phi1 + g2 Phi2 + g3 Phi3.
struct AxialCoefficients {
  cplx g1, g2, g3;
  cplx dg1, dg2, dg3;
  cplx d2g1, d2g2, d2g3;
};

/// Throws InputError at x3 = -L.
AxialCoefficients axial_coefficients(const ModeSet& modes, const ModeAmplitudes& amps, std::size_t i, double x3);

/// E^o(x) summed over the retained modes.
CVec3 eval_reference_field(const Vec3& x, const ModeSet& modes, const ModeAmplitudes& amps);

/// E^o at every node of a grid lying strictly between the source plane and the
/// end wall. Ordering follows VoxelGrid::index.
std::vector<CVec3> eval_reference_field(const VoxelGrid& grid, const ModeSet& modes, const ModeAmplitudes& amps);

}  // namespace wgi
