#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "wgi/scenario.hpp"
#include "wgi/types.hpp"

namespace wgi {

struct ModeIndex {
  int n1 = 0;
  int n2 = 0;
  int s = 1;
};

/// One transverse eigenpair family of the rectangular cross-section.
struct ModeEntry {
  int n1 = 0;
  int n2 = 0;
  double lambda = 0.0;  // (pi n1/L1)^2 + (pi n2/L2)^2
  cplx beta;            // sqrt(k^2 - lambda), or i sqrt(lambda - k^2)
  int multiplicity = 1;
  std::array<double, 3> norm2{0.0, 0.0, 0.0};  // ||Phi^(s)||^2, zero for absent s
  double a = 0.0;  // pi n1 / L1
  double b = 0.0;  // pi n2 / L2
  bool propagating = false;
};

int multiplicity(int n1, int n2);

double eigenvalue(int n1, int n2, const WaveguideGeometry& g);

/// Throws NumericalError when |k^2 - lambda| < cutoff_tol * k^2.
cplx axial_wavenumber(double k, double lambda, double cutoff_tol = 1e-9);

double norm_squared(int n1, int n2, int s, const WaveguideGeometry& g);

ModeEntry make_mode(int n1, int n2, const WaveguideGeometry& g, double k, double cutoff_tol = 1e-9);

/// Phi^(1..3) of one mode from the four transverse trig factors
/// sin/cos(a x1), sin/cos(b x2). Absent branches come back as zero.
template <typename T>
void mode_shapes(const ModeEntry& m, T s1, T c1, T s2, T c2, Eigen::Matrix<T, 3, 1>& p1,
                 Eigen::Matrix<T, 3, 1>& p2, Eigen::Matrix<T, 3, 1>& p3) {
  using V = Eigen::Matrix<T, 3, 1>;
  const T a = static_cast<T>(m.a);
  const T b = static_cast<T>(m.b);
  if (m.multiplicity == 1) {
    p1 = m.n2 == 0 ? V(T(0), s1, T(0)) : V(s2, T(0), T(0));
    p2.setZero();
    p3.setZero();
    return;
  }
  p1 = V(b * c1 * s2, -a * s1 * c2, T(0));
  p2 = V(a * c1 * s2, b * s1 * c2, T(0));
  p3 = V(T(0), T(0), s1 * s2);
}

template <typename T>
std::array<Eigen::Matrix<T, 3, 1>, 3> mode_shapes(const ModeEntry& m, const Eigen::Matrix<T, 2, 1>& x) {
  using std::cos;
  using std::sin;
  const T u = static_cast<T>(m.a) * x.x();
  const T v = static_cast<T>(m.b) * x.y();
  std::array<Eigen::Matrix<T, 3, 1>, 3> out;
  mode_shapes<T>(m, sin(u), cos(u), sin(v), cos(v), out[0], out[1], out[2]);
  return out;
}

/// Phi_n^(s)(x); throws InputError for (0,0) or s outside 1..m_n.
template <typename T = double>
Eigen::Matrix<T, 3, 1> eigenfunction(int n1, int n2, int s, const Eigen::Matrix<T, 2, 1>& x,
                                     const WaveguideGeometry& g) {
  if (n1 < 0 || n2 < 0 || (n1 == 0 && n2 == 0)) throw InputError("eigenfunction: index (0,0) is excluded");
  if (s < 1 || s > multiplicity(n1, n2)) throw InputError("eigenfunction: branch s outside 1..m_n");
  ModeEntry m;
  m.n1 = n1;
  m.n2 = n2;
  m.multiplicity = multiplicity(n1, n2);
  m.a = kPi * n1 / g.L1;
  m.b = kPi * n2 / g.L2;
  return mode_shapes<T>(m, x)[s - 1];
}

/// Index pairs with lambda_n < k^2 (origin excluded), ascending lambda_n, ties
/// broken by (n1, n2). Aborts if two eigenvalues coincide.
std::vector<ModeEntry> enumerate_propagating(const WaveguideGeometry& g, double k, double cutoff_tol = 1e-9);

/// Propagating and evanescent pairs with lambda_n < lambda_max, same ordering.
std::vector<ModeEntry> enumerate_modes(const WaveguideGeometry& g, double k, double lambda_max,
                                       double cutoff_tol = 1e-9);

/// Number of index pairs in N^2_0 with lambda_n < k^2.
std::size_t count_propagating(const WaveguideGeometry& g, double k);

/// Lattice points n in N^2 (origin included) with lambda_n < k^2. The origin
/// carries no field, so this is count_propagating + 1; it is the convention
/// under which the 75%-aperture experiments quote their mode total.
std::size_t count_propagating_lattice_points(const WaveguideGeometry& g, double k);

/// First M entries of an ascending-lambda list (fastest modes first).
std::vector<ModeEntry> select_first_arriving(const std::vector<ModeEntry>& list, int M);

/// Retained modes with a flattened (pair, s) branch numbering.
class ModeSet {
 public:
  ModeSet(const WaveguideGeometry& g, double k, std::vector<ModeEntry> entries);

  const WaveguideGeometry& geometry() const { return geometry_; }
  double k() const { return k_; }
  const std::vector<ModeEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const ModeEntry& operator[](std::size_t i) const { return entries_[i]; }

  std::size_t branch_count() const { return branch_count_; }
  /// First branch of pair i; its branches are offset + 0 .. m_n - 1.
  std::size_t branch_offset(std::size_t i) const { return offsets_[i]; }

 private:
  WaveguideGeometry geometry_;
  double k_;
  std::vector<ModeEntry> entries_;
  std::vector<std::size_t> offsets_;
  std::size_t branch_count_ = 0;
};

/// The scenario's first-arriving propagating set.
ModeSet propagating_set(const Scenario& s);
ModeSet propagating_set(const Scenario& s, int budget);
/// Propagating plus evanescent pairs up to evanescent_cutoff * k^2.
ModeSet full_set(const Scenario& s);

}  // namespace wgi
