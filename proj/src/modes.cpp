#include "wgi/modes.hpp"

#include <algorithm>
#include <sstream>

namespace wgi {

int multiplicity(int n1, int n2) { return n1 * n2 == 0 ? 1 : 3; }

double eigenvalue(int n1, int n2, const WaveguideGeometry& g) {
  if (n1 < 0 || n2 < 0 || (n1 == 0 && n2 == 0)) throw InputError("eigenvalue: index (0,0) is excluded");
  const double a = kPi * n1 / g.L1;
  const double b = kPi * n2 / g.L2;
  return a * a + b * b;
}

cplx axial_wavenumber(double k, double lambda, double cutoff_tol) {
  if (!(k > 0.0) || !(lambda > 0.0)) throw InputError("axial_wavenumber: k and lambda must be positive");
  const double k2 = k * k;
  if (std::abs(k2 - lambda) < cutoff_tol * k2) {
    std::ostringstream msg;
    msg << "mode at cutoff: lambda_n = " << lambda << " is within " << cutoff_tol << " k^2 of k^2 = " << k2;
    throw NumericalError(msg.str());
  }
  if (lambda < k2) return {std::sqrt(k2 - lambda), 0.0};
  return {0.0, std::sqrt(lambda - k2)};
}

double norm_squared(int n1, int n2, int s, const WaveguideGeometry& g) {
  const int m = multiplicity(n1, n2);
  if (s < 1 || s > m) throw InputError("norm_squared: branch s outside 1..m_n");
  const double area = g.L1 * g.L2;
  if (m == 1) return area / 2.0;
  if (s == 3) return area / 4.0;
  return eigenvalue(n1, n2, g) * area / 4.0;
}

ModeEntry make_mode(int n1, int n2, const WaveguideGeometry& g, double k, double cutoff_tol) {
  ModeEntry m;
  m.n1 = n1;
  m.n2 = n2;
  m.lambda = eigenvalue(n1, n2, g);
  m.beta = axial_wavenumber(k, m.lambda, cutoff_tol);
  m.multiplicity = multiplicity(n1, n2);
  for (int s = 1; s <= m.multiplicity; ++s) m.norm2[s - 1] = norm_squared(n1, n2, s, g);
  m.a = kPi * n1 / g.L1;
  m.b = kPi * n2 / g.L2;
  m.propagating = m.lambda < k * k;
  return m;
}

namespace {

template <typename F>
void for_each_pair_below(const WaveguideGeometry& g, double lambda_max, bool include_origin, F&& f) {
  const int max1 = static_cast<int>(std::floor(std::sqrt(lambda_max) * g.L1 / kPi)) + 1;
  const int max2 = static_cast<int>(std::floor(std::sqrt(lambda_max) * g.L2 / kPi)) + 1;
  for (int n1 = 0; n1 <= max1; ++n1)
    for (int n2 = 0; n2 <= max2; ++n2) {
      if (n1 == 0 && n2 == 0) {
        if (include_origin && 0.0 < lambda_max) f(0, 0);
        continue;
      }
      if (eigenvalue(n1, n2, g) < lambda_max) f(n1, n2);
    }
}

void sort_and_check(std::vector<ModeEntry>& v) {
  std::sort(v.begin(), v.end(), [](const ModeEntry& x, const ModeEntry& y) {
    if (x.lambda != y.lambda) return x.lambda < y.lambda;
    if (x.n1 != y.n1) return x.n1 < y.n1;
    return x.n2 < y.n2;
  });
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double l0 = v[i - 1].lambda;
    const double l1 = v[i].lambda;
    if (std::abs(l1 - l0) <= 1e-12 * std::max(std::abs(l0), std::abs(l1))) {
      std::ostringstream msg;
      msg << "eigenvalues of (" << v[i - 1].n1 << "," << v[i - 1].n2 << ") and (" << v[i].n1 << "," << v[i].n2
          << ") coincide (" << l0 << "); the cross-section aspect ratio yields a degenerate spectrum";
      throw NumericalError(msg.str());
    }
  }
}

}  // namespace

std::vector<ModeEntry> enumerate_modes(const WaveguideGeometry& g, double k, double lambda_max, double cutoff_tol) {
  std::vector<ModeEntry> v;
  for_each_pair_below(g, lambda_max, false, [&](int n1, int n2) { v.push_back(make_mode(n1, n2, g, k, cutoff_tol)); });
  sort_and_check(v);
  return v;
}

std::vector<ModeEntry> enumerate_propagating(const WaveguideGeometry& g, double k, double cutoff_tol) {
  return enumerate_modes(g, k, k * k, cutoff_tol);
}

std::size_t count_propagating(const WaveguideGeometry& g, double k) {
  std::size_t n = 0;
  for_each_pair_below(g, k * k, false, [&](int, int) { ++n; });
  return n;
}

std::size_t count_propagating_lattice_points(const WaveguideGeometry& g, double k) {
  std::size_t n = 0;
  for_each_pair_below(g, k * k, true, [&](int, int) { ++n; });
  return n;
}

std::vector<ModeEntry> select_first_arriving(const std::vector<ModeEntry>& list, int M) {
  if (M < 1) throw InputError("mode budget must be >= 1");
  if (static_cast<std::size_t>(M) > list.size())
    throw InputError("mode budget " + std::to_string(M) + " exceeds the " + std::to_string(list.size()) +
                     " available index pairs");
  return {list.begin(), list.begin() + M};
}

ModeSet::ModeSet(const WaveguideGeometry& g, double k, std::vector<ModeEntry> entries)
    : geometry_(g), k_(k), entries_(std::move(entries)) {
  offsets_.reserve(entries_.size());
  for (const auto& m : entries_) {
    offsets_.push_back(branch_count_);
    branch_count_ += static_cast<std::size_t>(m.multiplicity);
  }
}

ModeSet propagating_set(const Scenario& s, int budget) {
  auto all = enumerate_propagating(s.geometry, s.k, s.modes.cutoff_tolerance);
  return ModeSet(s.geometry, s.k, select_first_arriving(all, budget));
}

ModeSet propagating_set(const Scenario& s) { return propagating_set(s, s.modes.budget); }

ModeSet full_set(const Scenario& s) {
  const double lambda_max = s.modes.evanescent_cutoff * s.k * s.k;
  return ModeSet(s.geometry, s.k, enumerate_modes(s.geometry, s.k, lambda_max, s.modes.cutoff_tolerance));
}

}  // namespace wgi
