#include "wgi/reference_field.hpp"

#include "modal_grid.hpp"

namespace wgi {

double source_projection(const ModeEntry& m, int s, const SourceSpec& source) {
  if (s < 1 || s > m.multiplicity) return 0.0;
  return mode_shapes<double>(m, source.position)[s - 1].dot(source.polarization);
}

double source_projection(int n1, int n2, int s, const SourceSpec& source, const WaveguideGeometry& g) {
  return eigenfunction<double>(n1, n2, s, source.position, g).dot(source.polarization);
}

ModeAmplitudes::ModeAmplitudes(const ModeSet& modes, double L, Variant variant, std::vector<SourceFactors> factors)
    : L_(L), variant_(variant), factors_(std::move(factors)) {
  beta_.reserve(modes.size());
  for (const auto& m : modes.entries()) beta_.push_back(m.beta);
}

namespace {

cplx tm_sum(const ModeAmplitudes::SourceFactors& f) { return f.tm2 + f.tm3; }

}  // namespace

cplx ModeAmplitudes::a_plus(std::size_t i, int s) const {
  const cplx eL = std::exp(kI * beta_[i] * L_);
  return -(s == 1 ? factors_[i].te : tm_sum(factors_[i])) * eL;
}

cplx ModeAmplitudes::b_plus(std::size_t i, int s) const {
  if (variant_ == Variant::infinite) return 0.0;
  return -a_plus(i, s);
}

cplx ModeAmplitudes::b_minus(std::size_t i, int s) const {
  const cplx eL = std::exp(kI * beta_[i] * L_);
  const cplx emL = std::exp(-kI * beta_[i] * L_);
  const auto& f = factors_[i];
  if (variant_ == Variant::infinite) return s == 1 ? -f.te * emL : (f.tm3 - f.tm2) * emL;
  if (s == 1) return f.te * (eL - emL);
  return f.tm2 * (eL - emL) + f.tm3 * (eL + emL);
}

ModeAmplitudes compute_amplitudes(const ModeSet& modes, const SourceSpec& source, Variant variant,
                                  TmSourceScaling scaling) {
  const double k = modes.k();
  std::vector<ModeAmplitudes::SourceFactors> f(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    const auto shapes = mode_shapes<double>(m, source.position);
    const double w1 = shapes[0].dot(source.polarization) / m.norm2[0];
    f[i].te = k * w1 / (2.0 * m.beta);
    if (m.multiplicity == 3) {
      const double w2 = shapes[1].dot(source.polarization) / m.norm2[1];
      const double w3 = shapes[2].dot(source.polarization) / m.norm2[2];
      const cplx c3 = scaling == TmSourceScaling::green_consistent ? kI / (2.0 * k) : kI * k / (2.0 * m.lambda);
      f[i].tm2 = m.beta * w2 / (2.0 * k);
      f[i].tm3 = c3 * w3;
    }
  }
  return ModeAmplitudes(modes, source.L, variant, std::move(f));
}

AxialCoefficients axial_coefficients(const ModeSet& modes, const ModeAmplitudes& amps, std::size_t i, double x3) {
  const double L = amps.L();
  if (x3 == -L) throw InputError("reference field is singular on the source plane x3 = -L");
  const auto& m = modes[i];
  const auto& f = amps.factors(i);
  const cplx beta = m.beta;
  const cplx ib = kI * beta;
  const bool term = amps.variant() == Variant::terminating;
  const cplx tm = f.tm2 + f.tm3;
  const cplx r = kI * m.lambda / beta;  // Phi3 weight relative to Phi2 for e^{-i beta x3}

  AxialCoefficients c{};
  if (x3 > -L) {
    const cplx ep = std::exp(ib * (x3 + L));
    const cplx em = term ? std::exp(ib * (L - x3)) : cplx(0.0);
    c.g1 = f.te * (em - ep);
    c.dg1 = -ib * f.te * (em + ep);
    c.g2 = tm * (em - ep);
    c.dg2 = -ib * tm * (em + ep);
    c.g3 = r * tm * (ep + em);
    c.dg3 = r * tm * ib * (ep - em);
  } else {
    const cplx direct = std::exp(-ib * (x3 + L));
    const cplx image = term ? std::exp(ib * (L - x3)) : cplx(0.0);
    c.g1 = f.te * (image - direct);
    c.g2 = f.tm2 * (image - direct) + f.tm3 * (image + direct);
    c.g3 = r * c.g2;
    c.dg1 = -ib * c.g1;
    c.dg2 = -ib * c.g2;
    c.dg3 = -ib * c.g3;
  }
  const cplx b2 = beta * beta;
  c.d2g1 = -b2 * c.g1;
  c.d2g2 = -b2 * c.g2;
  c.d2g3 = -b2 * c.g3;
  if (m.multiplicity == 1) c.g2 = c.g3 = c.dg2 = c.dg3 = c.d2g2 = c.d2g3 = 0.0;
  return c;
}

namespace {

void check_point(const Vec3& x, const ModeSet& modes, const ModeAmplitudes& amps) {
  const auto& g = modes.geometry();
  if (x[0] < 0.0 || x[0] > g.L1 || x[1] < 0.0 || x[1] > g.L2)
    throw InputError("reference field: point outside the waveguide cross-section");
  if (amps.variant() == Variant::terminating && x[2] > 0.0)
    throw InputError("reference field: point beyond the end wall x3 = 0");
  if (amps.size() != modes.size()) throw InputError("reference field: amplitudes do not match the mode set");
}

}  // namespace

CVec3 eval_reference_field(const Vec3& x, const ModeSet& modes, const ModeAmplitudes& amps) {
  check_point(x, modes, amps);
  CVec3 e = CVec3::Zero();
  const Vec2 xt = x.head<2>();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto c = axial_coefficients(modes, amps, i, x[2]);
    const auto p = mode_shapes<double>(modes[i], xt);
    e += c.g1 * p[0].cast<cplx>() + c.g2 * p[1].cast<cplx>() + c.g3 * p[2].cast<cplx>();
  }
  return e;
}

std::vector<CVec3> eval_reference_field(const VoxelGrid& grid, const ModeSet& modes, const ModeAmplitudes& amps) {
  if (grid.size() == 0) return {};
  check_point(grid.center(0, 0, 0), modes, amps);
  check_point(grid.center(grid.n1() - 1, grid.n2() - 1, grid.n3() - 1), modes, amps);
  const int n3 = grid.n3();
  std::vector<cplx> coef(modes.size() * n3 * 3);
  for (std::size_t p = 0; p < modes.size(); ++p)
    for (int i3 = 0; i3 < n3; ++i3) {
      const auto c = axial_coefficients(modes, amps, p, grid.coord(2, i3));
      cplx* dst = coef.data() + (p * n3 + i3) * 3;
      dst[0] = c.g1;
      dst[1] = c.g2;
      dst[2] = c.g3;
    }
  return detail::modal_field_on_grid(grid, modes, coef);
}

}  // namespace wgi
