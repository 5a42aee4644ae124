#include "upb/iomix.hpp"

#include <cmath>

namespace upb {

MixingSpec MixingSpec::from_stokes(double gamma0, double theta_out, double phi_out) {
  if (!(gamma0 >= 0)) throw std::invalid_argument("gamma0 must be non-negative");
  return {gamma0 * std::cos(0.5 * theta_out), gamma0 * std::sin(0.5 * theta_out) * std::polar(1.0, phi_out)};
}

std::pair<cplx, cplx> stokes_drive(double f0, double theta_in, double phi_in) {
  if (!(f0 >= 0)) throw std::invalid_argument("F0 must be non-negative");
  return {f0 * std::cos(0.5 * theta_in), f0 * std::sin(0.5 * theta_in) * std::polar(1.0, phi_in)};
}

Operator mixed_operator(const FockBasis& basis, const MixingSpec& mix) {
  return mix.gamma1 * mode_annihilation(basis, 1) + mix.gamma2 * mode_annihilation(basis, 2);
}

namespace {

void fill_printed(OutputMoments& o, const WeakDriveAmplitudes& c, const MixingSpec& mix) {
  const cplx g1 = mix.gamma1, g2 = mix.gamma2;
  const double r2 = std::sqrt(2.0);
  const cplx c10 = c.at(1, 0), c01 = c.at(0, 1), c20 = c.at(2, 0), c02 = c.at(0, 2), c11 = c.at(1, 1);
  o.n_out_printed = std::norm(g1 * g1 * c10 + g2 * g2 * c01);
  o.g2_out_printed = (std::norm(g1 * g1 * c20 + g1 * g2 * r2 * c11) + std::norm(g2 * g2 * c02 + g1 * g2 * r2 * c11) +
                      std::norm(g1 * g1 * c20 + g2 * g2 * c02)) /
                     (o.n_out_printed * o.n_out_printed);
  o.n_out_lead = std::norm(g1 * c10 + g2 * c01);
  o.g2_out_lead = std::norm(output_two_photon_amplitude(c, mix)) / (o.n_out_lead * o.n_out_lead);
}

}  // namespace

OutputMoments output_moments(const DensityMatrix& rho, const FockBasis& basis, const MixingSpec& mix) {
  const Operator b = mixed_operator(basis, mix);
  OutputMoments o;
  o.n_out = expectation(rho, b.adjoint() * b).real();
  if (!(o.n_out > 0)) throw std::invalid_argument("zero output occupancy");
  o.g2_out = g2_zero(rho, b);
  return o;
}

OutputMoments output_moments(const WeakDriveAmplitudes& c, const MixingSpec& mix) {
  Vec psi(c.basis.size());
  for (int k = 0; k < c.basis.size(); ++k) psi[k] = c.c[k];
  auto rho = DensityMatrix::pure(psi, c.basis.tag());
  OutputMoments o = output_moments(rho, c.basis, mix);
  fill_printed(o, c, mix);
  return o;
}

cplx output_two_photon_amplitude(const WeakDriveAmplitudes& c, const MixingSpec& mix) {
  const cplx g1 = mix.gamma1, g2 = mix.gamma2;
  const double r2 = std::sqrt(2.0);
  return r2 * g1 * g1 * c.at(2, 0) + 2.0 * g1 * g2 * c.at(1, 1) + r2 * g2 * g2 * c.at(0, 2);
}

Branches gamma1_opt(const SystemParams& p, cplx gamma2) {
  if (p.delta1 != p.delta2 || p.u1 != p.u2 || p.kappa1 != p.kappa2)
    throw std::invalid_argument("gamma1_opt requires identical cavities");
  const cplx D = p.dt1();
  const double U = p.u1;
  const cplx F1 = p.f1, F2 = p.f2;
  if (F1 == cplx(0)) throw std::invalid_argument("F1 must be nonzero");
  const cplx root = std::sqrt(F1 * F1 * F2 * F2 * (2.0 * D + U) * U);
  const cplx lead = F1 * F2 * (D + U);
  const cplx den = F1 * F1 * D;
  return {gamma2 * (root - lead) / den, gamma2 * (-root - lead) / den};
}

Branches gamma1_opt_numeric(const SystemParams& p, cplx gamma2) {
  const auto c = solve_manifolds(p, 2);
  const double r2 = std::sqrt(2.0);
  // sqrt2 c20 x^2 + 2 c11 x + sqrt2 c02 = 0 with x = gamma1 / gamma2
  const cplx A = r2 * c.at(2, 0), B = 2.0 * c.at(1, 1), C = r2 * c.at(0, 2);
  if (std::abs(A) < 1e-300) throw SolverError("degenerate output condition (c20 = 0)");
  const cplx disc = std::sqrt(B * B - 4.0 * A * C);
  return {gamma2 * (-B + disc) / (2.0 * A), gamma2 * (-B - disc) / (2.0 * A)};
}

SymmetricIoOpt symmetric_io_opt(const SystemParams& p) {
  if (p.delta1 != p.delta2 || p.u1 != p.u2 || p.kappa1 != p.kappa2)
    throw std::invalid_argument("symmetric_io_opt requires identical cavities");
  const cplx D = p.dt1();
  const double U = p.u1;
  const cplx root = std::sqrt((2.0 * D + U) * U);
  SymmetricIoOpt o;
  o.gamma1 = {(root - (D + U)) / D, (-root - (D + U)) / D};
  o.f1 = o.gamma1;
  return o;
}

std::vector<double> output_g2_tau(const SystemParams& p, const BathParams& bath, const FockBasis& basis,
                                  const MixingSpec& mix, const std::vector<double>& tau_grid) {
  Liouvillian L = build_liouvillian(p, bath, basis);
  DensityMatrix rho = steady_state(L);
  return g2_tau(L, rho, mixed_operator(basis, mix), tau_grid);
}

}  // namespace upb
