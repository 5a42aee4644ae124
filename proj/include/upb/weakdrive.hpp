#pragma once

#include <string>
#include <vector>

#include "upb/dynamics.hpp"

namespace upb {

// Coefficients c_nm of the truncated pure state sum c_nm |n,m>, with c_00 = 1.
struct WeakDriveAmplitudes {
  FockBasis basis{0};
  std::vector<cplx> c;
  std::vector<std::string> warnings;

  int order() const { return basis.cutoff(); }
  // zero for states outside the truncation
  cplx at(int n, int m) const;
};

// Steady-state amplitudes of the non-Hermitian dynamics, solved manifold by
// manifold. The cascade adds -i chi a2^+ a1 to the effective Hamiltonian.
WeakDriveAmplitudes solve_manifolds(const SystemParams& p, int order = 2, double chi = 0.0);

// Symmetric single-drive dimer (equal detunings, nonlinearities and losses, F2 = 0).
WeakDriveAmplitudes closed_form_single_drive(const SystemParams& p);

struct WeakObservables {
  double n1 = 0, n2 = 0;
  double g2_1 = 0, g2_2 = 0;
  // leading-order forms
  double n1_lead = 0, n2_lead = 0;
  double g2_1_lead = 0, g2_2_lead = 0;
};

WeakObservables observables(const WeakDriveAmplitudes& c);

// Conventional single Kerr mode at weak drive, |Dt|^2 / |Dt + U|^2 for H = U a^+2 a^2.
double kerr_g2_weak(double delta, double u, double kappa);
// The commonly quoted |Dt|^4 / |Dt (2U + Dt)|^2, which equals kerr_g2_weak at 2U.
double kerr_g2_quoted(double delta, double u, double kappa);

// Cavity (mode 1) plus two-level emitter (mode 2 capped at one excitation).
WeakDriveAmplitudes jc_solve(const JcParams& jc, int order = 2);

}  // namespace upb
