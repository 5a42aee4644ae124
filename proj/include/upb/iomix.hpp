#pragma once

#include <vector>

#include "upb/dynamics.hpp"
#include "upb/optimal.hpp"
#include "upb/weakdrive.hpp"

namespace upb {

// Detection mixing b = gamma1 a1 + gamma2 a2.
struct MixingSpec {
  cplx gamma1 = 1, gamma2 = 0;

  static MixingSpec from_stokes(double gamma0, double theta_out, double phi_out);
};

// Input drives in Stokes form: F1 = F0 cos(theta/2), F2 = F0 sin(theta/2) e^{i phi}.
std::pair<cplx, cplx> stokes_drive(double f0, double theta_in, double phi_in);

Operator mixed_operator(const FockBasis& basis, const MixingSpec& mix);

struct OutputMoments {
  double n_out = 0;
  double g2_out = 0;
  // weak-drive shortcut forms as usually printed, reported for comparison only
  double n_out_printed = NAN;
  double g2_out_printed = NAN;
  // leading-order forms from the amplitude expansion
  double n_out_lead = NAN;
  double g2_out_lead = NAN;
};

OutputMoments output_moments(const DensityMatrix& rho, const FockBasis& basis, const MixingSpec& mix);
OutputMoments output_moments(const WeakDriveAmplitudes& c, const MixingSpec& mix);

// Two-photon output amplitude sqrt2 g1^2 c20 + 2 g1 g2 c11 + sqrt2 g2^2 c02.
cplx output_two_photon_amplitude(const WeakDriveAmplitudes& c, const MixingSpec& mix);

// gamma1 that cancels the two-photon output amplitude (symmetric cavities, J = 0).
Branches gamma1_opt(const SystemParams& p, cplx gamma2);
// Same condition solved numerically on the weak-drive amplitudes, any J.
Branches gamma1_opt_numeric(const SystemParams& p, cplx gamma2);

struct SymmetricIoOpt {
  Branches gamma1;  // equal drives F1 = F2, gamma2 = 1
  Branches f1;      // equal outputs gamma1 = gamma2, F2 = 1
};
SymmetricIoOpt symmetric_io_opt(const SystemParams& p);

std::vector<double> output_g2_tau(const SystemParams& p, const BathParams& bath, const FockBasis& basis,
                                  const MixingSpec& mix, const std::vector<double>& tau_grid);

}  // namespace upb
