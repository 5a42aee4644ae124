#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "upb/dynamics.hpp"
#include "upb/weakdrive.hpp"

namespace upb {

struct DeltaUOpt {
  double delta_plus = 0, delta_minus = 0;  // +/- detuning branches
  double u_opt = 0;                        // for the + branch
  double u_opt_minus = 0;                  // for the - branch
  double u_asymptote = 0;                  // 2 kappa^2 / (3 sqrt(3) J^2)
};

// Optimal detuning and nonlinearity of the symmetric dimer driven on mode 1.
DeltaUOpt delta_u_opt(double J, double kappa = 1.0);
// Inverse of U_opt(J) on the + branch, J > kappa/sqrt(2).
double j_for_u_opt(double U, double kappa = 1.0);
// Symmetric dimer at the optimum for the given U, drive on mode 1.
SystemParams upb_optimum(double U, cplx f1, double kappa = 1.0);

// Both branches of an optimal condition.
using Branches = std::array<cplx, 2>;

// Drive on the source mode that annihilates c02 in the cascaded dimer (J = 0).
Branches f1_opt_cascaded(const SystemParams& p, double chi);
// Printed coherent-coupling root for F1 (drive on both modes, J != 0).
Branches f1_opt_coherent(const SystemParams& p);
// Roots of c_target(F1) = 0, from the exact quadratic dependence of the target
// two-photon amplitude on F1.
Branches f1_opt_numeric(const SystemParams& p, int target_n, int target_m, double chi = 0.0);

struct JcOpt {
  double delta1_opt = 0;
  double g_opt = 0;   // positive branch, -g_opt is the other
};
JcOpt jc_opt(const JcParams& jc);
// Emitter drive that cancels c20 for given cavity drive.
Branches jc_f2_opt(const JcParams& jc);

enum class KerrMap { dispersive_jc, optomechanical };
double effective_kerr(KerrMap map, double g, double omega);

struct MinimizeSpec {
  std::vector<std::string> names;
  std::vector<double> lo, hi;
  std::vector<bool> log_scale;  // scan in log space when set
  int grid = 64;                // points per axis
  double rel_tol = 1e-4;
  int workers = 1;
};

struct MinimizeResult {
  std::vector<double> argmin;
  double value = 0;
  long evaluations = 0;
  std::vector<std::pair<std::vector<double>, double>> log;  // coarse scan samples
};

// Coarse grid scan followed by compass search. Deterministic.
MinimizeResult minimize_g2(const std::function<double(const std::vector<double>&)>& objective,
                           const MinimizeSpec& spec);

// Full-numerics g2 of mode 1 at the steady state.
double steady_g2(const SystemParams& p, const BathParams& bath, int cutoff, int mode = 1,
                 double* occupancy = nullptr);

// Scales |F1| (phase kept, F2 scaled along) so that the steady n_mode hits target within rel_tol.
SystemParams drive_for_occupancy(const SystemParams& p, const BathParams& bath, int cutoff, double target,
                                 int mode = 1, double rel_tol = 1e-3);

}  // namespace upb
