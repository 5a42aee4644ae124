#pragma once

#include <Eigen/Sparse>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "upb/fock.hpp"
#include "upb/ode.hpp"

namespace upb {

using SpMat = Eigen::SparseMatrix<cplx>;

// Rates and energies in units of a reference linewidth, hbar = 1.
struct SystemParams {
  double delta1 = 0, delta2 = 0;
  double u1 = 0, u2 = 0;
  double j_hop = 0;
  cplx f1 = 0, f2 = 0;
  double kappa1 = 1, kappa2 = 1;

  cplx dt1() const { return {delta1, -0.5 * kappa1}; }
  cplx dt2() const { return {delta2, -0.5 * kappa2}; }
  void validate() const;
  // mode 1 <-> mode 2
  SystemParams swapped() const;
};

enum class SqueezeModel { verbatim, standard };

struct BathParams {
  double n_th = 0;
  double dephasing_rate = 0;
  double cascade_efficiency = 0;  // one-way coupling efficiency, mode 1 feeds mode 2
  std::optional<cplx> squeeze;    // xi = r e^{i theta}
  int squeeze_port = 1;
  SqueezeModel squeeze_model = SqueezeModel::verbatim;

  void validate() const;
};

double cascade_chi(const SystemParams& p, const BathParams& b);

struct Pulse {
  cplx f1 = 0, f2 = 0;  // peak amplitude per port
  double sigma_t = 1;
  double t0 = 0;

  double envelope(double t) const;
  void validate() const;
};

// d vec(rho)/dt = (gen + env(t) drive) vec(rho), column-stacked vectorization.
struct Liouvillian {
  SpMat gen;
  SpMat drive;
  BasisTag tag;
  int hilbert_dim = 0;
  bool time_dependent = false;
  std::optional<Pulse> pulse;

  void apply(double t, const Vec& x, Vec& y) const;
};

Operator build_hamiltonian(const SystemParams& p, const FockBasis& basis);
// H - i sum kappa_j/2 n_j, plus -i chi a2^+ a1 when the cascade is enabled.
Operator build_nonhermitian(const SystemParams& p, const BathParams& b, const FockBasis& basis);
Liouvillian build_liouvillian(const SystemParams& p, const BathParams& b, const FockBasis& basis);
// Adds a Gaussian-envelope drive on top of the static generator.
Liouvillian with_pulse(Liouvillian L, const Pulse& pulse);

// Superoperator helpers.
SpMat spre_post(const Mat& A, const Mat& B);  // X -> A X B
SpMat commutator_super(const Mat& H);       // X -> -i[H, X]
SpMat lindblad_super(const Mat& c, double rate);

inline Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }
inline Mat unvec(const Vec& v, int d) { return Eigen::Map<const Mat>(v.data(), d, d); }

struct SteadyInfo {
  double residual = 0;          // ||L x|| / (||L||_F ||x||)
  double bordering_delta = 0;   // difference between two bordered solves
  bool used_fallback = false;
};

// validate = false skips the positivity check (the verbatim squeezed bath is not guaranteed positive).
DensityMatrix steady_state(const Liouvillian& L, SteadyInfo* info = nullptr, bool validate = true);
// Name of the sparse factorization in use.
const char* steady_state_backend();

struct Trajectory {
  std::vector<double> t;
  std::vector<DensityMatrix> states;
  OdeStats stats;
};

// Integrates from t_grid.front(); the first state equals rho0.
Trajectory evolve(const DensityMatrix& rho0, const Liouvillian& L, const std::vector<double>& t_grid,
                  const OdeOptions& opt = {});
Trajectory evolve(const DensityMatrix& rho0, const Liouvillian& L, const Pulse& pulse,
                  const std::vector<double>& t_grid, const OdeOptions& opt = {});

// Raw vector propagation; out(k, x) at each grid node.
template <class Out>
OdeStats propagate(const Liouvillian& L, const Vec& x0, double t0, const std::vector<double>& grid,
                   const OdeOptions& opt, Out&& out) {
  auto f = [&L](double t, const Vec& x, Vec& y) { L.apply(t, x, y); };
  return integrate_grid<Vec>(f, x0, t0, grid, opt, out);
}

OdeOptions regression_options();

// Regression theorem: g2(tau) = Tr[b^+b e^{L tau}(b rho b^+)] / <b^+b>^2.
std::vector<double> g2_tau(const Liouvillian& L, const DensityMatrix& rho_ss, const Operator& b,
                           const std::vector<double>& tau_grid);
std::vector<double> g2_tau_steady(const SystemParams& p, const BathParams& bath, const FockBasis& basis,
                                  int mode, const std::vector<double>& tau_grid);

// Equal-time g2 of operator b on a state.
double g2_zero(const DensityMatrix& rho, const Operator& b);

struct CorrelationGrid {
  std::vector<double> t;
  Eigen::MatrixXd G2;  // G2(i, j) = <b^+(t_i) b^+(t_j) b(t_j) b(t_i)>
  std::vector<double> n;
  std::optional<std::pair<double, double>> gate;
  std::vector<std::string> warnings;

  std::vector<double> g2_equal_time() const;
  // Time of the g2(t,t) minimum among nodes with n > rel * max n.
  double g2_min_time(double rel = 1e-3) const;
  double n_max_time() const;
};

CorrelationGrid two_time_g2(const Liouvillian& L, const DensityMatrix& rho0, const Operator& b,
                            const std::vector<double>& t_grid, int workers = 1);
CorrelationGrid two_time_g2(const SystemParams& p, const BathParams& bath, const FockBasis& basis,
                            const Pulse& pulse, const std::vector<double>& t_grid, int workers = 1);

double g2_pulse_integrated(const CorrelationGrid& grid,
                           std::optional<std::pair<double, double>> gate = std::nullopt);

std::vector<double> linspace(double a, double b, int n);

// Classical fields: i d(alpha_j)/dt = [Dt_j + 2 U_j |alpha_j|^2] alpha_j + J alpha_{3-j} + F_j.
using Alpha = std::array<cplx, 2>;

Alpha mean_field_rhs(const SystemParams& p, const Alpha& a);
std::vector<Alpha> mean_field_evolve(const SystemParams& p, const Alpha& alpha0, const std::vector<double>& t_grid);

struct MeanFieldBranch {
  Alpha alpha;
  double residual = 0;
  bool stable = false;
};

struct MeanFieldResult {
  std::vector<MeanFieldBranch> branches;
  bool multistable = false;
};

// Damped Newton from several deterministic starts; distinct roots are all reported.
MeanFieldResult mean_field_fixed_points(const SystemParams& p);

enum class FluctuationVariant { exact, linearized };

// Generator for fluctuations about alpha. Kerr terms expanded around alpha; the
// linearized variant keeps only terms up to second order in the fluctuation operators.
Liouvillian build_fluctuation_liouvillian(const SystemParams& p, const BathParams& b, const Alpha& alpha,
                                          const FockBasis& basis,
                                          FluctuationVariant variant = FluctuationVariant::exact);
// a_j + alpha_j on the fluctuation basis.
Operator displaced_annihilation(const FockBasis& basis, int mode, cplx alpha);

// Jaynes-Cummings variant on a basis with mode 2 capped at one excitation.
struct JcParams {
  double delta1 = 0, delta2 = 0;
  double g = 0;
  double kappa1 = 1, kappa2 = 1;
  cplx f1 = 0, f2 = 0;
};
// The emitter enters with detuning delta2/2 and hopping g.
SystemParams jc_as_system(const JcParams& jc);

}  // namespace upb
