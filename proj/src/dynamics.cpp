#include <cmath>

#include "upb/dynamics.hpp"

namespace upb {

void SystemParams::validate() const {
  if (!(kappa1 > 0) || !(kappa2 > 0)) throw std::invalid_argument("kappa1 and kappa2 must be positive");
  for (double v : {delta1, delta2, u1, u2, j_hop, kappa1, kappa2, f1.real(), f1.imag(), f2.real(), f2.imag()})
    if (!std::isfinite(v)) throw std::invalid_argument("system parameters must be finite");
}

SystemParams SystemParams::swapped() const {
  SystemParams s = *this;
  std::swap(s.delta1, s.delta2);
  std::swap(s.u1, s.u2);
  std::swap(s.f1, s.f2);
  std::swap(s.kappa1, s.kappa2);
  return s;
}

void BathParams::validate() const {
  if (!(n_th >= 0)) throw std::invalid_argument("n_th must be >= 0");
  if (!(dephasing_rate >= 0)) throw std::invalid_argument("dephasing_rate must be >= 0");
  if (!(cascade_efficiency >= 0 && cascade_efficiency <= 1))
    throw std::invalid_argument("cascade_efficiency must lie in [0,1]");
  if (squeeze_port != 1 && squeeze_port != 2) throw std::invalid_argument("squeeze_port must be 1 or 2");
  if (squeeze && cascade_efficiency > 0)
    throw std::invalid_argument("squeezed reservoir cannot be combined with cascade coupling");
}

double cascade_chi(const SystemParams& p, const BathParams& b) {
  return std::sqrt(b.cascade_efficiency * p.kappa1 * p.kappa2);
}

double Pulse::envelope(double t) const {
  const double x = (t - t0) / sigma_t;
  return std::exp(-0.5 * x * x);
}

void Pulse::validate() const {
  if (!(sigma_t > 0)) throw std::invalid_argument("pulse sigma_t must be positive");
}

void Liouvillian::apply(double t, const Vec& x, Vec& y) const {
  y.noalias() = gen * x;
  if (time_dependent && pulse) {
    const double e = pulse->envelope(t);
    if (e > 1e-300) y.noalias() += e * (drive * x);
  }
}

Operator build_hamiltonian(const SystemParams& p, const FockBasis& basis) {
  p.validate();
  const Mat a1 = mode_annihilation(basis, 1).mat;
  const Mat a2 = mode_annihilation(basis, 2).mat;
  const Mat a1d = a1.adjoint(), a2d = a2.adjoint();
  Mat H = p.delta1 * a1d * a1 + p.delta2 * a2d * a2;
  H += p.u1 * a1d * a1d * a1 * a1 + p.u2 * a2d * a2d * a2 * a2;
  H += p.j_hop * (a1d * a2 + a2d * a1);
  H += std::conj(p.f1) * a1 + p.f1 * a1d + std::conj(p.f2) * a2 + p.f2 * a2d;
  return {H, basis.tag()};
}

Operator build_nonhermitian(const SystemParams& p, const BathParams& b, const FockBasis& basis) {
  b.validate();
  Operator H = build_hamiltonian(p, basis);
  const Mat a1 = mode_annihilation(basis, 1).mat;
  const Mat a2 = mode_annihilation(basis, 2).mat;
  H.mat += -I * 0.5 * (p.kappa1 * a1.adjoint() * a1 + p.kappa2 * a2.adjoint() * a2);
  const double chi = cascade_chi(p, b);
  if (chi > 0) H.mat += -I * chi * a2.adjoint() * a1;
  return H;
}

static SpMat to_sparse(const Mat& m) {
  return m.sparseView(1.0, 1e-300);
}

static SpMat kron(const SpMat& A, const SpMat& B) {
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<size_t>(A.nonZeros() * B.nonZeros()));
  for (int ka = 0; ka < A.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(A, ka); ia; ++ia)
      for (int kb = 0; kb < B.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(B, kb); ib; ++ib)
          trip.emplace_back(ia.row() * B.rows() + ib.row(), ia.col() * B.cols() + ib.col(),
                            ia.value() * ib.value());
  SpMat K(A.rows() * B.rows(), A.cols() * B.cols());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

SpMat spre_post(const Mat& A, const Mat& B) {
  return kron(to_sparse(B.transpose()), to_sparse(A));
}

SpMat commutator_super(const Mat& H) {
  const Mat Id = Mat::Identity(H.rows(), H.cols());
  SpMat L = spre_post(H, Id) - spre_post(Id, H);
  return cplx(0, -1) * L;
}

SpMat lindblad_super(const Mat& c, double rate) {
  const Mat Id = Mat::Identity(c.rows(), c.cols());
  const Mat cdc = c.adjoint() * c;
  SpMat L = spre_post(c, c.adjoint()) - 0.5 * spre_post(cdc, Id) - 0.5 * spre_post(Id, cdc);
  return cplx(rate) * L;
}

// Loss, thermal and dephasing channels for one mode.
static SpMat mode_dissipation(const Mat& a, double kappa, double n_th, double dephasing) {
  SpMat L = lindblad_super(a, kappa * (n_th + 1.0));
  if (n_th > 0) L += lindblad_super(a.adjoint(), kappa * n_th);
  // -(eta/4)({n^2, rho} - 2 n rho n) is a Lindblad term in n with rate eta/2
  if (dephasing > 0) L += lindblad_super(a.adjoint() * a, 0.5 * dephasing);
  return L;
}

static SpMat squeeze_dissipation(const Mat& a, double kappa, cplx xi, SqueezeModel model) {
  const Mat Id = Mat::Identity(a.rows(), a.cols());
  const Mat ad = a.adjoint();
  const Mat a2 = a * a, ad2 = ad * ad;
  cplx M = xi;
  double N = 0;
  if (model == SqueezeModel::standard) {
    const double r = std::abs(xi), th = std::arg(xi);
    N = std::sinh(r) * std::sinh(r);
    M = std::polar(std::sinh(r) * std::cosh(r), th);
  }
  // kappa/2 M^* ({a^2, rho} - 2 a rho a) + kappa/2 M ({a^+2, rho} - 2 a^+ rho a^+)
  SpMat L = (0.5 * kappa * std::conj(M)) * (spre_post(a2, Id) + spre_post(Id, a2) - 2.0 * spre_post(a, a));
  L += (0.5 * kappa * M) * (spre_post(ad2, Id) + spre_post(Id, ad2) - 2.0 * spre_post(ad, ad));
  if (N > 0) {
    L += lindblad_super(a, kappa * N);
    L += lindblad_super(ad, kappa * N);
  }
  return L;
}

Liouvillian build_liouvillian(const SystemParams& p, const BathParams& b, const FockBasis& basis) {
  p.validate();
  b.validate();
  const Mat H = build_hamiltonian(p, basis).mat;
  const Mat a1 = mode_annihilation(basis, 1).mat;
  const Mat a2 = mode_annihilation(basis, 2).mat;
  Liouvillian L;
  L.tag = basis.tag();
  L.hilbert_dim = basis.size();
  L.gen = commutator_super(H);
  L.gen += mode_dissipation(a1, p.kappa1, b.n_th, b.dephasing_rate);
  L.gen += mode_dissipation(a2, p.kappa2, b.n_th, b.dephasing_rate);
  const double chi = cascade_chi(p, b);
  if (chi > 0) {
    // chi ([a1 rho, a2^+] + [a2, rho a1^+])
    const Mat Id = Mat::Identity(basis.size(), basis.size());
    const Mat a1d = a1.adjoint(), a2d = a2.adjoint();
    SpMat C = spre_post(a1, a2d) - spre_post(a2d * a1, Id) + spre_post(a2, a1d) - spre_post(Id, a1d * a2);
    L.gen += cplx(chi) * C;
  }
  if (b.squeeze) {
    const Mat& a = b.squeeze_port == 1 ? a1 : a2;
    const double k = b.squeeze_port == 1 ? p.kappa1 : p.kappa2;
    L.gen += squeeze_dissipation(a, k, *b.squeeze, b.squeeze_model);
  }
  L.gen.makeCompressed();
  L.drive.resize(L.gen.rows(), L.gen.cols());
  return L;
}

Liouvillian with_pulse(Liouvillian L, const Pulse& pulse) {
  pulse.validate();
  FockBasis basis(L.tag.cutoff, L.tag.cap2);
  const Mat a1 = mode_annihilation(basis, 1).mat;
  const Mat a2 = mode_annihilation(basis, 2).mat;
  const Mat Hd = std::conj(pulse.f1) * a1 + pulse.f1 * a1.adjoint() + std::conj(pulse.f2) * a2 +
                 pulse.f2 * a2.adjoint();
  L.drive = commutator_super(Hd);
  L.drive.makeCompressed();
  L.pulse = pulse;
  L.time_dependent = true;
  return L;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  v.back() = b;
  return v;
}

Trajectory evolve(const DensityMatrix& rho0, const Liouvillian& L, const std::vector<double>& t_grid,
                  const OdeOptions& opt) {
  if (!(rho0.tag() == L.tag)) throw std::invalid_argument("basis mismatch");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
  Trajectory tr;
  if (t_grid.empty()) return tr;
  const int d = L.hilbert_dim;
  tr.t = t_grid;
  tr.stats = propagate(L, vec(rho0.matrix()), t_grid.front(), t_grid, opt, [&](size_t, const Vec& x) {
    tr.states.emplace_back(unvec(x, d), L.tag, true);
  });
  return tr;
}

Trajectory evolve(const DensityMatrix& rho0, const Liouvillian& L, const Pulse& pulse,
                  const std::vector<double>& t_grid, const OdeOptions& opt) {
  return evolve(rho0, with_pulse(L, pulse), t_grid, opt);
}

SystemParams jc_as_system(const JcParams& jc) {
  SystemParams p;
  p.delta1 = jc.delta1;
  p.delta2 = 0.5 * jc.delta2;
  p.j_hop = jc.g;
  p.kappa1 = jc.kappa1;
  p.kappa2 = jc.kappa2;
  p.f1 = jc.f1;
  p.f2 = jc.f2;
  return p;
}

}  // namespace upb
