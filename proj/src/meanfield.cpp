#include <Eigen/Eigenvalues>
#include <cmath>

#include "upb/dynamics.hpp"

namespace upb {

Alpha mean_field_rhs(const SystemParams& p, const Alpha& a) {
  // returns d(alpha)/dt
  const cplx r1 = (p.dt1() + 2.0 * p.u1 * std::norm(a[0])) * a[0] + p.j_hop * a[1] + p.f1;
  const cplx r2 = (p.dt2() + 2.0 * p.u2 * std::norm(a[1])) * a[1] + p.j_hop * a[0] + p.f2;
  return {-I * r1, -I * r2};
}

std::vector<Alpha> mean_field_evolve(const SystemParams& p, const Alpha& alpha0, const std::vector<double>& t_grid) {
  p.validate();
  std::vector<Alpha> out;
  if (t_grid.empty()) return out;
  Eigen::VectorXcd y(2);
  y << alpha0[0], alpha0[1];
  OdeOptions o;
  o.rtol = 1e-10;
  o.atol = 1e-14;
  auto f = [&p](double, const Eigen::VectorXcd& x, Eigen::VectorXcd& dx) {
    auto r = mean_field_rhs(p, {x[0], x[1]});
    dx.resize(2);
    dx << r[0], r[1];
  };
  integrate_grid<Eigen::VectorXcd>(f, y, t_grid.front(), t_grid, o,
                                   [&](size_t, const Eigen::VectorXcd& x) { out.push_back({x[0], x[1]}); });
  return out;
}

namespace {

using V4 = Eigen::Vector4d;
using M4 = Eigen::Matrix4d;

V4 pack(const Alpha& a) { return {a[0].real(), a[0].imag(), a[1].real(), a[1].imag()}; }
Alpha unpack(const V4& v) { return {cplx(v[0], v[1]), cplx(v[2], v[3])}; }

V4 flow(const SystemParams& p, const V4& v) { return pack(mean_field_rhs(p, unpack(v))); }

M4 jacobian(const SystemParams& p, const V4& v) {
  M4 J;
  for (int k = 0; k < 4; ++k) {
    V4 e = v;
    const double h = 1e-7 * std::max(1.0, std::abs(v[k]));
    e[k] += h;
    V4 em = v;
    em[k] -= h;
    J.col(k) = (flow(p, e) - flow(p, em)) / (2 * h);
  }
  return J;
}

}  // namespace

MeanFieldResult mean_field_fixed_points(const SystemParams& p) {
  p.validate();
  MeanFieldResult res;
  // linear (U = 0) solution as the anchor start
  Eigen::Matrix2cd M;
  M << p.dt1(), p.j_hop, p.j_hop, p.dt2();
  Eigen::Vector2cd lin = M.fullPivLu().solve(Eigen::Vector2cd(-p.f1, -p.f2));
  const double scale = std::max(std::abs(p.f1) + std::abs(p.f2), 1e-300);

  std::vector<V4> starts;
  for (double s : {1.0, 0.5, 2.0, 0.1, 4.0, 8.0}) starts.push_back(pack({s * lin[0], s * lin[1]}));
  for (int k = 0; k < 8; ++k) {
    const double ph = 2 * M_PI * k / 8.0;
    const double mag = (k % 2 ? 3.0 : 1.0) * std::max(std::abs(lin[0]), std::abs(lin[1])) + 1e-3;
    starts.push_back(pack({std::polar(mag, ph), std::polar(mag, ph + 1.0)}));
  }

  for (const V4& s : starts) {
    V4 x = s;
    double fn = flow(p, x).norm();
    for (int it = 0; it < 200 && fn > 1e-14 * scale; ++it) {
      const M4 J = jacobian(p, x);
      V4 dx = J.fullPivLu().solve(-flow(p, x));
      if (!dx.allFinite()) break;
      double lam = 1.0;
      bool moved = false;
      for (int k = 0; k < 30; ++k, lam *= 0.5) {
        V4 xn = x + lam * dx;
        const double fnn = flow(p, xn).norm();
        if (fnn < fn) {
          x = xn;
          fn = fnn;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (!(fn <= 1e-10 * scale)) continue;
    const Alpha a = unpack(x);
    bool dup = false;
    for (const auto& b : res.branches)
      if (std::abs(b.alpha[0] - a[0]) + std::abs(b.alpha[1] - a[1]) <=
          1e-7 * (std::abs(a[0]) + std::abs(a[1]) + 1e-300))
        dup = true;
    if (dup) continue;
    MeanFieldBranch br;
    br.alpha = a;
    br.residual = fn;
    Eigen::EigenSolver<M4> es(jacobian(p, x));
    br.stable = es.eigenvalues().real().maxCoeff() < 0;
    res.branches.push_back(br);
  }
  if (res.branches.empty()) throw SolverError("mean-field Newton did not converge from any start");
  // stable branches first, then by |alpha_1|
  std::stable_sort(res.branches.begin(), res.branches.end(), [](const auto& a, const auto& b) {
    if (a.stable != b.stable) return a.stable;
    return std::abs(a.alpha[0]) < std::abs(b.alpha[0]);
  });
  res.multistable = res.branches.size() > 1;
  return res;
}

Operator displaced_annihilation(const FockBasis& basis, int mode, cplx alpha) {
  Operator a = mode_annihilation(basis, mode);
  a.mat += alpha * Mat::Identity(basis.size(), basis.size());
  return a;
}

Liouvillian build_fluctuation_liouvillian(const SystemParams& p, const BathParams& b, const Alpha& alpha,
                                          const FockBasis& basis, FluctuationVariant variant) {
  p.validate();
  b.validate();
  if (b.cascade_efficiency > 0 || b.squeeze)
    throw std::invalid_argument("fluctuation frame supports loss, thermal and dephasing baths only");
  const int d = basis.size();
  const Mat Id = Mat::Identity(d, d);
  const Mat a1 = mode_annihilation(basis, 1).mat;
  const Mat a2 = mode_annihilation(basis, 2).mat;
  Mat H = Mat::Zero(d, d);
  const double delta[2] = {p.delta1, p.delta2};
  const double u[2] = {p.u1, p.u2};
  const Mat* ops[2] = {&a1, &a2};
  for (int j = 0; j < 2; ++j) {
    const Mat& a = *ops[j];
    const Mat ad = a.adjoint();
    const cplx al = alpha[j];
    H += (delta[j] + 4.0 * u[j] * std::norm(al)) * ad * a;
    H += u[j] * (std::conj(al) * std::conj(al) * a * a + al * al * ad * ad);
    if (variant == FluctuationVariant::exact) {
      H += u[j] * ad * ad * a * a;
      H += 2.0 * u[j] * (std::conj(al) * ad * a * a + al * ad * ad * a);
    }
  }
  H += p.j_hop * (a1.adjoint() * a2 + a2.adjoint() * a1);

  Liouvillian L;
  L.tag = basis.tag();
  L.hilbert_dim = d;
  L.gen = commutator_super(H);
  const double kap[2] = {p.kappa1, p.kappa2};
  for (int j = 0; j < 2; ++j) {
    const Mat& a = *ops[j];
    L.gen += lindblad_super(a, kap[j] * (b.n_th + 1.0));
    if (b.n_th > 0) L.gen += lindblad_super(a.adjoint(), kap[j] * b.n_th);
    if (b.dephasing_rate > 0) {
      // dephasing acts on the full field number operator
      const Mat A = a + alpha[j] * Id;
      L.gen += lindblad_super(A.adjoint() * A, 0.5 * b.dephasing_rate);
    }
  }
  L.gen.makeCompressed();
  L.drive.resize(L.gen.rows(), L.gen.cols());
  return L;
}

}  // namespace upb
