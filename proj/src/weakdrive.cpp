#include "upb/weakdrive.hpp"

#include <cmath>

namespace upb {

cplx WeakDriveAmplitudes::at(int n, int m) const {
  const int k = basis.index(n, m);
  return k < 0 ? cplx(0) : c[k];
}

namespace {

WeakDriveAmplitudes solve_general(const SystemParams& p, int order, double chi, int cap2) {
  p.validate();
  if (order < 2 || order > 6) throw std::invalid_argument("manifold order must lie in [2, 6]");
  WeakDriveAmplitudes out;
  out.basis = FockBasis(order, cap2);
  out.c.assign(out.basis.size(), cplx(0));
  out.c[0] = 1.0;
  if (std::abs(p.f1) > 0.1 * p.kappa1 || std::abs(p.f2) > 0.1 * p.kappa2)
    out.warnings.push_back("drive amplitude above 0.1 kappa, weak-drive expansion may be inaccurate");
  const cplx d1 = p.dt1(), d2 = p.dt2();
  const double u1 = p.u1, u2 = cap2 == 1 ? 0.0 : p.u2;
  const auto& B = out.basis;
  for (int t = 1; t <= order; ++t) {
    std::vector<int> rows;
    for (int n = t; n >= 0; --n)
      if (B.contains(n, t - n)) rows.push_back(n);
    const int k = static_cast<int>(rows.size());
    auto local = [&](int n) {
      for (int i = 0; i < k; ++i)
        if (rows[i] == n) return i;
      return -1;
    };
    Mat A = Mat::Zero(k, k);
    Vec b = Vec::Zero(k);
    for (int i = 0; i < k; ++i) {
      const int n = rows[i], m = t - n;
      A(i, i) = double(n) * d1 + double(m) * d2 + double(n * (n - 1)) * u1 + double(m * (m - 1)) * u2;
      if (n >= 1) b[i] -= p.f1 * std::sqrt(double(n)) * out.at(n - 1, m);
      if (m >= 1) b[i] -= p.f2 * std::sqrt(double(m)) * out.at(n, m - 1);
      // hopping couples (n,m) to (n-1,m+1) and (n+1,m-1)
      if (n >= 1) {
        const int j = local(n - 1);
        if (j >= 0) A(i, j) += p.j_hop * std::sqrt(double(n * (m + 1)));
      }
      if (m >= 1) {
        const int j = local(n + 1);
        if (j >= 0) {
          A(i, j) += p.j_hop * std::sqrt(double(m * (n + 1)));
          A(i, j) += -I * chi * std::sqrt(double((n + 1) * m));
        }
      }
    }
    Eigen::FullPivLU<Mat> lu(A);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300)
      throw SolverError("singular manifold block at order " + std::to_string(t));
    Vec x = lu.solve(b);
    for (int i = 0; i < k; ++i) out.c[B.index(rows[i], t - rows[i])] = x[i];
  }
  return out;
}

}  // namespace

WeakDriveAmplitudes solve_manifolds(const SystemParams& p, int order, double chi) {
  if (chi < 0) throw std::invalid_argument("chi must be non-negative");
  return solve_general(p, order, chi, -1);
}

WeakDriveAmplitudes closed_form_single_drive(const SystemParams& p) {
  p.validate();
  if (p.delta1 != p.delta2 || p.u1 != p.u2 || p.kappa1 != p.kappa2 || p.f2 != cplx(0))
    throw std::invalid_argument("closed form requires a symmetric dimer driven on mode 1 only");
  const cplx D = p.dt1();
  const double U = p.u1, J = p.j_hop;
  const cplx F = p.f1;
  const cplx jd = J * J - D * D;
  const cplx q = D * (U + D) - J * J;
  if (std::abs(jd) == 0 || std::abs(q) == 0 || std::abs(U + D) == 0)
    throw SolverError("closed form has a vanishing denominator");
  WeakDriveAmplitudes out;
  out.basis = FockBasis(2);
  out.c.assign(6, cplx(0));
  out.c[0] = 1.0;
  const double r2 = std::sqrt(2.0);
  const cplx s = 2 * r2 * (U + D) * (D * D - J * J) * q;
  out.c[out.basis.index(1, 0)] = F * D / jd;
  out.c[out.basis.index(0, 1)] = -F * J / jd;
  out.c[out.basis.index(2, 0)] = F * F * (J * J * U + 2.0 * D * D * (U + D)) / s;
  out.c[out.basis.index(0, 2)] = F * F * J * J * (U + 2.0 * D) / s;
  out.c[out.basis.index(1, 1)] = F * F * J * (U + 2.0 * D) / (2.0 * jd * q);
  return out;
}

WeakObservables observables(const WeakDriveAmplitudes& c) {
  WeakObservables o;
  double g1 = 0, g2 = 0;
  for (int k = 0; k < c.basis.size(); ++k) {
    auto [n, m] = c.basis.state(k);
    const double p = std::norm(c.c[k]);
    o.n1 += n * p;
    o.n2 += m * p;
    g1 += double(n * (n - 1)) * p;
    g2 += double(m * (m - 1)) * p;
  }
  if (!(o.n1 > 0) && !(o.n2 > 0)) throw std::invalid_argument("zero occupancy, g2 undefined");
  o.g2_1 = o.n1 > 0 ? g1 / (o.n1 * o.n1) : NAN;
  o.g2_2 = o.n2 > 0 ? g2 / (o.n2 * o.n2) : NAN;
  o.n1_lead = std::norm(c.at(1, 0));
  o.n2_lead = std::norm(c.at(0, 1));
  o.g2_1_lead = o.n1_lead > 0 ? 2 * std::norm(c.at(2, 0)) / (o.n1_lead * o.n1_lead) : NAN;
  o.g2_2_lead = o.n2_lead > 0 ? 2 * std::norm(c.at(0, 2)) / (o.n2_lead * o.n2_lead) : NAN;
  return o;
}

double kerr_g2_weak(double delta, double u, double kappa) {
  const cplx D(delta, -0.5 * kappa);
  return std::norm(D) / std::norm(D + u);
}

double kerr_g2_quoted(double delta, double u, double kappa) {
  const cplx D(delta, -0.5 * kappa);
  return std::pow(std::abs(D), 4) / std::norm(D * (2.0 * u + D));
}

WeakDriveAmplitudes jc_solve(const JcParams& jc, int order) {
  return solve_general(jc_as_system(jc), order, 0.0, 1);
}

}  // namespace upb
