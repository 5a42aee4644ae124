#include <Eigen/SparseLU>
#ifdef UPB_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <cmath>

#include "upb/dynamics.hpp"

namespace upb {

namespace {

// Replace row `row` of L by the trace functional and solve L' x = e_row.
std::optional<Vec> bordered_solve(const SpMat& L, int d, int row) {
  const int D = d * d;
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<size_t>(L.nonZeros() + d));
  for (int k = 0; k < L.outerSize(); ++k)
    for (SpMat::InnerIterator it(L, k); it; ++it)
      if (it.row() != row) trip.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < d; ++i) trip.emplace_back(row, i + i * d, 1.0);
  SpMat A(D, D);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
#ifdef UPB_HAVE_UMFPACK
  Eigen::UmfPackLU<SpMat> lu;
#else
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
#endif
  lu.compute(A);
  if (lu.info() != Eigen::Success) return std::nullopt;
  Vec rhs = Vec::Zero(D);
  rhs[row] = 1.0;
  Vec x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) return std::nullopt;
  // one step of iterative refinement
  Vec r = rhs - A * x;
  Vec dx = lu.solve(r);
  if (dx.allFinite()) x += dx;
  return x;
}

double rel_residual(const SpMat& L, const Vec& x) {
  const double nl = L.norm();
  return (L * x).norm() / (nl * x.norm());
}

Vec normalize_trace(const Vec& x, int d) {
  cplx tr = 0;
  for (int i = 0; i < d; ++i) tr += x[i + i * d];
  Mat m = unvec(x / tr, d);
  m = 0.5 * (m + m.adjoint());
  return vec(m);
}

}  // namespace

const char* steady_state_backend() {
#ifdef UPB_HAVE_UMFPACK
  return "bordered sparse LU (UMFPACK)";
#else
  return "bordered sparse LU (Eigen SparseLU, COLAMD)";
#endif
}

DensityMatrix steady_state(const Liouvillian& L, SteadyInfo* info, bool validate) {
  if (L.time_dependent) throw std::invalid_argument("steady_state needs a time-independent generator");
  const int d = L.hilbert_dim;
  SteadyInfo si;
  auto x1 = bordered_solve(L.gen, d, 0);
  std::optional<Vec> x2;
  if (d > 1) x2 = bordered_solve(L.gen, d, 1 + d);
  if (!x1 && !x2) throw SolverError("steady state: degenerate null space (bordered systems singular)");
  Vec x = x1 ? normalize_trace(*x1, d) : normalize_trace(*x2, d);
  if (x1 && x2) {
    Vec y = normalize_trace(*x2, d);
    si.bordering_delta = (x - y).norm();
    if (si.bordering_delta > 1e-6)
      throw SolverError("steady state: degenerate null space (borderings disagree by " +
                        std::to_string(si.bordering_delta) + ")");
  }
  si.residual = rel_residual(L.gen, x);
  if (si.residual > 1e-10) {
    // poor conditioning: relax by long-time integration from the direct solution
    si.used_fallback = true;
    OdeOptions o;
    o.rtol = 1e-10;
    o.atol = 1e-14;
    Vec cur = x;
    for (int round = 0; round < 8 && si.residual > 1e-10; ++round) {
      propagate(L, cur, 0.0, std::vector<double>{50.0}, o, [&](size_t, const Vec& v) { cur = v; });
      cur = normalize_trace(cur, d);
      si.residual = rel_residual(L.gen, cur);
    }
    x = cur;
    if (si.residual > 1e-10)
      throw SolverError("steady state did not converge, residual " + std::to_string(si.residual));
  }
  if (info) *info = si;
  return DensityMatrix(unvec(x, d), L.tag, validate);
}

}  // namespace upb
