#include "upb/fock.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace upb {

FockBasis::FockBasis(int cutoff, int mode2_cap) : cutoff_(cutoff), cap2_(mode2_cap) {
  if (cutoff < 0) throw std::invalid_argument("cutoff must be non-negative");
  const int w = cutoff + 1;
  lookup_.assign(static_cast<size_t>(w * w), -1);
  for (int t = 0; t <= cutoff; ++t) {
    for (int n = t; n >= 0; --n) {
      const int m = t - n;
      if (cap2_ >= 0 && m > cap2_) continue;
      lookup_[n * w + m] = static_cast<int>(states_.size());
      states_.emplace_back(n, m);
    }
  }
}

int FockBasis::index(int n, int m) const {
  if (n < 0 || m < 0 || n + m > cutoff_) return -1;
  return lookup_[n * (cutoff_ + 1) + m];
}

static void require_same(const BasisTag& a, const BasisTag& b) {
  if (!(a == b)) throw std::invalid_argument("basis mismatch");
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same(a.tag, b.tag);
  return {a.mat * b.mat, a.tag};
}
Operator operator+(const Operator& a, const Operator& b) {
  require_same(a.tag, b.tag);
  return {a.mat + b.mat, a.tag};
}
Operator operator-(const Operator& a, const Operator& b) {
  require_same(a.tag, b.tag);
  return {a.mat - b.mat, a.tag};
}
Operator operator*(cplx s, const Operator& a) { return {s * a.mat, a.tag}; }

Operator mode_annihilation(const FockBasis& basis, int mode) {
  if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
  const int d = basis.size();
  Mat a = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    auto [n, m] = basis.state(k);
    if (mode == 1 && n > 0) a(basis.index(n - 1, m), k) = std::sqrt(double(n));
    if (mode == 2 && m > 0) a(basis.index(n, m - 1), k) = std::sqrt(double(m));
  }
  return {a, basis.tag()};
}

Operator identity(const FockBasis& basis) {
  return {Mat::Identity(basis.size(), basis.size()), basis.tag()};
}

Operator number(const FockBasis& basis, int mode) {
  auto a = mode_annihilation(basis, mode);
  return a.adjoint() * a;
}

StateCheck check_state(const Mat& m) {
  StateCheck c;
  const double norm = m.norm();
  c.hermiticity = norm > 0 ? (m - m.adjoint()).norm() / norm : 0.0;
  c.trace_error = std::abs(m.trace() - cplx(1.0));
  Mat h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  c.ok = c.hermiticity <= DensityMatrix::kHermTol && c.trace_error <= DensityMatrix::kTraceTol &&
         c.min_eigenvalue >= -DensityMatrix::kEigTol;
  return c;
}

DensityMatrix::DensityMatrix(Mat m, BasisTag tag, bool validate) : m_(std::move(m)), tag_(tag) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("density matrix must be square");
  if (!validate) return;
  auto c = check_state(m_);
  if (!c.ok)
    throw std::invalid_argument("invalid density matrix: herm=" + std::to_string(c.hermiticity) +
                                " trace_err=" + std::to_string(c.trace_error) +
                                " min_eig=" + std::to_string(c.min_eigenvalue));
}

DensityMatrix DensityMatrix::pure(const Vec& psi, BasisTag tag) {
  Vec v = psi / psi.norm();
  return DensityMatrix(v * v.adjoint(), tag);
}

DensityMatrix DensityMatrix::vacuum(const FockBasis& basis) {
  Mat m = Mat::Zero(basis.size(), basis.size());
  m(0, 0) = 1.0;
  return DensityMatrix(m, basis.tag(), false);
}

StateCheck DensityMatrix::check() const { return check_state(m_); }

cplx expectation(const DensityMatrix& rho, const Operator& op) {
  require_same(rho.tag(), op.tag);
  // Tr(op rho) without forming the product
  return (op.mat.transpose().cwiseProduct(rho.matrix())).sum();
}

std::vector<double> photon_distribution(const DensityMatrix& rho, const FockBasis& basis, int mode) {
  require_same(rho.tag(), basis.tag());
  if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
  std::vector<double> p(basis.cutoff() + 1, 0.0);
  for (int k = 0; k < basis.size(); ++k) {
    auto [n, m] = basis.state(k);
    p[mode == 1 ? n : m] += rho.matrix()(k, k).real();
  }
  return p;
}

double purity(const DensityMatrix& rho) {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  return rho.matrix().squaredNorm();
}

Mat reduced_state(const DensityMatrix& rho, const FockBasis& basis, int mode) {
  require_same(rho.tag(), basis.tag());
  const int w = basis.cutoff() + 1;
  Mat r = Mat::Zero(w, w);
  const auto& m = rho.matrix();
  for (int i = 0; i < basis.size(); ++i) {
    auto [ni, mi] = basis.state(i);
    for (int j = 0; j < basis.size(); ++j) {
      auto [nj, mj] = basis.state(j);
      if (mode == 1 && mi == mj) r(ni, nj) += m(i, j);
      if (mode == 2 && ni == nj) r(mi, mj) += m(i, j);
    }
  }
  return r;
}

double top_manifold_population(const DensityMatrix& rho, const FockBasis& basis) {
  double p = 0;
  for (int k = 0; k < basis.size(); ++k) {
    auto [n, m] = basis.state(k);
    if (n + m == basis.cutoff()) p += rho.matrix()(k, k).real();
  }
  return p;
}

}  // namespace upb
