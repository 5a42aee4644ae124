#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace upb {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
inline constexpr cplx I{0.0, 1.0};

// Numerical failure inside a solver (singular system, step underflow, ...).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Identifies the truncated space an operator or state lives in.
struct BasisTag {
  int cutoff = 0;
  int cap2 = -1;  // max occupation of mode 2, -1 for none
  bool operator==(const BasisTag&) const = default;
};

// Two-mode Fock states |n,m> with n+m <= cutoff, ordered by total excitation
// and then by n descending.
class FockBasis {
 public:
  explicit FockBasis(int cutoff, int mode2_cap = -1);

  int cutoff() const { return cutoff_; }
  int size() const { return static_cast<int>(states_.size()); }
  BasisTag tag() const { return {cutoff_, cap2_}; }
  const std::vector<std::pair<int, int>>& states() const { return states_; }
  const std::pair<int, int>& state(int k) const { return states_.at(k); }
  // -1 when (n,m) is outside the truncation
  int index(int n, int m) const;
  bool contains(int n, int m) const { return index(n, m) >= 0; }

 private:
  int cutoff_;
  int cap2_;
  std::vector<std::pair<int, int>> states_;
  std::vector<int> lookup_;  // (cutoff+1)^2 table, row n, column m
};

struct Operator {
  Mat mat;
  BasisTag tag;

  Operator adjoint() const { return {mat.adjoint(), tag}; }
  int dim() const { return static_cast<int>(mat.rows()); }
};

Operator operator*(const Operator& a, const Operator& b);
Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(cplx s, const Operator& a);

Operator mode_annihilation(const FockBasis& basis, int mode);
Operator identity(const FockBasis& basis);
Operator number(const FockBasis& basis, int mode);

struct StateCheck {
  double hermiticity = 0;  // ||rho - rho^+||_F / ||rho||_F
  double trace_error = 0;
  double min_eigenvalue = 0;
  bool ok = true;
};

class DensityMatrix {
 public:
  static constexpr double kHermTol = 1e-10;
  static constexpr double kTraceTol = 1e-8;
  static constexpr double kEigTol = 1e-8;

  // Throws std::invalid_argument when validate is set and an invariant fails.
  DensityMatrix(Mat m, BasisTag tag, bool validate = true);

  static DensityMatrix pure(const Vec& psi, BasisTag tag);
  static DensityMatrix vacuum(const FockBasis& basis);

  const Mat& matrix() const { return m_; }
  BasisTag tag() const { return tag_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  StateCheck check() const;

 private:
  Mat m_;
  BasisTag tag_;
};

StateCheck check_state(const Mat& m);

cplx expectation(const DensityMatrix& rho, const Operator& op);
std::vector<double> photon_distribution(const DensityMatrix& rho, const FockBasis& basis, int mode);
double purity(const DensityMatrix& rho);
// Reduced state of one mode, indexed by its occupation 0..cutoff.
Mat reduced_state(const DensityMatrix& rho, const FockBasis& basis, int mode);
// Population of the n+m = cutoff manifold.
double top_manifold_population(const DensityMatrix& rho, const FockBasis& basis);

}  // namespace upb
