#pragma once

#include <vector>

#include "upb/dynamics.hpp"

namespace upb {

struct SqueezeParams {
  double r = 0;
  double theta = 0;
  double alpha_bar = 0;
  double phi = 0;
  double n_eff = 0;

  cplx alpha() const { return std::polar(alpha_bar, phi); }
  void validate() const;
};

// |<n|D(alpha)S(xi)|0>|^2 for n = 0..n_max (n_eff must be 0).
std::vector<double> pn_distribution(const SqueezeParams& p, int n_max);

// Two-photon probability at theta = 2 phi = 0.
double p2(double alpha_bar, double r);
// Displacement that cancels the two-photon probability.
double alpha_opt(double r);

struct GaussianMoments {
  double p = 0;  // <da^+ da>
  double s = 0;  // |<da da>|
};
// Fluctuation moments of a squeezed thermal state. The pure limit n_eff = 0 must give
// p = sinh^2 r and s = sinh r cosh r; the labelling of the thermal forms is chosen to satisfy it.
GaussianMoments gaussian_moments(double r, double n_eff);

double g2_gaussian(const SqueezeParams& p);
double gaussian_occupancy(const SqueezeParams& p);

struct OptimalSqueeze {
  double r_opt = 0;
  double g2_min = 0;
};
// Minimum over r of g2 at fixed displacement, theta = 2 phi.
OptimalSqueeze optimal_r(double alpha_bar, double n_eff = 0);
// Minimum over r of g2 at fixed total occupancy alpha^2 + p(r).
OptimalSqueeze optimal_g2_at_occupancy(double n_bar, double n_eff = 0);

struct FieldMoments {
  cplx a;       // <a>
  cplx a2;      // <a^2>
  double n = 0; // <a^+ a>
};
FieldMoments field_moments(const DensityMatrix& rho, const Operator& a);

struct SqueezeEstimate {
  double r_printed = 0;   // |M| + |<a>|^2 - <a^+a>
  double r_variance = 0;  // atanh(2|M| / (2 N + 1)) / 2, exact for Gaussian states
  double theta = 0;       // arg M
};
SqueezeEstimate extract_squeeze(const FieldMoments& m);

cplx lambda_eff(const SystemParams& p, cplx alpha1, cplx alpha2);
// r ~ 2|lambda|/kappa
double lambda_to_r(cplx lambda, double kappa = 1.0);

double n_eff_from_purity(double purity);

}  // namespace upb
