#include "upb/squeezing.hpp"

#include <cmath>
#include <functional>

namespace upb {

void SqueezeParams::validate() const {
  if (!(r >= 0) || !(alpha_bar >= 0) || !(n_eff >= 0))
    throw std::invalid_argument("r, alpha_bar and n_eff must be non-negative");
}

std::vector<double> pn_distribution(const SqueezeParams& p, int n_max) {
  p.validate();
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  if (p.n_eff != 0) throw std::invalid_argument("pn_distribution needs a pure state (n_eff = 0)");
  if (p.r > 5) throw std::invalid_argument("r > 5 outside the supported range");
  const double ch = std::cosh(p.r), th = std::tanh(p.r);
  const cplx a = p.alpha(), eit = std::polar(1.0, p.theta);
  const cplx gamma = a * ch + std::conj(a) * eit * std::sinh(p.r);
  // normalized Hermite recurrence: amplitude_n = pref * u_n
  const cplx pref = std::exp(-0.5 * std::norm(a) - 0.5 * std::conj(a) * std::conj(a) * eit * th) / std::sqrt(ch);
  std::vector<double> out(n_max + 1);
  cplx um = 0, u = 1;
  for (int n = 0; n <= n_max; ++n) {
    out[n] = std::norm(pref * u);
    const cplx un = (gamma / ch * u - eit * th * std::sqrt(double(n)) * um) / std::sqrt(double(n + 1));
    um = u;
    u = un;
  }
  return out;
}

double p2(double ab, double r) {
  const double sech = 1.0 / std::cosh(r);
  const double b = std::sinh(2 * r) - 2 * ab * ab * std::exp(2 * r);
  return 0.125 * std::pow(sech, 5) * b * b * std::exp(-ab * ab * (1 + std::tanh(r)));
}

double alpha_opt(double r) {
  if (!(r >= 0)) throw std::invalid_argument("r must be non-negative");
  // expm1 keeps precision as r -> 0
  return 0.5 * std::exp(-2 * r) * std::sqrt(std::expm1(4 * r));
}

namespace {
// Thermal forms with the labels as usually printed: s = h cosh 2r - 1/2, p = h sinh 2r.
GaussianMoments printed_labels(double r, double n_eff) {
  const double h = n_eff + 0.5;
  return {h * std::sinh(2 * r), h * std::cosh(2 * r) - 0.5};
}
}  // namespace

GaussianMoments gaussian_moments(double r, double n_eff) {
  const GaussianMoments g = printed_labels(r, n_eff);
  // decide the labelling away from r = 0, where both agree
  const double rr = 0.5;
  const GaussianMoments pure = printed_labels(rr, 0.0);
  const double p0 = std::sinh(rr) * std::sinh(rr), s0 = std::sinh(rr) * std::cosh(rr);
  const double tol = 1e-12 * (1 + s0);
  if (std::abs(pure.p - p0) <= tol && std::abs(pure.s - s0) <= tol) return g;
  // labels fail the pure limit, swap them
  return {g.s, g.p};
}

double gaussian_occupancy(const SqueezeParams& p) {
  return p.alpha_bar * p.alpha_bar + gaussian_moments(p.r, p.n_eff).p;
}

double g2_gaussian(const SqueezeParams& sp) {
  sp.validate();
  const auto m = gaussian_moments(sp.r, sp.n_eff);
  const double a2 = sp.alpha_bar * sp.alpha_bar;
  const double n = a2 + m.p;
  if (!(n > 0)) throw std::invalid_argument("zero occupancy, g2 undefined");
  return 1 + (m.p * m.p + m.s * m.s + 2 * a2 * (m.p - m.s * std::cos(sp.theta - 2 * sp.phi))) / (n * n);
}

namespace {

// Minimize f on [lo, hi]: log-spaced scan (the objective is not unimodal) then golden section.
OptimalSqueeze scan_golden(const std::function<double(double)>& f, double hi) {
  std::vector<double> rs{0.0};
  const int ns = 400;
  const double lmin = -10, lmax = std::log10(hi);
  for (int i = 0; i < ns; ++i) rs.push_back(std::pow(10.0, lmin + (lmax - lmin) * i / (ns - 1)));
  rs.back() = hi;
  size_t k = 0;
  std::vector<double> v(rs.size());
  for (size_t i = 0; i < rs.size(); ++i) {
    v[i] = f(rs[i]);
    if (v[i] < v[k]) k = i;
  }
  double a = rs[k == 0 ? 0 : k - 1], b = rs[std::min(k + 1, rs.size() - 1)];
  const double gr = 0.5 * (std::sqrt(5.0) - 1);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-8 * std::max(1e-8, std::abs(c)) && b - a > 1e-16) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  OptimalSqueeze o;
  o.r_opt = 0.5 * (a + b);
  o.g2_min = f(o.r_opt);
  if (v[k] < o.g2_min) {
    o.r_opt = rs[k];
    o.g2_min = v[k];
  }
  return o;
}

}  // namespace

OptimalSqueeze optimal_r(double alpha_bar, double n_eff) {
  auto f = [&](double r) {
    SqueezeParams sp;
    sp.r = r;
    sp.alpha_bar = alpha_bar;
    sp.n_eff = n_eff;
    return g2_gaussian(sp);
  };
  return scan_golden(f, 5.0);
}

OptimalSqueeze optimal_g2_at_occupancy(double n_bar, double n_eff) {
  if (!(n_bar > 0)) throw std::invalid_argument("occupancy must be positive");
  const double h = n_eff + 0.5;
  // largest r with p(r) <= n_bar
  const double rmax = n_bar > n_eff ? 0.5 * std::acosh((n_bar + 0.5) / h) : 0.0;
  if (rmax <= 0) {
    SqueezeParams sp;
    sp.n_eff = n_eff;
    sp.alpha_bar = std::sqrt(std::max(n_bar - n_eff, 0.0));
    return {0.0, g2_gaussian(sp)};
  }
  auto f = [&](double r) {
    SqueezeParams sp;
    sp.r = r;
    sp.n_eff = n_eff;
    sp.alpha_bar = std::sqrt(std::max(n_bar - gaussian_moments(r, n_eff).p, 0.0));
    return g2_gaussian(sp);
  };
  return scan_golden(f, rmax);
}

FieldMoments field_moments(const DensityMatrix& rho, const Operator& a) {
  FieldMoments m;
  m.a = expectation(rho, a);
  m.a2 = expectation(rho, a * a);
  m.n = expectation(rho, a.adjoint() * a).real();
  return m;
}

SqueezeEstimate extract_squeeze(const FieldMoments& m) {
  const cplx M = m.a2 - m.a * m.a;
  const double Nd = m.n - std::norm(m.a);
  SqueezeEstimate e;
  e.r_printed = std::abs(M) + std::norm(m.a) - m.n;
  const double x = 2 * std::abs(M) / (2 * Nd + 1);
  e.r_variance = 0.5 * std::atanh(std::min(x, 1 - 1e-16));
  e.theta = std::arg(M);
  return e;
}

cplx lambda_eff(const SystemParams& p, cplx a1, cplx a2) {
  const double den = p.u2 * p.u2 * std::pow(std::norm(a2), 2) - std::norm(p.dt2());
  if (den == 0) throw std::invalid_argument("vanishing denominator in lambda_eff");
  return p.u1 * a1 * a1 - p.j_hop * p.j_hop / den * p.u2 * a2 * a2;
}

double lambda_to_r(cplx lambda, double kappa) { return 2 * std::abs(lambda) / kappa; }

double n_eff_from_purity(double P) {
  if (!(P > 0)) throw std::invalid_argument("purity must be positive");
  return (1 - P) / (2 * P);
}

}  // namespace upb
