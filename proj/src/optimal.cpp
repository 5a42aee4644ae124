#include "upb/optimal.hpp"

#include <atomic>
#include <mutex>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <thread>

namespace upb {

DeltaUOpt delta_u_opt(double J, double kappa) {
  if (!(J > 0) || !(kappa > 0)) throw std::invalid_argument("J and kappa must be positive");
  const double den = 2 * (2 * J * J - kappa * kappa);
  if (std::abs(den) < 1e-14 * kappa * kappa)
    throw std::invalid_argument("2 J^2 = kappa^2: U_opt diverges (zero optimal detuning is unreachable)");
  const double k2 = kappa * kappa, j2 = J * J;
  const double inner = std::sqrt(9 * j2 * j2 + 8 * k2 * j2) - k2 - 3 * j2;
  const double d = 0.5 * std::sqrt(std::max(inner, 0.0));
  DeltaUOpt r;
  r.delta_plus = d;
  r.delta_minus = -d;
  r.u_opt = d * (4 * d * d + 5 * k2) / den;
  r.u_opt_minus = -r.u_opt;
  r.u_asymptote = 2 * k2 / (3 * std::sqrt(3.0) * j2);
  return r;
}

double j_for_u_opt(double U, double kappa) {
  if (!(U > 0)) throw std::invalid_argument("U must be positive");
  auto f = [&](double J) { return delta_u_opt(J, kappa).u_opt - U; };
  double lo = kappa / std::sqrt(2.0) * (1 + 1e-12), hi = kappa;
  while (f(hi) > 0) hi *= 2;
  boost::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
  return 0.5 * (r.first + r.second);
}

SystemParams upb_optimum(double U, cplx f1, double kappa) {
  const double J = j_for_u_opt(U, kappa);
  const auto o = delta_u_opt(J, kappa);
  SystemParams p;
  p.delta1 = p.delta2 = o.delta_plus;
  p.u1 = p.u2 = U;
  p.j_hop = J;
  p.f1 = f1;
  p.kappa1 = p.kappa2 = kappa;
  return p;
}

Branches f1_opt_cascaded(const SystemParams& p, double chi) {
  if (!(chi > 0)) throw std::invalid_argument("chi must be positive");
  const cplx D1 = p.dt1(), D2 = p.dt2(), Dt = D1 + D2, U1t = D1 + p.u1;
  const cplx den = (Dt + p.u1) * chi;
  if (std::abs(Dt + p.u1) == 0) throw std::invalid_argument("vanishing denominator");
  const cplx root = std::sqrt(p.u1 * U1t * Dt * D2);
  return {I * p.f2 * (Dt * U1t + root) / den, I * p.f2 * (Dt * U1t - root) / den};
}

Branches f1_opt_coherent(const SystemParams& p) {
  const double J = p.j_hop;
  if (J == 0) throw std::invalid_argument("J = 0: use the output-mixing condition instead");
  const cplx D1 = p.dt1(), D2 = p.dt2(), Dt = D1 + D2, U1t = D1 + p.u1;
  const cplx den = J * J * (Dt + p.u1);
  const cplx root = std::sqrt(p.f2 * p.f2 * J * J * p.u1 * (D2 * Dt * U1t - J * J * (Dt + p.u1)));
  const cplx lead = p.f2 * Dt * U1t * J;
  return {(lead + root) / den, (lead - root) / den};
}

Branches f1_opt_numeric(const SystemParams& p, int tn, int tm, double chi) {
  if (tn + tm != 2) throw std::invalid_argument("target must be a two-photon amplitude");
  const double s = std::max(std::abs(p.f2), 1e-3);
  auto c = [&](cplx f1) {
    SystemParams q = p;
    q.f1 = f1;
    return solve_manifolds(q, 2, chi).at(tn, tm);
  };
  const cplx c0 = c(0.0), cp = c(s), cm = c(-s);
  const cplx A = (cp + cm - 2.0 * c0) / (2 * s * s);
  const cplx B = (cp - cm) / (2 * s);
  if (std::abs(A) < 1e-300) {
    if (std::abs(B) < 1e-300) throw SolverError("target amplitude independent of F1");
    return {-c0 / B, -c0 / B};
  }
  const cplx disc = std::sqrt(B * B - 4.0 * A * c0);
  return {(-B + disc) / (2.0 * A), (-B - disc) / (2.0 * A)};
}

JcOpt jc_opt(const JcParams& jc) {
  if (!(jc.kappa2 > 0)) throw std::invalid_argument("kappa2 must be positive");
  JcOpt o;
  o.delta1_opt = -jc.delta2 * (jc.kappa1 + 2 * jc.kappa2) / (2 * jc.kappa2);
  o.g_opt = std::sqrt((jc.delta2 * jc.delta2 + jc.kappa2 * jc.kappa2) * (jc.kappa1 + jc.kappa2)) /
            (2 * std::sqrt(jc.kappa2));
  return o;
}

Branches jc_f2_opt(const JcParams& jc) {
  if (jc.g == 0) throw std::invalid_argument("g = 0: emitter drive condition undefined");
  const cplx D1(jc.delta1, -0.5 * jc.kappa1), D2(0.5 * jc.delta2, -0.5 * jc.kappa2);
  const cplx root = std::sqrt(D1 * (D1 + D2) - jc.g * jc.g);
  return {jc.f1 * (D1 + D2 + root) / jc.g, jc.f1 * (D1 + D2 - root) / jc.g};
}

double effective_kerr(KerrMap map, double g, double omega) {
  if (map == KerrMap::dispersive_jc) {
    if (omega == 0) throw std::invalid_argument("cavity-emitter detuning must be nonzero");
    return std::pow(g, 4) / std::pow(omega, 3);
  }
  if (!(omega > 0)) throw std::invalid_argument("mechanical frequency must be positive");
  return g * g / omega;
}

MinimizeResult minimize_g2(const std::function<double(const std::vector<double>&)>& objective,
                           const MinimizeSpec& spec) {
  const size_t dim = spec.names.size();
  if (dim == 0 || spec.lo.size() != dim || spec.hi.size() != dim)
    throw std::invalid_argument("minimize_g2: inconsistent bounds");
  std::vector<bool> lg = spec.log_scale;
  lg.resize(dim, false);
  for (size_t k = 0; k < dim; ++k) {
    if (!(spec.hi[k] > spec.lo[k])) throw std::invalid_argument("minimize_g2: empty box");
    if (lg[k] && !(spec.lo[k] > 0)) throw std::invalid_argument("minimize_g2: log axis needs positive bounds");
  }
  // internal coordinates u in [0,1]^dim
  auto to_x = [&](const std::vector<double>& u) {
    std::vector<double> x(dim);
    for (size_t k = 0; k < dim; ++k)
      x[k] = lg[k] ? std::exp(std::log(spec.lo[k]) + u[k] * (std::log(spec.hi[k]) - std::log(spec.lo[k])))
                   : spec.lo[k] + u[k] * (spec.hi[k] - spec.lo[k]);
    return x;
  };
  MinimizeResult res;
  auto eval = [&](const std::vector<double>& u) {
    auto x = to_x(u);
    try {
      return objective(x);
    } catch (const std::exception& e) {
      std::string msg = "objective failed at (";
      for (size_t k = 0; k < dim; ++k) msg += (k ? ", " : "") + spec.names[k] + "=" + std::to_string(x[k]);
      throw SolverError(msg + "): " + e.what());
    }
  };

  const int g = std::max(2, spec.grid);
  size_t total = 1;
  for (size_t k = 0; k < dim; ++k) total *= size_t(g);
  std::vector<std::vector<double>> pts(total, std::vector<double>(dim));
  for (size_t i = 0; i < total; ++i) {
    size_t r = i;
    for (size_t k = 0; k < dim; ++k) {
      pts[i][k] = double(r % g) / double(g - 1);
      r /= g;
    }
  }
  std::vector<double> vals(total);
  const int workers = std::max(1, spec.workers);
  if (workers == 1) {
    for (size_t i = 0; i < total; ++i) vals[i] = eval(pts[i]);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = next++; i < total; i = next++) {
          try {
            vals[i] = eval(pts[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lk(m);
            if (!err) err = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
  }
  size_t best = 0;
  for (size_t i = 0; i < total; ++i) {
    res.log.emplace_back(to_x(pts[i]), vals[i]);
    if (vals[i] < vals[best]) best = i;
  }
  res.evaluations = long(total);

  std::vector<double> u = pts[best];
  double f = vals[best];
  double step = 1.0 / double(g - 1);
  double since_halving = 0;
  int quiet_halvings = 0;
  while (step > 1e-7) {
    bool improved = false;
    for (size_t k = 0; k < dim && !improved; ++k)
      for (double sgn : {1.0, -1.0}) {
        std::vector<double> v = u;
        v[k] = std::clamp(v[k] + sgn * step, 0.0, 1.0);
        if (v[k] == u[k]) continue;
        const double fv = eval(v);
        ++res.evaluations;
        if (fv < f) {
          since_halving += f - fv;
          f = fv;
          u = v;
          improved = true;
          break;
        }
      }
    if (!improved) {
      quiet_halvings = since_halving < spec.rel_tol * std::abs(f) ? quiet_halvings + 1 : 0;
      if (quiet_halvings >= 4) break;
      since_halving = 0;
      step *= 0.5;
    }
  }
  res.argmin = to_x(u);
  res.value = f;
  return res;
}

double steady_g2(const SystemParams& p, const BathParams& bath, int cutoff, int mode, double* occupancy) {
  FockBasis basis(cutoff);
  auto L = build_liouvillian(p, bath, basis);
  auto rho = steady_state(L);
  auto a = mode_annihilation(basis, mode);
  if (occupancy) *occupancy = expectation(rho, a.adjoint() * a).real();
  return g2_zero(rho, a);
}

SystemParams drive_for_occupancy(const SystemParams& p, const BathParams& bath, int cutoff, double target,
                                 int mode, double rel_tol) {
  if (!(target > 0)) throw std::invalid_argument("target occupancy must be positive");
  if (p.f1 == cplx(0) && p.f2 == cplx(0)) throw std::invalid_argument("drive must be nonzero to rescale");
  auto occ = [&](double s) {
    SystemParams q = p;
    q.f1 *= s;
    q.f2 *= s;
    FockBasis basis(cutoff);
    auto rho = steady_state(build_liouvillian(q, bath, basis));
    return expectation(rho, number(basis, mode)).real();
  };
  // secant on log n versus log s
  double s0 = 1.0, n0 = occ(s0);
  double s1 = s0 * std::sqrt(target / n0), n1 = occ(s1);
  for (int it = 0; it < 60 && std::abs(n1 / target - 1) > rel_tol; ++it) {
    const double slope = (std::log(n1) - std::log(n0)) / (std::log(s1) - std::log(s0));
    double ls = std::log(s1) + (std::log(target) - std::log(n1)) / (std::isfinite(slope) && slope > 0.1 ? slope : 2.0);
    s0 = s1;
    n0 = n1;
    s1 = std::exp(std::clamp(ls, std::log(s0) - 2.0, std::log(s0) + 2.0));
    n1 = occ(s1);
  }
  if (std::abs(n1 / target - 1) > rel_tol) throw SolverError("drive_for_occupancy: secant did not converge");
  SystemParams q = p;
  q.f1 *= s1;
  q.f2 *= s1;
  return q;
}

}  // namespace upb
