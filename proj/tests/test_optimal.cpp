#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "upb/optimal.hpp"

using namespace upb;

namespace {

std::mt19937 rng(17);
double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

SystemParams generic(double f) {
  SystemParams p;
  p.delta1 = uni(-1, 1);
  p.delta2 = uni(-1, 1);
  p.u1 = uni(0.01, 1);
  p.u2 = uni(0.01, 1);
  p.kappa1 = uni(0.5, 1.5);
  p.kappa2 = uni(0.5, 1.5);
  p.f2 = f;
  return p;
}

}  // namespace

TEST_CASE("optimal detuning and nonlinearity") {
  auto o = delta_u_opt(M_PI);
  MESSAGE("U_opt(J = pi) = " << o.u_opt);
  CHECK(o.u_opt > 0.035);
  CHECK(o.u_opt < 0.045);
  CHECK(o.delta_minus == -o.delta_plus);
  auto far = delta_u_opt(20.0);
  CHECK(std::abs(far.u_opt / far.u_asymptote - 1) < 0.02);
  CHECK_THROWS(delta_u_opt(1 / std::sqrt(2.0)));
  CHECK_THROWS(delta_u_opt(-1.0));
  CHECK(std::abs(j_for_u_opt(o.u_opt) - M_PI) < 1e-9);
}

TEST_CASE("asymptote error shrinks with J") {
  double prev = INFINITY;
  for (double J = 10; J <= 100; J += 5) {
    auto o = delta_u_opt(J);
    const double err = std::abs(o.u_opt / o.u_asymptote - 1);
    CHECK(err < 0.02);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("both detuning branches cancel c20") {
  for (int k = 0; k < 20; ++k) {
    const double J = uni(0.75, 10);
    auto o = delta_u_opt(J);
    for (auto [d, u] : {std::pair{o.delta_plus, o.u_opt}, std::pair{o.delta_minus, o.u_opt_minus}}) {
      SystemParams p;
      p.delta1 = p.delta2 = d;
      p.u1 = p.u2 = u;
      p.j_hop = J;
      p.f1 = 1e-3;
      auto c = solve_manifolds(p, 2);
      CHECK(std::abs(c.at(2, 0)) < 1e-8 * std::norm(c.at(1, 0)));
    }
  }
}

TEST_CASE("cascaded drive condition") {
  SystemParams p;
  p.u1 = p.u2 = 1e-2;
  p.f2 = 1e-2;
  auto br = f1_opt_cascaded(p, 1.0);
  for (cplx f1 : br) {
    SystemParams q = p;
    q.f1 = f1;
    CHECK(std::abs(solve_manifolds(q, 2, 1.0).at(0, 2)) < 1e-12);
    SystemParams r = q;
    r.f1 *= 1.1;
    CHECK(std::abs(solve_manifolds(r, 2, 1.0).at(0, 2)) > std::abs(solve_manifolds(q, 2, 1.0).at(0, 2)));
  }
  SystemParams q = p;
  q.u2 = 0.7;
  CHECK(std::abs(f1_opt_cascaded(q, 1.0)[0] - br[0]) == 0.0);
  CHECK_THROWS(f1_opt_cascaded(p, 0.0));

  for (int k = 0; k < 20; ++k) {
    SystemParams g = generic(1e-3);
    const double chi = uni(0.2, 1.0) * std::sqrt(g.kappa1 * g.kappa2);
    for (cplx f1 : f1_opt_cascaded(g, chi)) {
      g.f1 = f1;
      auto c = solve_manifolds(g, 2, chi);
      const double scale = std::max(std::norm(f1), std::norm(g.f2));
      CHECK(std::abs(c.at(0, 2)) < 1e-8 * scale);
    }
  }
}

TEST_CASE("cascaded optimum in the master equation") {
  SystemParams p;
  p.u1 = p.u2 = 1e-2;
  p.f2 = 1e-2;
  BathParams bath;
  bath.cascade_efficiency = 1.0;
  const auto br = f1_opt_cascaded(p, 1.0);
  FockBasis b(5);
  double best = INFINITY, n2b = 0;
  for (cplx f1 : br) {
    SystemParams q = p;
    q.f1 = f1;
    auto rho = steady_state(build_liouvillian(q, bath, b));
    const double n2 = expectation(rho, number(b, 2)).real();
    const double g = g2_zero(rho, mode_annihilation(b, 2));
    if (g < best) {
      best = g;
      n2b = n2;
    }
  }
  MESSAGE("cascaded optimum: n2 = " << n2b << ", g2_2 = " << best);
  CHECK(n2b <= 1e-3);
  CHECK(best < 1e-2);
}

TEST_CASE("coherent drive condition: printed root against the numeric root") {
  SystemParams p;
  p.u1 = p.u2 = 1e-2;
  p.j_hop = 0.5;
  p.f2 = 1e-3;
  auto num = f1_opt_numeric(p, 2, 0);
  for (cplx f1 : num) {
    SystemParams q = p;
    q.f1 = f1;
    CHECK(std::abs(solve_manifolds(q, 2).at(2, 0)) < 1e-12 * std::norm(p.f2));
  }
  // the printed expression cancels the other two-photon amplitude
  auto printed = f1_opt_coherent(p);
  for (cplx f1 : printed) {
    SystemParams q = p;
    q.f1 = f1;
    auto c = solve_manifolds(q, 2);
    CHECK(std::abs(c.at(0, 2)) < 1e-12 * std::norm(p.f2));
    CHECK(std::abs(c.at(2, 0)) > 1e-6 * std::norm(p.f2));
  }
  SystemParams s = p;
  s.f2 *= 3.0;
  auto scaled = f1_opt_coherent(s);
  CHECK(std::abs(scaled[0] - 3.0 * printed[0]) < 1e-14);
  auto ns = f1_opt_numeric(s, 2, 0);
  CHECK(std::abs(ns[0] - 3.0 * num[0]) < 1e-12);
  SystemParams z = p;
  z.j_hop = 0;
  CHECK_THROWS(f1_opt_coherent(z));

  for (int k = 0; k < 20; ++k) {
    SystemParams g = generic(1e-3);
    g.j_hop = uni(0.2, 2.0);
    for (auto [tn, tm] : {std::pair{2, 0}, std::pair{0, 2}, std::pair{1, 1}})
      for (cplx f1 : f1_opt_numeric(g, tn, tm)) {
        SystemParams q = g;
        q.f1 = f1;
        const double scale = std::max(std::norm(f1), std::norm(g.f2));
        CHECK(std::abs(solve_manifolds(q, 2).at(tn, tm)) < 1e-8 * scale);
      }
  }
}

TEST_CASE("coherent optimum with J < kappa: no oscillating g2(tau)") {
  SystemParams p;
  p.u1 = p.u2 = 1e-2;
  p.j_hop = 0.5;
  p.f2 = 1e-3;
  double best = INFINITY;
  SystemParams chosen;
  FockBasis b(4);
  for (cplx f1 : f1_opt_numeric(p, 2, 0)) {
    SystemParams q = p;
    q.f1 = f1;
    const double g = steady_g2(q, BathParams{}, 4);
    if (g < best) {
      best = g;
      chosen = q;
    }
  }
  auto g = g2_tau_steady(chosen, BathParams{}, b, 1, linspace(0, 1, 51));
  int minima = 0;
  for (size_t i = 1; i + 1 < g.size(); ++i) minima += (g[i] < g[i - 1] && g[i] < g[i + 1]);
  CHECK(minima == 0);
  CHECK(g.front() < 0.1);
}

TEST_CASE("Jaynes-Cummings conditions") {
  JcParams jc;
  auto o = jc_opt(jc);
  CHECK(std::abs(o.g_opt - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(o.delta1_opt == 0.0);
  jc.kappa2 = 0;
  CHECK_THROWS(jc_opt(jc));

  for (int k = 0; k < 20; ++k) {
    JcParams r;
    r.delta2 = uni(-2, 2);
    r.kappa1 = uni(0.3, 2);
    r.kappa2 = uni(0.3, 2);
    r.f1 = 1e-3;
    auto ro = jc_opt(r);
    r.delta1 = ro.delta1_opt;
    for (double g : {ro.g_opt, -ro.g_opt}) {
      r.g = g;
      CHECK(std::abs(jc_solve(r, 2).at(2, 0)) < 1e-10 * std::norm(r.f1));
    }
    JcParams s;
    s.delta1 = uni(-1, 1);
    s.delta2 = uni(-1, 1);
    s.g = uni(0.1, 1);
    s.kappa1 = uni(0.3, 2);
    s.kappa2 = uni(0.3, 2);
    s.f1 = 1e-3;
    for (cplx f2 : jc_f2_opt(s)) {
      s.f2 = f2;
      CHECK(std::abs(jc_solve(s, 2).at(2, 0)) < 1e-10 * std::norm(s.f1));
    }
  }
  JcParams z;
  CHECK_THROWS(jc_f2_opt(z));
}

TEST_CASE("effective Kerr maps") {
  CHECK(std::abs(effective_kerr(KerrMap::dispersive_jc, 0.1, 1.0) - 1e-4) < 1e-18);
  CHECK(std::abs(effective_kerr(KerrMap::optomechanical, 0.1, 10.0) - 1e-3) < 1e-18);
  CHECK(std::abs(effective_kerr(KerrMap::optomechanical, 0.2, 10.0) / effective_kerr(KerrMap::optomechanical, 0.1, 10.0) -
                 4) < 1e-12);
  CHECK_THROWS(effective_kerr(KerrMap::dispersive_jc, 0.1, 0.0));
  CHECK_THROWS(effective_kerr(KerrMap::optomechanical, 0.1, 0.0));
}

TEST_CASE("minimizer recovers the optimal detuning") {
  const double U = 0.05;
  const SystemParams base = upb_optimum(U, 1e-3);
  MinimizeSpec spec;
  spec.names = {"delta"};
  spec.lo = {0.0};
  spec.hi = {1.0};
  auto r = minimize_g2(
      [&](const std::vector<double>& x) {
        SystemParams q = base;
        q.delta1 = q.delta2 = x[0];
        return steady_g2(q, BathParams{}, 4);
      },
      spec);
  MESSAGE("argmin " << r.argmin[0] << " vs " << base.delta1);
  CHECK(std::abs(r.argmin[0] - base.delta1) < 1.0 / 63);
  CHECK(r.log.size() == 64);

  MinimizeSpec bad = spec;
  bad.hi = {0.0};
  CHECK_THROWS(minimize_g2([](const std::vector<double>&) { return 0.0; }, bad));
  CHECK_THROWS_AS(minimize_g2([](const std::vector<double>&) -> double { throw std::runtime_error("x"); }, spec),
                  SolverError);
}

TEST_CASE("minimizer is deterministic across worker counts") {
  MinimizeSpec spec;
  spec.names = {"x", "y"};
  spec.lo = {-1, 0.01};
  spec.hi = {1, 10};
  spec.log_scale = {false, true};
  spec.grid = 16;
  auto f = [](const std::vector<double>& x) { return std::pow(x[0] - 0.3, 2) + std::pow(std::log(x[1] / 2), 2); };
  auto a = minimize_g2(f, spec);
  spec.workers = 3;
  auto b = minimize_g2(f, spec);
  CHECK(a.argmin == b.argmin);
  CHECK(std::abs(a.argmin[0] - 0.3) < 1e-2);
  CHECK(std::abs(a.argmin[1] - 2) < 2e-2);
  CHECK(a.value < 1e-4);
}

TEST_CASE("analytic optimum is close to the best (Delta, J) at fixed occupancy") {
  const double U = 1e-2, target = 1e-3;
  auto full_at = [&](SystemParams q, int cutoff) {
    q = drive_for_occupancy(q, BathParams{}, cutoff, target, 1, 1e-3);
    return steady_g2(q, BathParams{}, cutoff);
  };
  const SystemParams opt = upb_optimum(U, 0.05);
  MinimizeSpec spec;
  spec.names = {"delta", "J"};
  spec.lo = {0.02, 1.0};
  spec.hi = {2.0, 20.0};
  spec.log_scale = {true, true};
  spec.grid = 20;
  auto r = minimize_g2(
      [&](const std::vector<double>& x) {
        SystemParams q = opt;
        q.delta1 = q.delta2 = x[0];
        q.j_hop = x[1];
        return full_at(q, 4);
      },
      spec);
  auto full = [&](const SystemParams& q) { return full_at(q, 5); };
  SystemParams at_min = opt;
  at_min.delta1 = at_min.delta2 = r.argmin[0];
  at_min.j_hop = r.argmin[1];
  const double g_opt = full(opt), g_min = full(at_min);
  MESSAGE("analytic " << g_opt << ", minimizer " << g_min << " at delta=" << r.argmin[0] << " J=" << r.argmin[1]);
  CHECK(g_opt <= 1.05 * g_min);
}

TEST_CASE("drive rescaling hits the requested occupancy") {
  SystemParams p = upb_optimum(0.05, cplx(0.01, 0.02));
  auto q = drive_for_occupancy(p, BathParams{}, 5, 2e-3);
  double n = 0;
  steady_g2(q, BathParams{}, 5, 1, &n);
  CHECK(std::abs(n / 2e-3 - 1) < 1e-3);
  CHECK(std::abs(std::arg(q.f1) - std::arg(p.f1)) < 1e-12);
  CHECK_THROWS(drive_for_occupancy(p, BathParams{}, 5, -1));
}
