#include <atomic>
#include <cmath>
#include <thread>

#include "upb/dynamics.hpp"

namespace upb {

OdeOptions regression_options() {
  OdeOptions o;
  o.rtol = 1e-9;
  o.atol = 1e-14;
  return o;
}

namespace {

// w such that w^T vec(X) = Tr(N X)
Vec trace_weights(const Mat& N) { return vec(N.transpose()); }

double trace_with(const Vec& w, const Vec& x) { return (w.transpose() * x)(0).real(); }

}  // namespace

double g2_zero(const DensityMatrix& rho, const Operator& b) {
  const Operator n = b.adjoint() * b;
  const double nb = expectation(rho, n).real();
  if (!(nb > 0)) throw std::invalid_argument("zero occupancy, g2 undefined");
  return expectation(rho, b.adjoint() * n * b).real() / (nb * nb);
}

std::vector<double> g2_tau(const Liouvillian& L, const DensityMatrix& rho_ss, const Operator& b,
                           const std::vector<double>& tau_grid) {
  if (!(rho_ss.tag() == L.tag) || !(b.tag == L.tag)) throw std::invalid_argument("basis mismatch");
  const Mat N = b.mat.adjoint() * b.mat;
  const double n = expectation(rho_ss, {N, b.tag}).real();
  if (!(n > 0)) throw std::invalid_argument("zero steady occupancy, g2(tau) undefined");
  const Mat cond = b.mat * rho_ss.matrix() * b.mat.adjoint();
  const double tr = cond.trace().real();
  std::vector<double> out(tau_grid.size(), 0.0);
  if (tr <= 0) return out;
  const Vec w = trace_weights(N);
  const double t0 = tau_grid.empty() ? 0.0 : tau_grid.front();
  propagate(L, vec(cond / tr), t0, tau_grid, regression_options(),
            [&](size_t k, const Vec& x) { out[k] = trace_with(w, x) * tr / (n * n); });
  return out;
}

std::vector<double> g2_tau_steady(const SystemParams& p, const BathParams& bath, const FockBasis& basis,
                                  int mode, const std::vector<double>& tau_grid) {
  Liouvillian L = build_liouvillian(p, bath, basis);
  DensityMatrix rho = steady_state(L);
  return g2_tau(L, rho, mode_annihilation(basis, mode), tau_grid);
}

std::vector<double> CorrelationGrid::g2_equal_time() const {
  std::vector<double> g(t.size(), 0.0);
  for (size_t i = 0; i < t.size(); ++i) g[i] = n[i] > 0 ? G2(i, i) / (n[i] * n[i]) : 0.0;
  return g;
}

double CorrelationGrid::g2_min_time(double rel) const {
  double nmax = 0;
  for (double v : n) nmax = std::max(nmax, v);
  auto g = g2_equal_time();
  double best = INFINITY, tb = t.front();
  for (size_t i = 0; i < t.size(); ++i)
    if (n[i] > rel * nmax && g[i] < best) {
      best = g[i];
      tb = t[i];
    }
  return tb;
}

double CorrelationGrid::n_max_time() const {
  size_t k = 0;
  for (size_t i = 1; i < n.size(); ++i)
    if (n[i] > n[k]) k = i;
  return t[k];
}

CorrelationGrid two_time_g2(const Liouvillian& L, const DensityMatrix& rho0, const Operator& b,
                            const std::vector<double>& t_grid, int workers) {
  if (t_grid.size() < 2) throw std::invalid_argument("two-time grid needs at least two nodes");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
  const int d = L.hilbert_dim;
  const size_t np = t_grid.size();
  const Mat N = b.mat.adjoint() * b.mat;
  const Vec w = trace_weights(N);
  const OdeOptions opt = regression_options();

  std::vector<Vec> states(np);
  propagate(L, vec(rho0.matrix()), t_grid.front(), t_grid, opt,
            [&](size_t k, const Vec& x) { states[k] = x; });

  CorrelationGrid cg;
  cg.t = t_grid;
  cg.n.resize(np);
  cg.G2 = Eigen::MatrixXd::Zero(np, np);
  for (size_t i = 0; i < np; ++i) cg.n[i] = trace_with(w, states[i]);

  auto row = [&](size_t i) {
    const Mat cond = b.mat * unvec(states[i], d) * b.mat.adjoint();
    const double tr = cond.trace().real();
    if (!(tr > 0)) return;
    std::vector<double> sub(t_grid.begin() + long(i), t_grid.end());
    propagate(L, vec(cond / tr), t_grid[i], sub, opt,
              [&](size_t k, const Vec& x) { cg.G2(i, i + k) = tr * trace_with(w, x); });
  };
  workers = std::max(1, workers);
  if (workers == 1) {
    for (size_t i = 0; i < np; ++i) row(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int k = 0; k < workers; ++k)
      pool.emplace_back([&] {
        for (size_t i = next++; i < np; i = next++) row(i);
      });
    for (auto& th : pool) th.join();
  }
  for (size_t i = 0; i < np; ++i)
    for (size_t j = 0; j < i; ++j) cg.G2(i, j) = cg.G2(j, i);

  if (L.pulse) {
    const double a = L.pulse->t0 - 3 * L.pulse->sigma_t, c = L.pulse->t0 + 3 * L.pulse->sigma_t;
    int inside = 0;
    for (double t : t_grid) inside += (t >= a && t <= c);
    if (inside < 32)
      cg.warnings.push_back("coarse grid: " + std::to_string(inside) + " nodes across the pulse support");
    if (t_grid.back() < c) cg.warnings.push_back("grid ends before the pulse support");
  }
  return cg;
}

CorrelationGrid two_time_g2(const SystemParams& p, const BathParams& bath, const FockBasis& basis,
                            const Pulse& pulse, const std::vector<double>& t_grid, int workers) {
  SystemParams q = p;
  q.f1 = q.f2 = 0;
  Liouvillian L = with_pulse(build_liouvillian(q, bath, basis), pulse);
  return two_time_g2(L, DensityMatrix::vacuum(basis), mode_annihilation(basis, 1), t_grid, workers);
}

namespace {
double trapz2(const Eigen::MatrixXd& F, const std::vector<double>& t, size_t a, size_t b) {
  std::vector<double> inner(b - a + 1, 0.0);
  for (size_t i = a; i <= b; ++i) {
    double s = 0;
    for (size_t j = a; j < b; ++j) s += 0.5 * (F(i, j) + F(i, j + 1)) * (t[j + 1] - t[j]);
    inner[i - a] = s;
  }
  double s = 0;
  for (size_t i = a; i < b; ++i) s += 0.5 * (inner[i - a] + inner[i + 1 - a]) * (t[i + 1] - t[i]);
  return s;
}

size_t nearest(const std::vector<double>& t, double x) {
  size_t k = 0;
  for (size_t i = 1; i < t.size(); ++i)
    if (std::abs(t[i] - x) < std::abs(t[k] - x)) k = i;
  return k;
}
}  // namespace

double g2_pulse_integrated(const CorrelationGrid& grid, std::optional<std::pair<double, double>> gate) {
  const auto& t = grid.t;
  if (t.size() < 2) throw std::invalid_argument("grid not populated");
  size_t a = 0, b = t.size() - 1;
  if (!gate) gate = grid.gate;
  if (gate) {
    a = nearest(t, gate->first);
    b = nearest(t, gate->second);
    if (b <= a) throw std::invalid_argument("empty gate window");
  }
  const size_t np = t.size();
  Eigen::MatrixXd nn(np, np);
  for (size_t i = 0; i < np; ++i)
    for (size_t j = 0; j < np; ++j) nn(i, j) = grid.n[i] * grid.n[j];
  const double den = trapz2(nn, t, a, b);
  if (!(den > 0)) throw std::invalid_argument("zero occupancy inside the window");
  return trapz2(grid.G2, t, a, b) / den;
}

}  // namespace upb
