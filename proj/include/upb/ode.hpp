#pragma once

// Dormand-Prince 5(4) with adaptive steps that land exactly on output nodes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "upb/fock.hpp"

namespace upb {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_init = 0;  // 0 picks a starting step automatically
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 20'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
};

namespace detail {
template <class V>
double err_norm(const V& e, const V& y0, const V& y1, const OdeOptions& o) {
  double s = 0;
  const auto n = e.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = std::abs(e[i]) / sc;
    s += r * r;
  }
  return std::sqrt(s / double(n));
}
}  // namespace detail

// f(t, y, dy) evaluates the right-hand side. out(k, y) is called at each grid[k]
// (grid must be non-decreasing and start at or after t0).
template <class V, class F, class Out>
OdeStats integrate_grid(F&& f, V y, double t0, const std::vector<double>& grid, const OdeOptions& o,
                        Out&& out) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeStats st;
  double t = t0;
  V k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), k5(y.size()), k6(y.size()), k7(y.size());
  V yt(y.size()), ynew(y.size());
  f(t, y, k1);

  const double span = grid.empty() ? 0.0 : grid.back() - t0;
  double h = o.h_init;
  if (h <= 0) {
    const double d0 = y.norm(), d1 = k1.norm();
    h = (d0 > 1e-5 && d1 > 1e-5) ? 0.01 * d0 / d1 : 1e-6;
    h = std::min(h, 0.01 * std::max(span, 1e-12));
  }
  h = std::min(h, o.h_max);

  for (size_t k = 0; k < grid.size(); ++k) {
    const double target = grid[k];
    if (target < t - 1e-14 * std::max(1.0, std::abs(t)))
      throw std::invalid_argument("time grid must be non-decreasing and start at t0");
    while (target - t > 1e-14 * std::max(1.0, std::abs(target))) {
      bool last = false;
      double hs = h;
      if (t + hs >= target) {
        hs = target - t;
        last = true;
      }
      yt = y + hs * a21 * k1;
      f(t + c2 * hs, yt, k2);
      yt = y + hs * (a31 * k1 + a32 * k2);
      f(t + c3 * hs, yt, k3);
      yt = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
      f(t + c4 * hs, yt, k4);
      yt = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(t + c5 * hs, yt, k5);
      yt = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(t + hs, yt, k6);
      ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      f(t + hs, ynew, k7);
      V err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double en = detail::err_norm(err, y, ynew, o);
      if (!std::isfinite(en)) throw SolverError("integrator produced non-finite values");
      const double fac = std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.2), 0.2, 5.0);
      if (en <= 1.0) {
        t = last ? target : t + hs;
        y.swap(ynew);
        k1.swap(k7);
        ++st.accepted;
        // a truncated final step says nothing about the natural step size
        if (!last || fac < 1.0) h = std::min(hs * fac, o.h_max);
      } else {
        ++st.rejected;
        h = hs * std::min(fac, 1.0);
      }
      if (h < 1e-13 * std::max(1.0, std::abs(t))) throw SolverError("step size underflow at t=" + std::to_string(t));
      if (st.accepted + st.rejected > o.max_steps) throw SolverError("step budget exhausted");
    }
    out(k, static_cast<const V&>(y));
  }
  return st;
}

}  // namespace upb
