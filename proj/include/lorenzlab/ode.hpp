#pragma once

// Adaptive Dormand-Prince 5(4) integrator with PI step-size control.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <vector>

namespace lorenzlab::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_init = 0.0;  // 0: automatic
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 5'000'000;
};

enum class Status { finished, event, stopped, step_underflow, max_steps, rhs_failure };

template <std::size_t N>
struct Result {
  Status status = Status::finished;
  double t = 0.0;
  State<N> y{};
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double h_last = 0.0;
};

struct NoEvent {};
struct NoObserver {
  template <class S>
  bool operator()(double, const S&) const {
    return true;
  }
};

namespace detail {

// Dormand-Prince tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace detail

// One Dormand-Prince step. `k1` is f(t, y); on success `k7` holds f(t+h, y_out)
// and `err` the embedded error estimate.
template <std::size_t N, class Rhs>
bool dopri_step(Rhs& f, double t, const State<N>& y, const State<N>& k1, double h,
                State<N>& y_out, State<N>& err, State<N>& k7) {
  using namespace detail;
  State<N> k2, k3, k4, k5, k6, tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  if (!f(t + c2 * h, tmp, k2)) return false;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  if (!f(t + c3 * h, tmp, k3)) return false;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  if (!f(t + c4 * h, tmp, k4)) return false;
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  if (!f(t + c5 * h, tmp, k5)) return false;
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  if (!f(t + h, tmp, k6)) return false;
  for (std::size_t i = 0; i < N; ++i)
    y_out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  if (!f(t + h, y_out, k7)) return false;
  for (std::size_t i = 0; i < N; ++i)
    err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  return true;
}

template <std::size_t N>
double error_norm(const State<N>& err, const State<N>& y0, const State<N>& y1, const Options& o) {
  double m = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    m = std::max(m, std::abs(err[i]) / sc);
  }
  return m;
}

// Integrates y' = f(t, y) from t0 towards t_end (either direction).
//
// f:        bool(double t, const State&, State& dydt); returning false rejects the
//           step and halves it.
// observer: bool(double t, const State&); called on the initial state and after each
//           accepted step; returning false stops with Status::stopped.
// event:    double(double t, const State&); a sign change from negative to
//           nonnegative stops the integration exactly on the zero (Status::event).
// steps:    when non-null, accepted step sizes are appended.
template <std::size_t N, class Rhs, class Observer = NoObserver, class Event = NoEvent>
Result<N> integrate(Rhs&& f, double t0, const State<N>& y0, double t_end, const Options& opt,
                    Observer&& observer = {}, Event&& event = {},
                    std::vector<double>* steps = nullptr) {
  constexpr bool has_event = !std::is_same_v<std::decay_t<Event>, NoEvent>;
  Result<N> res;
  res.t = t0;
  res.y = y0;
  if (!observer(t0, y0)) {
    res.status = Status::stopped;
    return res;
  }
  if (t_end == t0) return res;
  const double dir = t_end > t0 ? 1.0 : -1.0;

  State<N> k1, k7, y1, err;
  if (!f(t0, y0, k1)) {
    res.status = Status::rhs_failure;
    return res;
  }

  double h = opt.h_init;
  if (h <= 0.0) {
    // Hairer's starting step heuristic.
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y0[i]);
      d0 = std::max(d0, std::abs(y0[i]) / sc);
      d1 = std::max(d1, std::abs(k1[i]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, opt.h_max);
  }
  h = std::min(h, std::abs(t_end - t0));

  double t = t0;
  State<N> y = y0;
  double g_prev = 0.0;
  if constexpr (has_event) g_prev = event(t, y);
  double err_prev = 1e-4;
  bool last_rejected = false;

  while (true) {
    if (res.accepted >= opt.max_steps) {
      res.status = Status::max_steps;
      break;
    }
    if (h < opt.h_min * std::max(1.0, std::abs(t))) {
      res.status = Status::step_underflow;
      break;
    }
    bool final_step = false;
    if (h >= std::abs(t_end - t)) {
      h = std::abs(t_end - t);
      final_step = true;
    }
    if (!dopri_step<N>(f, t, y, k1, dir * h, y1, err, k7)) {
      h *= 0.5;
      ++res.rejected;
      last_rejected = true;
      continue;
    }
    const double e = error_norm<N>(err, y, y1, opt);
    if (!(e <= 1.0)) {
      const double fac = std::isfinite(e) ? std::max(0.2, 0.9 * std::pow(e, -0.2)) : 0.2;
      h *= std::min(1.0, fac);
      ++res.rejected;
      last_rejected = true;
      continue;
    }

    const double t_new = final_step ? t_end : t + dir * h;
    if constexpr (has_event) {
      const double g_new = event(t_new, y1);
      if (g_prev < 0.0 && g_new >= 0.0) {
        // Regula falsi (Illinois) on the step length from the last accepted state.
        double lo = 0.0, hi = h, g_lo = g_prev, g_hi = g_new;
        State<N> y_lo = y, y_hi = y1, y_try, e_try, k_try;
        int side = 0;
        for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, std::abs(t)); ++it) {
          double s = hi - g_hi * (hi - lo) / (g_hi - g_lo);
          if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
          if (!dopri_step<N>(f, t, y, k1, dir * s, y_try, e_try, k_try)) break;
          const double g_try = event(t + dir * s, y_try);
          if (g_try >= 0.0) {
            hi = s;
            g_hi = g_try;
            y_hi = y_try;
            if (side == 1) g_lo *= 0.5;
            side = 1;
          } else {
            lo = s;
            g_lo = g_try;
            y_lo = y_try;
            if (side == -1) g_hi *= 0.5;
            side = -1;
          }
          if (g_hi == 0.0) break;
        }
        (void)y_lo;
        res.t = t + dir * hi;
        res.y = y_hi;
        res.status = Status::event;
        ++res.accepted;
        if (steps) steps->push_back(dir * hi);
        observer(res.t, res.y);
        return res;
      }
      g_prev = g_new;
    }

    t = t_new;
    y = y1;
    k1 = k7;
    ++res.accepted;
    res.h_last = h;
    if (steps) steps->push_back(dir * h);
    if (!observer(t, y)) {
      res.status = Status::stopped;
      break;
    }
    if (final_step) {
      res.status = Status::finished;
      break;
    }

    // PI controller (Gustafsson), exponents 0.7/5 and 0.4/5.
    const double e_safe = std::max(e, 1e-10);
    double fac = 0.9 * std::pow(e_safe, -0.14) * std::pow(err_prev, 0.08);
    fac = std::clamp(fac, 0.2, 5.0);
    if (last_rejected) fac = std::min(fac, 1.0);
    h = std::min(h * fac, opt.h_max);
    err_prev = e_safe;
    last_rejected = false;
  }
  res.t = t;
  res.y = y;
  return res;
}

// Replays a fixed sequence of signed step sizes without error control.
template <std::size_t N, class Rhs>
bool replay(Rhs&& f, double t0, State<N>& y, const std::vector<double>& steps) {
  State<N> k1, k7, y1, err;
  double t = t0;
  for (double h : steps) {
    if (!f(t, y, k1)) return false;
    if (!dopri_step<N>(f, t, y, k1, h, y1, err, k7)) return false;
    y = y1;
    t += h;
  }
  return true;
}

}  // namespace lorenzlab::ode
