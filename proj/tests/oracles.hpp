#pragma once

// Test-only reference computations, independent of the library code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "lorenzlab/metric.hpp"

namespace oracle {

using lorenzlab::SurfaceModel;
using lorenzlab::Vec2;

using Mat2 = std::array<std::array<double, 2>, 2>;

inline Mat2 metric_matrix(const SurfaceModel& m, Vec2 p) {
  const auto g = lorenzlab::eval_metric(m, p);
  return {{{g.E, g.F}, {g.F, g.G}}};
}

// Christoffel symbols Gamma^k_ij from central differences of eval_metric and the
// tensor formula written out over index loops. Result indexed [k][i][j].
inline std::array<Mat2, 2> fd_christoffels(const SurfaceModel& m, Vec2 p, double h = 1e-5) {
  std::array<Mat2, 2> dg{};  // dg[l] = d g / d x^l
  for (int l = 0; l < 2; ++l) {
    Vec2 e = l == 0 ? Vec2{h, 0} : Vec2{0, h};
    const Mat2 gp = metric_matrix(m, p + e);
    const Mat2 gm = metric_matrix(m, p - e);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) dg[l][a][b] = (gp[a][b] - gm[a][b]) / (2 * h);
  }
  const Mat2 g = metric_matrix(m, p);
  const double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
  const Mat2 inv{{{g[1][1] / det, -g[0][1] / det}, {-g[1][0] / det, g[0][0] / det}}};
  std::array<Mat2, 2> out{};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double s = 0.0;
        for (int l = 0; l < 2; ++l) {
          s += inv[k][l] * 0.5 * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
        }
        out[k][i][j] = s;
      }
  return out;
}

// Flat-trivialization winding degree of the function v(t), t in [0,1], by dense
// sampling with principal-value angle increments.
template <class F>
double winding(F&& v, int samples) {
  double total = 0.0;
  Vec2 prev = v(0.0);
  for (int i = 1; i <= samples; ++i) {
    const Vec2 cur = v(static_cast<double>(i) / samples);
    total += std::atan2(lorenzlab::cross(prev, cur), lorenzlab::dot(prev, cur));
    prev = cur;
  }
  return total / (2.0 * lorenzlab::kPi);
}

}  // namespace oracle

namespace oracle {

// Length of the vertical causal circle {x} x [0,1]: sqrt(-G(x)) where G < 0.
inline double vertical_circle_length(const SurfaceModel& m, double x) {
  const double G = lorenzlab::eval_metric(m, {x, 0.0}).G;
  return G < 0.0 ? std::sqrt(-G) : 0.0;
}

struct CircleMax {
  double x = 0.0;
  double length = 0.0;
};

// Best vertical causal circle: dense scan, then golden-section refinement.
inline CircleMax best_vertical_circle(const SurfaceModel& m) {
  constexpr int n = 4096;
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (vertical_circle_length(m, double(i) / n) > vertical_circle_length(m, double(best) / n)) best = i;
  double a = double(best - 1) / n, b = double(best + 1) / n;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double c = b - r * (b - a), d = a + r * (b - a);
    if (vertical_circle_length(m, c) > vertical_circle_length(m, d)) b = d;
    else a = c;
  }
  const double x = 0.5 * (a + b);
  return {x - std::floor(x), vertical_circle_length(m, x)};
}

// Longest closed timelike lattice path in class (0,1): `levels` rows in y, x on
// an `nx` grid, each row advancing x by at most `reach` cells; edges weighted
// by their midpoint-metric chord length.
inline double lattice_longest_loop(const SurfaceModel& m, int nx, int levels, int reach) {
  const double ninf = -1e300;
  auto chord = [&](double x0, double y0, double dx, double dy) {
    const auto g = lorenzlab::eval_metric(m, {x0 + dx / 2, y0 + dy / 2});
    const double q = g.E * dx * dx + 2 * g.F * dx * dy + g.G * dy * dy;
    return q < 0.0 ? std::sqrt(-q) : ninf;
  };
  const double dy = 1.0 / levels;
  double best = 0.0;
  for (int start = 0; start < nx; ++start) {
    // Column offsets relative to the start, unwrapped.
    const int width = 2 * reach * levels + 1;
    const int mid = reach * levels;
    std::vector<double> cur(static_cast<std::size_t>(width), ninf);
    std::vector<double> nxt(cur.size());
    cur[std::size_t(mid)] = 0.0;
    for (int l = 0; l < levels; ++l) {
      std::fill(nxt.begin(), nxt.end(), ninf);
      for (int c = 0; c < width; ++c) {
        if (cur[std::size_t(c)] <= ninf) continue;
        const double x0 = double(start + c - mid) / nx;
        for (int s = -reach; s <= reach; ++s) {
          const int t = c + s;
          if (t < 0 || t >= width) continue;
          const double w = chord(x0, l * dy, double(s) / nx, dy);
          if (w <= ninf) continue;
          nxt[std::size_t(t)] = std::max(nxt[std::size_t(t)], cur[std::size_t(c)] + w);
        }
      }
      std::swap(cur, nxt);
    }
    best = std::max(best, cur[std::size_t(mid)]);
  }
  return best;
}

// Degree of the timelike cone axis along a loop from the traceless part of the
// metric: the axes turn at half the angle of ((E - G) / 2, F).
template <class Loop>
double axis_degree(const SurfaceModel& m, Loop&& loop, int samples = 20000) {
  return 0.5 * winding(
                   [&](double t) {
                     const auto g = lorenzlab::eval_metric(m, loop(t));
                     return Vec2{0.5 * (g.E - g.G), g.F};
                   },
                   samples);
}

}  // namespace oracle
