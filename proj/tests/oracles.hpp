#pragma once
// Independent reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <random>
#include <vector>

namespace oracle {

/// Earth mover's distance on the line by walking an explicit transport
/// plan: the earliest remaining supply always feeds the earliest remaining
/// demand, which is optimal for a convex ground cost in 1-D.
inline double transport_plan_emd(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> supply = a, demand = b;
  std::size_t i = 0, j = 0;
  double cost = 0.0;
  while (i < supply.size() && j < demand.size()) {
    if (supply[i] <= 0.0) {
      ++i;
      continue;
    }
    if (demand[j] <= 0.0) {
      ++j;
      continue;
    }
    const double moved = std::min(supply[i], demand[j]);
    cost += moved * std::abs(static_cast<double>(i) - static_cast<double>(j));
    supply[i] -= moved;
    demand[j] -= moved;
    if (supply[i] <= 1e-15) ++i;
    if (demand[j] <= 1e-15) ++j;
  }
  return cost;
}

/// Windowed kernel written as a plain double loop, boundary indices clamped.
inline double slk_kernel(const std::vector<double>& a, const std::vector<double>& b, int w) {
  const int n = static_cast<int>(a.size());
  double k = 0.0;
  for (int i = 0; i < n; ++i) {
    k += a[i] * b[i];
    for (int j = i - w; j <= i + w; ++j) {
      const int c = j < 0 ? 0 : (j >= n ? n - 1 : j);
      k += (a[i] - a[c]) * (b[i] - b[c]);
    }
  }
  return k;
}

/// k(a,a) + k(b,b) - 2 k(a,b).
inline double slk_distance(const std::vector<double>& a, const std::vector<double>& b, int w) {
  return slk_kernel(a, a, w) + slk_kernel(b, b, w) - 2.0 * slk_kernel(a, b, w);
}

/// Modified Euclidean distance from an explicit case table.
inline double mod_l2(const std::vector<double>& z, const std::vector<double>& x) {
  const double peak = *std::max_element(z.begin(), z.end());
  const double w = peak > 0.5 ? peak / (1.0 - peak) : (1.0 - peak) / peak;
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double sq = (z[i] - x[i]) * (z[i] - x[i]);
    double term;
    if (z[i] <= x[i]) {
      term = sq;
    } else if (x[i] == 0.0) {
      term = w * sq;
    } else {
      term = sq / w;
    }
    sum += term;
  }
  return std::sqrt(sum);
}

/// KL(p || q) with both operands floored and renormalized, summed directly.
inline double kl(std::vector<double> p, std::vector<double> q, double floor = 1e-9) {
  double sp = 0.0, sq = 0.0;
  for (double& v : p) sp += (v += floor);
  for (double& v : q) sq += (v += floor);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    total += (p[i] / sp) * (std::log(p[i] / sp) - std::log(q[i] / sq));
  }
  return total;
}

inline std::vector<double> random_unit_sum(std::size_t n, std::mt19937_64& rng, double p_zero = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (double& x : v) {
    x = u(rng) < p_zero ? 0.0 : u(rng);
    s += x;
  }
  if (s == 0.0) {
    v[0] = 1.0;
    s = 1.0;
  }
  for (double& x : v) x /= s;
  return v;
}

/// Shortest-path cost on a grid graph with 8-connectivity (1 and sqrt 2
/// steps) from a set of sources with per-source initial costs.
inline std::vector<double> dijkstra_grid(int w, int h, const std::vector<double>& initial, double step = 1.0) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist = initial;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (int c = 0; c < w * h; ++c) {
    if (dist[c] < inf) pq.push({dist[c], c});
  }
  while (!pq.empty()) {
    const auto [d, c] = pq.top();
    pq.pop();
    if (d > dist[c]) continue;
    const int i = c % w, j = c / w;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ni = i + di, nj = j + dj;
        if (ni < 0 || nj < 0 || ni >= w || nj >= h) continue;
        const double nd = d + step * ((di != 0 && dj != 0) ? std::sqrt(2.0) : 1.0);
        const int nc = nj * w + ni;
        if (nd < dist[nc]) {
          dist[nc] = nd;
          pq.push({nd, nc});
        }
      }
    }
  }
  return dist;
}

/// Exact Euclidean distance (in cells) from every cell to the nearest
/// cell flagged in `occupied`.
inline std::vector<double> brute_force_edt(int w, int h, const std::vector<bool>& occupied) {
  std::vector<double> out(static_cast<std::size_t>(w * h), std::numeric_limits<double>::infinity());
  for (int c = 0; c < w * h; ++c) {
    for (int o = 0; o < w * h; ++o) {
      if (!occupied[o]) continue;
      const double dx = c % w - o % w, dy = c / w - o / w;
      out[c] = std::min(out[c], std::hypot(dx, dy));
    }
  }
  return out;
}

/// Ray marching in grid units with a fixed small step. `blocked(i, j)`
/// reports whether a cell stops the ray; leaving the grid returns -1.
template <class Blocked>
double march_ray(int w, int h, double gx, double gy, double angle, double max_t, Blocked&& blocked,
                 double step = 1e-3) {
  const double dx = std::cos(angle), dy = std::sin(angle);
  for (double t = 0.0; t <= max_t; t += step) {
    const double x = gx + t * dx, y = gy + t * dy;
    if (x < 0.0 || y < 0.0 || x >= w || y >= h) return -1.0;
    if (blocked(static_cast<int>(x), static_cast<int>(y))) return t;
  }
  return -1.0;
}

/// Sample moments (unbiased variance).
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= static_cast<double>(v.size() - 1);
  return m;
}

}  // namespace oracle
