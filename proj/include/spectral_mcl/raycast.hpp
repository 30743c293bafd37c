#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/material_map.hpp"
#include "spectral_mcl/pose.hpp"

namespace spectral_mcl {

struct RayHit {
  double range = 0.0;                   // metres to the crossing point
  Cell cell;                            // first blocking cell
  std::optional<std::size_t> material;  // empty for unknown cells
};

/// Unknown cells stop rays like occupied ones.
inline bool blocks_ray(Occupancy o) { return o != Occupancy::Free; }

/// Exact grid traversal (Amanatides-Woo) from `pose` along `bearing`
/// (robot frame). Returns the first blocking cell within max_range.
inline std::optional<RayHit> raycast(const MaterialMap& map, const Pose2& pose, double bearing, double max_range) {
  double gx = 0.0, gy = 0.0;
  map.world_to_grid(pose.x, pose.y, gx, gy);
  if (!(gx >= 0.0) || !(gy >= 0.0) || gx >= map.width() || gy >= map.height()) {
    throw Error(ErrorKind::OutOfBounds, "ray origin outside the map");
  }
  Cell cell{static_cast<int>(gx), static_cast<int>(gy)};
  auto make_hit = [&](double t_cells) {
    return RayHit{t_cells * map.resolution(), cell, map.material(cell)};
  };
  if (blocks_ray(map.occupancy(cell))) return make_hit(0.0);

  const double angle = pose.theta + bearing - map.origin().theta;
  const double dx = std::cos(angle), dy = std::sin(angle);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int step_i = dx > 0.0 ? 1 : -1;
  const int step_j = dy > 0.0 ? 1 : -1;
  double t_max_x = dx > 0.0 ? (cell.i + 1 - gx) / dx : dx < 0.0 ? (gx - cell.i) / -dx : inf;
  double t_max_y = dy > 0.0 ? (cell.j + 1 - gy) / dy : dy < 0.0 ? (gy - cell.j) / -dy : inf;
  const double t_delta_x = dx != 0.0 ? 1.0 / std::abs(dx) : inf;
  const double t_delta_y = dy != 0.0 ? 1.0 / std::abs(dy) : inf;
  const double t_limit = max_range / map.resolution();

  while (true) {
    double t = 0.0;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      cell.i += step_i;
      t_max_x += t_delta_x;
    } else {
      t = t_max_y;
      cell.j += step_j;
      t_max_y += t_delta_y;
    }
    if (t > t_limit || !map.in_bounds(cell)) return std::nullopt;
    if (blocks_ray(map.occupancy(cell))) return make_hit(t);
  }
}

}  // namespace spectral_mcl
