#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/material_map.hpp"
#include "spectral_mcl/spectral_matcher.hpp"

namespace spectral_mcl {

enum class FieldProvenance { Range, Spectral };

/// Per-cell non-negative cost, row-major like MaterialMap.
struct ChamferField {
  int width = 0;
  int height = 0;
  FieldProvenance provenance = FieldProvenance::Range;
  std::optional<MetricKind> metric;  // set for spectral fields
  std::vector<double> costs;

  double at(Cell c) const {
    return costs[static_cast<std::size_t>(c.j) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.i)];
  }
};

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Two raster passes of the 3x3 chamfer mask with axial cost `step` and
/// diagonal cost `step * sqrt(2)`. `costs` holds seed costs on entry
/// (infinity for non-sources) and the relaxed field on return; the result is
/// the 8-connected shortest seed-plus-path cost.
inline void chamfer_two_pass(int width, int height, std::vector<double>& costs, double step = 1.0) {
  const double axial = step;
  const double diagonal = step * std::numbers::sqrt2;
  auto at = [&](int i, int j) -> double& {
    return costs[static_cast<std::size_t>(j) * static_cast<std::size_t>(width) + static_cast<std::size_t>(i)];
  };
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      double best = at(i, j);
      if (i > 0) best = std::min(best, at(i - 1, j) + axial);
      if (j > 0) {
        best = std::min(best, at(i, j - 1) + axial);
        if (i > 0) best = std::min(best, at(i - 1, j - 1) + diagonal);
        if (i + 1 < width) best = std::min(best, at(i + 1, j - 1) + diagonal);
      }
      at(i, j) = best;
    }
  }
  for (int j = height - 1; j >= 0; --j) {
    for (int i = width - 1; i >= 0; --i) {
      double best = at(i, j);
      if (i + 1 < width) best = std::min(best, at(i + 1, j) + axial);
      if (j + 1 < height) {
        best = std::min(best, at(i, j + 1) + axial);
        if (i + 1 < width) best = std::min(best, at(i + 1, j + 1) + diagonal);
        if (i > 0) best = std::min(best, at(i - 1, j + 1) + diagonal);
      }
      at(i, j) = best;
    }
  }
}

/// Chamfer distance (in cells) from every cell to the nearest occupied cell.
inline ChamferField build_range_chamfer(const MaterialMap& map) {
  if (map.count(Occupancy::Occupied) == 0) throw Error(ErrorKind::EmptyMap, "map has no occupied cells");
  ChamferField field{map.width(), map.height(), FieldProvenance::Range, std::nullopt, {}};
  field.costs.assign(map.cell_count(), kInfiniteCost);
  for (std::size_t k = 0; k < map.cell_count(); ++k) {
    if (map.occupancy_layer()[k] == Occupancy::Occupied) field.costs[k] = 0.0;
  }
  chamfer_two_pass(map.width(), map.height(), field.costs);
  return field;
}

/// Generalized chamfer seeded at occupied cells with seed_cost(material_id).
template <class SeedCost>
ChamferField build_spectral_chamfer(const MaterialMap& map, SeedCost&& seed_cost, double step = 1.0) {
  if (map.count(Occupancy::Occupied) == 0) throw Error(ErrorKind::EmptyMap, "map has no occupied cells");
  ChamferField field{map.width(), map.height(), FieldProvenance::Spectral, std::nullopt, {}};
  field.costs.assign(map.cell_count(), kInfiniteCost);
  for (std::size_t k = 0; k < map.cell_count(); ++k) {
    if (map.occupancy_layer()[k] == Occupancy::Occupied) {
      field.costs[k] = seed_cost(static_cast<std::size_t>(map.material_layer()[k]));
    }
  }
  chamfer_two_pass(map.width(), map.height(), field.costs, step);
  return field;
}

/// Spectral chamfer for one prepared observation: seed cost at each occupied
/// cell is the metric distance from the observation to that cell's spectrum.
inline ChamferField build_spectral_chamfer(const MaterialMap& map, const SpectralMatcher& matcher,
                                           const Spectrum& prepared_observed, double step = 1.0) {
  const std::vector<double> seeds = matcher.distances(prepared_observed);
  ChamferField field = build_spectral_chamfer(map, [&](std::size_t id) { return seeds.at(id); }, step);
  field.metric = matcher.metric().kind;
  return field;
}

/// Precomputed fields for the likelihood-field sensor model: the range
/// chamfer plus one spectral chamfer per library spectrum. Observations are
/// snapped to their nearest library entry and looked up in that entry's field.
struct FieldSet {
  ChamferField range;
  std::vector<ChamferField> spectral;  // indexed by library id; empty when no matcher
  double spectral_step = 1.0;          // metric units per cell of travel
};

/// Spatial step for spectral fields: travelling `length_scale` metres costs
/// the median inter-material distance, so a wrong material and an offset of
/// one range-noise std are penalized alike whatever the metric's native scale.
inline double default_spectral_step(const SpectralMatcher& matcher, double resolution, double length_scale) {
  return matcher.median_distance() * resolution / length_scale;
}

/// `spectral_step` is the per-cell travel cost of the spectral fields.
inline FieldSet build_field_set(const MaterialMap& map, const SpectralMatcher* matcher, double spectral_step) {
  FieldSet set{build_range_chamfer(map), {}, 1.0};
  if (matcher == nullptr) return set;
  set.spectral_step = spectral_step;
  set.spectral.reserve(matcher->size());
  for (std::size_t id = 0; id < matcher->size(); ++id) {
    ChamferField f = build_spectral_chamfer(
        map, [&](std::size_t cell_id) { return matcher->library_distance(id, cell_id); }, set.spectral_step);
    f.metric = matcher->metric().kind;
    set.spectral.push_back(std::move(f));
  }
  return set;
}

}  // namespace spectral_mcl
