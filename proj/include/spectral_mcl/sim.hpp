#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/material_map.hpp"
#include "spectral_mcl/motion.hpp"
#include "spectral_mcl/pose.hpp"
#include "spectral_mcl/raycast.hpp"
#include "spectral_mcl/sensing.hpp"
#include "spectral_mcl/spectral_library.hpp"
#include "spectral_mcl/spectrum.hpp"
#include "spectral_mcl/trajectory.hpp"

namespace spectral_mcl {

// ---------------------------------------------------------------------------
// Synthetic spectra

inline constexpr std::size_t kPeakBandWidth = 8;  // bins per peak sub-band

/// Gaussian-peak spectra on the default grid. Each material gets 3-8 peaks
/// whose centres come from distinct sub-bands; bands are not reused across
/// materials until the pool is exhausted. Peaks are normalized to max 1.
inline SpectralLibrary synthetic_library(std::size_t n_materials, std::uint64_t seed,
                                         std::size_t n_bins = kDefaultBins) {
  if (n_materials == 0) throw Error(ErrorKind::InfeasibleSpec, "library needs at least one material");
  const std::size_t n_bands = n_bins / kPeakBandWidth;
  if (n_bands < 8) throw Error(ErrorKind::InfeasibleSpec, "grid too short for synthetic peaks");
  const double step = (kDefaultGridEnd - kDefaultGridStart) / static_cast<double>(n_bins - 1);

  std::mt19937_64 rng(mix_seed(seed, 0x5eed));
  std::vector<std::size_t> pool;
  auto refill = [&] {
    pool.resize(n_bands);
    for (std::size_t b = 0; b < n_bands; ++b) pool[b] = b;
    std::shuffle(pool.begin(), pool.end(), rng);
  };
  refill();

  std::uniform_int_distribution<int> n_peaks(3, 8);
  std::uniform_real_distribution<double> offset(1.0, static_cast<double>(kPeakBandWidth) - 1.0);
  std::uniform_real_distribution<double> width(1.5, 4.0);
  std::uniform_real_distribution<double> amplitude(0.3, 1.0);

  SpectralLibrary lib;
  for (std::size_t m = 0; m < n_materials; ++m) {
    const int peaks = n_peaks(rng);
    std::vector<std::size_t> bands;
    while (static_cast<int>(bands.size()) < peaks) {
      if (pool.empty()) refill();
      const std::size_t b = pool.back();
      pool.pop_back();
      if (std::find(bands.begin(), bands.end(), b) == bands.end()) bands.push_back(b);
    }
    std::vector<double> v(n_bins, 0.0);
    for (std::size_t b : bands) {
      const double centre = static_cast<double>(b * kPeakBandWidth) + offset(rng);
      const double sigma = width(rng);
      const double a = amplitude(rng);
      for (std::size_t i = 0; i < n_bins; ++i) {
        const double z = (static_cast<double>(i) - centre) / sigma;
        v[i] += a * std::exp(-0.5 * z * z);
      }
    }
    const double peak = *std::max_element(v.begin(), v.end());
    for (double& x : v) x /= peak;
    lib.add("material_" + std::to_string(m), Spectrum(kDefaultGridStart, step, std::move(v)));
  }
  return lib;
}

// ---------------------------------------------------------------------------
// Worlds

enum class Layout { CorridorLoop, Rooms, SymmetricTwin };
enum class MaterialAssignment { PerWallSegment, RandomPatches };

constexpr std::string_view to_string(Layout l) {
  switch (l) {
    case Layout::CorridorLoop: return "corridor_loop";
    case Layout::Rooms: return "rooms";
    case Layout::SymmetricTwin: return "symmetric_twin";
  }
  return "?";
}

inline Layout parse_layout(std::string_view name) {
  if (name == "corridor_loop") return Layout::CorridorLoop;
  if (name == "rooms") return Layout::Rooms;
  if (name == "symmetric_twin") return Layout::SymmetricTwin;
  throw Error(ErrorKind::InvalidArgument, "unknown layout '" + std::string(name) + "'");
}

constexpr std::string_view to_string(MaterialAssignment a) {
  return a == MaterialAssignment::PerWallSegment ? "per_wall_segment" : "random_patches";
}

inline MaterialAssignment parse_assignment(std::string_view name) {
  if (name == "per_wall_segment") return MaterialAssignment::PerWallSegment;
  if (name == "random_patches") return MaterialAssignment::RandomPatches;
  throw Error(ErrorKind::InvalidArgument, "unknown material assignment '" + std::string(name) + "'");
}

struct WorldSpec {
  Layout layout = Layout::CorridorLoop;
  int size = 64;             // cells per side
  double resolution = 0.05;  // metres per cell
  int n_materials = 5;
  MaterialAssignment assignment = MaterialAssignment::PerWallSegment;
  std::uint64_t seed = 0;
  std::optional<std::string> library_path;  // synthetic peaks when empty

  void validate() const {
    if (size < 16) throw Error(ErrorKind::InfeasibleSpec, "world size must be at least 16 cells");
    if (!(resolution > 0.0)) throw Error(ErrorKind::InfeasibleSpec, "resolution must be positive");
    if (n_materials < 1) throw Error(ErrorKind::InfeasibleSpec, "need at least one material");
    if (layout == Layout::SymmetricTwin && n_materials < 2) {
      throw Error(ErrorKind::InfeasibleSpec, "twin halves need two materials to differ");
    }
  }
};

namespace detail {

struct Grid {
  int n;
  std::vector<Occupancy> occ;
  explicit Grid(int size) : n(size), occ(static_cast<std::size_t>(size) * size, Occupancy::Free) {}
  Occupancy& at(int i, int j) { return occ[static_cast<std::size_t>(j) * n + i]; }
  void wall(int i0, int j0, int i1, int j1) {
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) at(i, j) = Occupancy::Occupied;
  }
  void clear(int i0, int j0, int i1, int j1) {
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) at(i, j) = Occupancy::Free;
  }
};

inline Grid layout_grid(Layout layout, int n) {
  Grid g(n);
  g.wall(0, 0, n - 1, 0);
  g.wall(0, n - 1, n - 1, n - 1);
  g.wall(0, 0, 0, n - 1);
  g.wall(n - 1, 0, n - 1, n - 1);
  const int q = n / 4, e = n / 8;
  switch (layout) {
    case Layout::CorridorLoop:
      g.wall(q - 1, q - 1, n - q, n - q);
      break;
    case Layout::Rooms: {
      const int m = n / 2;
      g.wall(m, 0, m, n - 1);
      g.wall(0, m, n - 1, m);
      g.clear(m, q - e / 2, m, q + e / 2 - 1);
      g.clear(m, 3 * q - e / 2, m, 3 * q + e / 2 - 1);
      g.clear(q - e / 2, m, q + e / 2 - 1, m);
      g.clear(3 * q - e / 2, m, 3 * q + e / 2 - 1, m);
      break;
    }
    case Layout::SymmetricTwin: {
      const int m = n / 2;
      g.wall(m - 1, 0, m, n - 1);
      g.clear(m - 1, m - e / 2, m, m + e / 2 - 1);
      g.wall(e, 5 * e, 2 * e - 1, 6 * e - 1);
      g.wall(n - 2 * e, n - 6 * e, n - 1 - e, n - 1 - 5 * e);
      break;
    }
  }
  return g;
}

/// Dense material ids for `cells` (indices into an n-wide grid) such that
/// every id in [0, n_materials) is used.
inline std::vector<std::int32_t> assign_materials(const std::vector<std::size_t>& cells, int n, int n_materials,
                                                  MaterialAssignment assignment, std::mt19937_64& rng) {
  if (cells.size() < static_cast<std::size_t>(n_materials)) {
    throw Error(ErrorKind::InfeasibleSpec, "more materials than wall cells");
  }
  std::vector<std::int32_t> out(cells.size(), kNoMaterial);
  if (assignment == MaterialAssignment::PerWallSegment) {
    for (int tile = 8; tile >= 1; tile /= 2) {
      std::vector<std::size_t> keys;
      std::vector<std::size_t> key_of(cells.size());
      for (std::size_t k = 0; k < cells.size(); ++k) {
        const int i = static_cast<int>(cells[k] % n), j = static_cast<int>(cells[k] / n);
        const std::size_t key = static_cast<std::size_t>(j / tile) * static_cast<std::size_t>(n) +
                                static_cast<std::size_t>(i / tile);
        key_of[k] = key;
        keys.push_back(key);
      }
      std::sort(keys.begin(), keys.end());
      keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
      if (keys.size() < static_cast<std::size_t>(n_materials) && tile > 1) continue;
      std::vector<std::int32_t> segment_material(keys.size());
      for (std::size_t s = 0; s < keys.size(); ++s) segment_material[s] = static_cast<std::int32_t>(s % n_materials);
      std::shuffle(segment_material.begin(), segment_material.end(), rng);
      for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto s = std::lower_bound(keys.begin(), keys.end(), key_of[k]) - keys.begin();
        out[k] = segment_material[static_cast<std::size_t>(s)];
      }
      return out;
    }
  }
  // Random patches: nearest of 2 * n_materials distinct seed cells.
  std::vector<std::size_t> order(cells.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_centres = std::min(cells.size(), static_cast<std::size_t>(2 * n_materials));
  std::vector<std::int32_t> centre_material(n_centres);
  std::uniform_int_distribution<std::int32_t> any(0, n_materials - 1);
  for (std::size_t c = 0; c < n_centres; ++c) {
    centre_material[c] = c < static_cast<std::size_t>(n_materials) ? static_cast<std::int32_t>(c) : any(rng);
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const int i = static_cast<int>(cells[k] % n), j = static_cast<int>(cells[k] / n);
    long best = -1;
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < n_centres; ++c) {
      const int ci = static_cast<int>(cells[order[c]] % n), cj = static_cast<int>(cells[order[c]] / n);
      const long d = static_cast<long>(ci - i) * (ci - i) + static_cast<long>(cj - j) * (cj - j);
      if (best < 0 || d < best) {
        best = d;
        best_c = c;
      }
    }
    out[k] = centre_material[best_c];
  }
  return out;
}

}  // namespace detail

/// Deterministic synthetic world for a spec. Walls are closed; every material
/// id is used at least once. symmetric_twin geometry is invariant under a
/// 180 degree rotation about the map centre while each cell's material
/// differs from that of its rotated counterpart.
inline MaterialMap generate_world(const WorldSpec& spec) {
  spec.validate();
  const int n = spec.size;
  SpectralLibrary lib = spec.library_path ? load_library(*spec.library_path)
                                          : synthetic_library(static_cast<std::size_t>(spec.n_materials), spec.seed);
  if (lib.size() < static_cast<std::size_t>(spec.n_materials)) {
    throw Error(ErrorKind::InfeasibleSpec, "library has fewer spectra than n_materials");
  }
  detail::Grid g = detail::layout_grid(spec.layout, n);
  std::vector<std::int32_t> materials(g.occ.size(), kNoMaterial);
  std::mt19937_64 rng(mix_seed(spec.seed, 0xa55));

  if (spec.layout != Layout::SymmetricTwin) {
    std::vector<std::size_t> cells;
    for (std::size_t k = 0; k < g.occ.size(); ++k)
      if (g.occ[k] == Occupancy::Occupied) cells.push_back(k);
    const auto ids = detail::assign_materials(cells, n, spec.n_materials, spec.assignment, rng);
    for (std::size_t k = 0; k < cells.size(); ++k) materials[cells[k]] = ids[k];
  } else {
    std::vector<std::size_t> left;
    for (std::size_t k = 0; k < g.occ.size(); ++k)
      if (g.occ[k] == Occupancy::Occupied && static_cast<int>(k % n) < n / 2) left.push_back(k);
    const auto ids = detail::assign_materials(left, n, spec.n_materials, spec.assignment, rng);
    for (std::size_t k = 0; k < left.size(); ++k) materials[left[k]] = ids[k];
    // Right half: offset the mirrored id by 1 + r (mod n), r fixed per 8x8 tile.
    std::uniform_int_distribution<int> shift(0, spec.n_materials - 2);
    const int tiles = (n + 7) / 8;
    std::vector<int> tile_shift(static_cast<std::size_t>(tiles) * tiles);
    for (int& r : tile_shift) r = shift(rng);
    for (int j = 0; j < n; ++j) {
      for (int i = n / 2; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * n + i;
        if (g.occ[k] != Occupancy::Occupied) continue;
        const std::size_t mirror = static_cast<std::size_t>(n - 1 - j) * n + (n - 1 - i);
        const int r = tile_shift[static_cast<std::size_t>(j / 8) * tiles + i / 8];
        materials[k] = (materials[mirror] + 1 + r) % spec.n_materials;
      }
    }
  }
  return MaterialMap(n, n, spec.resolution, Pose2(0.0, 0.0, 0.0), std::move(g.occ), std::move(materials),
                     std::move(lib));
}

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectoryScript {
  std::vector<Pose2> waypoints;
  double speed = 0.2;          // m/s
  double angular_speed = 0.5;  // rad/s
  double scan_period = 0.5;    // s

  /// Waypoints must lie in free space and each straight leg must stay in it.
  void validate(const MaterialMap& map) const {
    if (waypoints.empty()) throw Error(ErrorKind::InvalidScript, "script has no waypoints");
    if (!(speed > 0.0) || !(angular_speed > 0.0) || !(scan_period > 0.0)) {
      throw Error(ErrorKind::InvalidScript, "speeds and scan period must be positive");
    }
    for (std::size_t k = 0; k < waypoints.size(); ++k) {
      const Pose2& w = waypoints[k];
      if (!map.is_free(w.x, w.y)) {
        throw Error(ErrorKind::InvalidScript, "waypoint " + std::to_string(k) + " is not in free space");
      }
      if (k == 0) continue;
      const Pose2& a = waypoints[k - 1];
      const double len = std::hypot(w.x - a.x, w.y - a.y);
      const int steps = static_cast<int>(std::ceil(len / (0.25 * map.resolution())));
      for (int s = 1; s < steps; ++s) {
        const double f = static_cast<double>(s) / steps;
        if (!map.is_free(a.x + f * (w.x - a.x), a.y + f * (w.y - a.y))) {
          throw Error(ErrorKind::InvalidScript, "leg " + std::to_string(k) + " crosses an obstacle");
        }
      }
    }
  }
};

namespace detail {

struct Phase {
  Pose2 start;
  double duration;
  bool rotate;
  double amount;  // radians for rotations, metres for translations
};

/// Turn toward each leg, drive it, then turn to the final waypoint heading.
inline std::vector<Phase> plan_phases(const TrajectoryScript& script) {
  std::vector<Phase> phases;
  Pose2 cur = script.waypoints.front();
  auto turn_to = [&](double heading) {
    const double d = wrap_angle(heading - cur.theta);
    if (d == 0.0) return;
    phases.push_back({cur, std::abs(d) / script.angular_speed, true, d});
    cur = Pose2(cur.x, cur.y, heading);
  };
  for (std::size_t k = 1; k < script.waypoints.size(); ++k) {
    const Pose2& w = script.waypoints[k];
    const double len = std::hypot(w.x - cur.x, w.y - cur.y);
    if (len == 0.0) continue;
    turn_to(std::atan2(w.y - cur.y, w.x - cur.x));
    phases.push_back({cur, len / script.speed, false, len});
    cur = Pose2(w.x, w.y, cur.theta);
  }
  turn_to(script.waypoints.back().theta);
  return phases;
}

inline Pose2 phase_pose(const Phase& p, double tau) {
  const double f = p.duration > 0.0 ? std::clamp(tau / p.duration, 0.0, 1.0) : 1.0;
  if (p.rotate) return Pose2(p.start.x, p.start.y, p.start.theta + f * p.amount);
  const double d = f * p.amount;
  return Pose2(p.start.x + d * std::cos(p.start.theta), p.start.y + d * std::sin(p.start.theta), p.start.theta);
}

}  // namespace detail

/// True poses at t = k * scan_period for every k with t within the script
/// duration (constant speeds, turn-then-drive per leg).
inline TrajectoryLog sample_script(const TrajectoryScript& script) {
  if (script.waypoints.empty()) throw Error(ErrorKind::InvalidScript, "script has no waypoints");
  const auto phases = detail::plan_phases(script);
  double total = 0.0;
  for (const auto& p : phases) total += p.duration;
  const auto count = static_cast<std::size_t>(std::floor(total / script.scan_period + 1e-9)) + 1;
  TrajectoryLog log;
  std::size_t ph = 0;
  double phase_t0 = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * script.scan_period;
    while (ph < phases.size() && t > phase_t0 + phases[ph].duration + 1e-9 * script.scan_period) {
      phase_t0 += phases[ph].duration;
      ++ph;
    }
    Pose2 pose;
    if (phases.empty()) pose = script.waypoints.front();
    else if (ph >= phases.size()) pose = detail::phase_pose(phases.back(), phases.back().duration);
    else pose = detail::phase_pose(phases[ph], t - phase_t0);
    log.append(t, pose);
  }
  return log;
}

/// A closed tour through the free space of the layout's default world.
inline TrajectoryScript default_script(Layout layout, int size, double resolution) {
  const double u = resolution * size / 64.0;  // one cell of the 64-cell reference layout
  auto p = [&](double i, double j, double theta = 0.0) { return Pose2(i * u, j * u, theta); };
  TrajectoryScript s;
  constexpr double half_pi = std::numbers::pi / 2.0;
  switch (layout) {
    case Layout::CorridorLoop:
      s.waypoints = {p(8, 8), p(56, 8), p(56, 56), p(8, 56), p(8, 20, -half_pi)};
      break;
    case Layout::Rooms:
      s.waypoints = {p(16, 16), p(48, 16), p(48, 48), p(16, 48), p(16, 20, -half_pi)};
      break;
    case Layout::SymmetricTwin:
      s.waypoints = {p(6, 6), p(24, 6), p(24, 32), p(40, 32), p(40, 56), p(59, 56), p(59, 30, -half_pi)};
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Sensor and odometry synthesis

struct SensorTruthConfig {
  int k_beams = 16;
  double max_range = 4.0;
  double range_sigma = 0.01;
  NoiseConfig noise;
  MotionNoise odom_noise = MotionNoise::diagonal(0.005, 0.005, 0.005);

  static SensorTruthConfig noise_free() {
    SensorTruthConfig c;
    c.range_sigma = 0.0;
    c.noise = NoiseConfig::none();
    c.odom_noise = MotionNoise();
    return c;
  }

  bool is_noise_free() const { return range_sigma == 0.0 && noise.is_noise_free() && odom_noise.is_zero(); }

  void validate() const {
    if (k_beams < 1) throw Error(ErrorKind::InvalidArgument, "k_beams must be >= 1");
    if (!(max_range > 0.0)) throw Error(ErrorKind::InvalidArgument, "max_range must be positive");
    if (!(range_sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "range_sigma must be non-negative");
    noise.validate();
  }
};

inline double beam_bearing(int k, int k_beams) {
  return -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(k_beams);
}

struct LogRecord {
  double t = 0.0;
  OdometryDelta odom;
  ScanTuple scan;
};

/// One odometry + scan record for the move prev -> true_pose. Beams that
/// leave max_range or end on an unknown cell are omitted.
inline LogRecord simulate_step(const MaterialMap& map, const Pose2& prev, const Pose2& true_pose,
                               const SensorTruthConfig& cfg, std::uint64_t seed, double t = 0.0) {
  cfg.validate();
  if (!map.is_free(true_pose.x, true_pose.y)) throw Error(ErrorKind::InvalidPose, "true pose is not in free space");
  std::mt19937_64 rng(mix_seed(seed, 0));
  LogRecord rec;
  rec.t = t;
  rec.odom = cfg.odom_noise.sample(between(prev, true_pose), rng);
  rec.scan.timestamp = t;
  std::normal_distribution<double> range_noise(0.0, 1.0);
  for (int k = 0; k < cfg.k_beams; ++k) {
    const double bearing = beam_bearing(k, cfg.k_beams);
    const auto hit = raycast(map, true_pose, bearing, cfg.max_range);
    const double z = range_noise(rng);
    if (!hit || !hit->material) continue;
    double range = hit->range + cfg.range_sigma * z;
    range = std::clamp(range, 1e-6, cfg.max_range);
    const Spectrum& truth = map.library()[*hit->material];
    ScanEntry entry{range, bearing, truth, std::nullopt};
    if (cfg.noise.is_noise_free()) {
      entry.spectrum_id = *hit->material;
    } else {
      NoiseConfig nc = cfg.noise;
      nc.rng_seed = mix_seed(seed, 1 + static_cast<std::uint64_t>(k));
      entry.spectrum = apply_sensor_noise(truth, nc);
    }
    rec.scan.entries.push_back(std::move(entry));
  }
  return rec;
}

struct Dataset {
  TrajectoryLog ground_truth;
  std::vector<LogRecord> records;
};

/// One record per scan period along the script; the first record carries a
/// zero motion.
inline Dataset generate_dataset(const MaterialMap& map, const TrajectoryScript& script,
                                const SensorTruthConfig& cfg, std::uint64_t seed) {
  script.validate(map);
  Dataset ds;
  ds.ground_truth = sample_script(script);
  Pose2 prev = ds.ground_truth.samples.front().pose;
  for (std::size_t k = 0; k < ds.ground_truth.size(); ++k) {
    const TimedPose& s = ds.ground_truth.samples[k];
    ds.records.push_back(simulate_step(map, prev, s.pose, cfg, mix_seed(seed, k), s.t));
    prev = s.pose;
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Line-delimited JSON log: {"t":..,"odom":{"dx","dy","dtheta"},"scan":[{..}]}

inline nlohmann::json record_to_json(const LogRecord& rec) {
  nlohmann::json scan = nlohmann::json::array();
  for (const ScanEntry& e : rec.scan.entries) {
    nlohmann::json j;
    if (e.range) j["range"] = *e.range;
    j["bearing"] = e.bearing;
    if (e.spectrum_id) {
      j["spectrum_id"] = *e.spectrum_id;
    } else {
      j["intensities"] = std::vector<double>(e.spectrum.intensities().begin(), e.spectrum.intensities().end());
    }
    scan.push_back(std::move(j));
  }
  return {{"t", rec.t}, {"odom", {{"dx", rec.odom.dx}, {"dy", rec.odom.dy}, {"dtheta", rec.odom.dtheta}}},
          {"scan", std::move(scan)}};
}

inline void write_log(std::ostream& out, const std::vector<LogRecord>& records) {
  for (const LogRecord& r : records) out << record_to_json(r).dump() << '\n';
}

/// Parses a log; spectrum ids resolve against `library`, raw intensities
/// take its grid.
inline std::vector<LogRecord> read_log(std::istream& in, const SpectralLibrary& library,
                                       const std::string& origin = "<stream>") {
  if (library.empty()) throw Error(ErrorKind::InsufficientLibrary, "log parsing needs a library");
  const Spectrum& ref = library[0];
  std::vector<LogRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      LogRecord rec;
      rec.t = j.at("t").get<double>();
      const auto& o = j.at("odom");
      rec.odom = {o.at("dx").get<double>(), o.at("dy").get<double>(), o.at("dtheta").get<double>()};
      rec.scan.timestamp = rec.t;
      for (const auto& b : j.at("scan")) {
        std::optional<double> range;
        if (b.contains("range")) range = b["range"].get<double>();
        const double bearing = b.at("bearing").get<double>();
        if (b.contains("spectrum_id")) {
          const auto id = b["spectrum_id"].get<std::size_t>();
          if (id >= library.size()) {
            throw Error(ErrorKind::UnknownMaterial, where + ": spectrum id " + std::to_string(id) + " not in library");
          }
          rec.scan.entries.push_back({range, bearing, library[id], id});
        } else {
          auto values = b.at("intensities").get<std::vector<double>>();
          if (values.size() != ref.size()) {
            throw Error(ErrorKind::GridMismatch, where + ": intensities do not match the library grid");
          }
          rec.scan.entries.push_back({range, bearing, ref.with_intensities(std::move(values)), std::nullopt});
        }
      }
      if (!out.empty() && !(rec.t > out.back().t)) {
        throw Error(ErrorKind::ParseError, where + ": timestamps must be strictly increasing");
      }
      out.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, where + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<LogRecord> load_log(const std::string& path, const SpectralLibrary& library) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open log " + path);
  return read_log(in, library, path);
}

inline void save_log(const std::string& path, const std::vector<LogRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write log " + path);
  write_log(out, records);
}

/// Dead-reckoned trajectory from the log's odometry, starting at `start`.
inline TrajectoryLog integrate_odometry(const std::vector<LogRecord>& records, const Pose2& start) {
  TrajectoryLog log;
  Pose2 p = start;
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (k > 0) p = compose(p, records[k].odom);
    log.append(records[k].t, p);
  }
  return log;
}

}  // namespace spectral_mcl
