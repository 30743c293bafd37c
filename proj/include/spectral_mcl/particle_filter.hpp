#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/material_map.hpp"
#include "spectral_mcl/motion.hpp"
#include "spectral_mcl/parallel.hpp"
#include "spectral_mcl/pose.hpp"
#include "spectral_mcl/sensing.hpp"

namespace spectral_mcl {

struct Particle {
  Pose2 pose;
  double weight = 0.0;
  friend bool operator==(const Particle&, const Particle&) = default;
};

using ParticleSet = std::vector<Particle>;

enum class InitMode { UniformFreeSpace, Gaussian };

struct InitConfig {
  InitMode mode = InitMode::Gaussian;
  Pose2 mean;
  double std_xy = 2.0;     // metres
  double std_theta = 2.0;  // radians
};

struct FilterConfig {
  int n_min = 100;
  int n_max = 1000;
  InitConfig init;
  double resample_threshold = 0.5;  // resample when N_eff < threshold * n
  bool adaptive = true;             // KLD-sampling particle count
  double kld_epsilon = 0.05;
  double kld_delta = 0.01;
  double kld_bin_xy = 0.5;
  double kld_bin_theta = std::numbers::pi / 8.0;
  MotionNoise motion_noise = MotionNoise::diagonal(0.03, 0.03, 0.05);
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (n_min <= 0 || n_min > n_max) throw Error(ErrorKind::InvalidArgument, "need 0 < n_min <= n_max");
    if (!(resample_threshold > 0.0 && resample_threshold <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "resample threshold must lie in (0, 1]");
    }
    if (!(kld_epsilon > 0.0) || !(kld_delta > 0.0 && kld_delta < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "KLD parameters out of range");
    }
    if (!(init.std_xy >= 0.0) || !(init.std_theta >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "initial standard deviations must be non-negative");
    }
  }
};

// ---------------------------------------------------------------------------
// Initialisation

template <class Rng>
ParticleSet init_particles(const MaterialMap& map, const FilterConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<std::size_t> free_cells;
  for (std::size_t k = 0; k < map.cell_count(); ++k) {
    if (map.occupancy_layer()[k] == Occupancy::Free) free_cells.push_back(k);
  }
  if (free_cells.empty()) throw Error(ErrorKind::EmptyMap, "map has no free space to place particles");

  const auto n = static_cast<std::size_t>(cfg.n_max);
  const double w = 1.0 / static_cast<double>(n);
  ParticleSet set;
  set.reserve(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);

  if (cfg.init.mode == InitMode::UniformFreeSpace) {
    std::uniform_int_distribution<std::size_t> pick(0, free_cells.size() - 1);
    for (std::size_t k = 0; k < n; ++k) {
      const Cell c = map.cell_at(free_cells[pick(rng)]);
      double wx = 0.0, wy = 0.0;
      map.grid_to_world(c.i + unit(rng), c.j + unit(rng), wx, wy);
      set.push_back({Pose2(wx, wy, heading(rng)), w});
    }
    return set;
  }

  // Gaussian around the hypothesis; samples outside free space are redrawn.
  const InitConfig& g = cfg.init;
  if (!map.is_free(g.mean.x, g.mean.y) && g.std_xy == 0.0) {
    throw Error(ErrorKind::InvalidPose, "initial mean is not in free space");
  }
  std::normal_distribution<double> nx(g.mean.x, g.std_xy), ny(g.mean.y, g.std_xy), nt(0.0, g.std_theta);
  constexpr int kMaxAttempts = 100000;
  for (std::size_t k = 0; k < n; ++k) {
    int attempts = 0;
    while (true) {
      const double x = g.std_xy > 0.0 ? nx(rng) : g.mean.x;
      const double y = g.std_xy > 0.0 ? ny(rng) : g.mean.y;
      const double t = g.std_theta > 0.0 ? g.mean.theta + nt(rng) : g.mean.theta;
      if (map.is_free(x, y)) {
        set.push_back({Pose2(x, y, t), w});
        break;
      }
      if (++attempts > kMaxAttempts) {
        throw Error(ErrorKind::EmptyMap, "initial distribution has no mass in free space");
      }
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Prediction and weighting

template <class Rng>
void predict(ParticleSet& set, const OdometryDelta& delta, const MotionNoise& noise, Rng& rng) {
  for (Particle& p : set) p.pose = propagate(p.pose, delta, noise, rng);
}

inline double weight_sum(const ParticleSet& set) {
  double s = 0.0;
  for (const Particle& p : set) s += p.weight;
  return s;
}

inline void normalize_weights(ParticleSet& set) {
  const double total = weight_sum(set);
  if (!(total > 0.0) || !std::isfinite(total)) {
    const double w = 1.0 / static_cast<double>(set.size());
    for (Particle& p : set) p.weight = w;
    return;
  }
  for (Particle& p : set) p.weight /= total;
}

/// Multiplies each weight by the scan likelihood (evaluated in log space) and
/// renormalizes.
inline void update(ParticleSet& set, const PreparedScan& scan, const SensorModel& model,
                   unsigned workers = worker_count()) {
  if (scan.entries.empty()) return;
  std::vector<double> log_lik(set.size());
  parallel_for(
      set.size(), [&](std::size_t i) { log_lik[i] = model.scan_log_likelihood(scan, set[i].pose); }, workers);
  const double best = *std::max_element(log_lik.begin(), log_lik.end());
  if (!std::isfinite(best)) return;  // no particle carries information
  for (std::size_t i = 0; i < set.size(); ++i) set[i].weight *= std::exp(log_lik[i] - best);
  normalize_weights(set);
}

// ---------------------------------------------------------------------------
// Resampling and adaptive sizing

inline double effective_sample_size(const ParticleSet& set) {
  double sq = 0.0;
  for (const Particle& p : set) sq += p.weight * p.weight;
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

/// Number of samples bounding the KL error by epsilon with probability
/// 1 - delta for a histogram with `bins` occupied bins.
inline double kld_bound(std::size_t bins, double epsilon, double delta) {
  if (bins <= 1) return 0.0;
  const double k = static_cast<double>(bins - 1);
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - delta);
  const double a = 2.0 / (9.0 * k);
  const double c = 1.0 - a + std::sqrt(a) * z;
  return k / (2.0 * epsilon) * c * c * c;
}

inline std::size_t occupied_bins(const ParticleSet& set, const FilterConfig& cfg) {
  struct KeyHash {
    std::size_t operator()(const std::tuple<long, long, long>& k) const noexcept {
      const auto [a, b, c] = k;
      return static_cast<std::size_t>(mix_seed(static_cast<std::uint64_t>(a),
                                               mix_seed(static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(c))));
    }
  };
  std::unordered_set<std::tuple<long, long, long>, KeyHash> bins;
  for (const Particle& p : set) {
    bins.emplace(static_cast<long>(std::floor(p.pose.x / cfg.kld_bin_xy)),
                 static_cast<long>(std::floor(p.pose.y / cfg.kld_bin_xy)),
                 static_cast<long>(std::floor(p.pose.theta / cfg.kld_bin_theta)));
  }
  return bins.size();
}

inline int count_for_bins(std::size_t bins, const FilterConfig& cfg) {
  const double n = std::ceil(kld_bound(bins, cfg.kld_epsilon, cfg.kld_delta));
  return static_cast<int>(std::clamp(n, static_cast<double>(cfg.n_min), static_cast<double>(cfg.n_max)));
}

inline int adapt_count(const ParticleSet& set, const FilterConfig& cfg) {
  return count_for_bins(occupied_bins(set, cfg), cfg);
}

/// Low-variance resampling to `count` particles with uniform weights.
template <class Rng>
ParticleSet systematic_resample(const ParticleSet& set, std::size_t count, Rng& rng) {
  ParticleSet out;
  out.reserve(count);
  const double step = 1.0 / static_cast<double>(count);
  std::uniform_real_distribution<double> offset(0.0, step);
  double u = offset(rng);
  double cumulative = set.front().weight;
  std::size_t i = 0;
  for (std::size_t m = 0; m < count; ++m) {
    while (u > cumulative && i + 1 < set.size()) cumulative += set[++i].weight;
    out.push_back({set[i].pose, step});
    u += step;
  }
  return out;
}

/// Resamples when N_eff falls below the threshold; returns whether it did.
template <class Rng>
bool resample(ParticleSet& set, const FilterConfig& cfg, Rng& rng) {
  if (set.empty()) return false;
  const double n = static_cast<double>(set.size());
  if (!(effective_sample_size(set) < cfg.resample_threshold * n)) return false;
  const std::size_t count = cfg.adaptive ? static_cast<std::size_t>(adapt_count(set, cfg)) : set.size();
  set = systematic_resample(set, count, rng);
  return true;
}

// ---------------------------------------------------------------------------
// Estimation

struct PoseEstimate {
  Pose2 mean;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

/// Weighted mean (circular for heading) and covariance about it.
inline PoseEstimate estimate_pose(const ParticleSet& set) {
  if (set.empty()) throw Error(ErrorKind::InvalidArgument, "cannot estimate from an empty particle set");
  double total = 0.0, mx = 0.0, my = 0.0, sx = 0.0, cx = 0.0;
  for (const Particle& p : set) {
    total += p.weight;
    mx += p.weight * p.pose.x;
    my += p.weight * p.pose.y;
    sx += p.weight * std::sin(p.pose.theta);
    cx += p.weight * std::cos(p.pose.theta);
  }
  PoseEstimate est;
  est.mean = Pose2(mx / total, my / total, std::atan2(sx, cx));
  for (const Particle& p : set) {
    const Eigen::Vector3d r(p.pose.x - est.mean.x, p.pose.y - est.mean.y, wrap_angle(p.pose.theta - est.mean.theta));
    est.covariance += (p.weight / total) * r * r.transpose();
  }
  return est;
}

// ---------------------------------------------------------------------------

/// Single-owner MCL state machine: init, then predict/update/resample per
/// odometry + scan record.
class ParticleFilter {
 public:
  ParticleFilter(const MaterialMap& map, FilterConfig cfg) : map_(map), cfg_(std::move(cfg)), rng_(cfg_.rng_seed) {
    cfg_.validate();
    particles_ = init_particles(map_, cfg_, rng_);
  }

  const ParticleSet& particles() const noexcept { return particles_; }
  const FilterConfig& config() const noexcept { return cfg_; }

  void predict(const OdometryDelta& delta) { spectral_mcl::predict(particles_, delta, cfg_.motion_noise, rng_); }

  void update(const PreparedScan& scan, const SensorModel& model, unsigned workers = worker_count()) {
    spectral_mcl::update(particles_, scan, model, workers);
  }

  bool resample() { return spectral_mcl::resample(particles_, cfg_, rng_); }

  PoseEstimate estimate() const { return estimate_pose(particles_); }

 private:
  const MaterialMap& map_;
  FilterConfig cfg_;
  std::mt19937_64 rng_;
  ParticleSet particles_;
};

}  // namespace spectral_mcl
