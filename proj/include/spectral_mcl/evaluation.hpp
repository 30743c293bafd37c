#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/pose.hpp"
#include "spectral_mcl/trajectory.hpp"

namespace spectral_mcl {

struct ErrorStats {
  double rmse = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

inline ErrorStats compute_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::InsufficientData, "no residuals to summarize");
  ErrorStats s;
  s.count = values.size();
  const double n = static_cast<double>(values.size());
  double sum = 0.0, sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
  }
  s.mean = sum / n;
  s.rmse = std::sqrt(sum_sq / n);
  double dev = 0.0;
  for (double v : values) dev += (v - s.mean) * (v - s.mean);
  s.sd = values.size() > 1 ? std::sqrt(dev / (n - 1.0)) : 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  s.median = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

struct PosePair {
  double t_est = 0.0;
  double t_gt = 0.0;
  Pose2 est;
  Pose2 gt;
};

/// Greedy timestamp association: candidate pairs with |dt| <= max_dt are
/// accepted in order of increasing |dt|, each sample used at most once.
/// Result is sorted by estimate timestamp.
inline std::vector<PosePair> associate(const TrajectoryLog& est, const TrajectoryLog& gt, double max_dt) {
  if (est.empty() || gt.empty()) throw Error(ErrorKind::NoOverlap, "cannot associate an empty trajectory");
  struct Candidate {
    double dt;
    std::size_t e, g;
  };
  std::vector<Candidate> candidates;
  std::size_t g_lo = 0;
  for (std::size_t e = 0; e < est.size(); ++e) {
    const double te = est.samples[e].t;
    while (g_lo < gt.size() && gt.samples[g_lo].t < te - max_dt) ++g_lo;
    for (std::size_t g = g_lo; g < gt.size() && gt.samples[g].t <= te + max_dt; ++g) {
      candidates.push_back({std::abs(te - gt.samples[g].t), e, g});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.dt < b.dt; });
  std::vector<bool> used_e(est.size(), false), used_g(gt.size(), false);
  std::vector<PosePair> pairs;
  for (const Candidate& c : candidates) {
    if (used_e[c.e] || used_g[c.g]) continue;
    used_e[c.e] = used_g[c.g] = true;
    pairs.push_back({est.samples[c.e].t, gt.samples[c.g].t, est.samples[c.e].pose, gt.samples[c.g].pose});
  }
  if (pairs.empty()) throw Error(ErrorKind::NoOverlap, "no timestamps within max_dt");
  std::sort(pairs.begin(), pairs.end(), [](const PosePair& a, const PosePair& b) { return a.t_est < b.t_est; });
  return pairs;
}

/// Least-squares rigid transform T (rotation + translation, no scale) that
/// minimizes sum |T * est - gt|^2 over the pair positions.
inline Pose2 align_rigid(std::span<const PosePair> pairs) {
  if (pairs.size() < 2) throw Error(ErrorKind::DegenerateGeometry, "alignment needs at least two pairs");
  const double n = static_cast<double>(pairs.size());
  double ex = 0.0, ey = 0.0, gx = 0.0, gy = 0.0;
  for (const PosePair& p : pairs) {
    ex += p.est.x;
    ey += p.est.y;
    gx += p.gt.x;
    gy += p.gt.y;
  }
  ex /= n;
  ey /= n;
  gx /= n;
  gy /= n;
  double cross = 0.0, dot = 0.0, spread = 0.0;
  for (const PosePair& p : pairs) {
    const double ax = p.est.x - ex, ay = p.est.y - ey;
    const double bx = p.gt.x - gx, by = p.gt.y - gy;
    dot += ax * bx + ay * by;
    cross += ax * by - ay * bx;
    spread += ax * ax + ay * ay;
  }
  if (!(spread > 1e-24)) throw Error(ErrorKind::DegenerateGeometry, "estimated positions are all coincident");
  const double angle = std::atan2(cross, dot);
  const double c = std::cos(angle), s = std::sin(angle);
  return Pose2(gx - (c * ex - s * ey), gy - (s * ex + c * ey), angle);
}

inline std::vector<double> ate_residuals(std::span<const PosePair> pairs, const Pose2& transform) {
  std::vector<double> r;
  r.reserve(pairs.size());
  for (const PosePair& p : pairs) {
    const Pose2 aligned = compose(transform, p.est);
    r.push_back(std::hypot(aligned.x - p.gt.x, aligned.y - p.gt.y));
  }
  return r;
}

inline ErrorStats compute_ate(std::span<const PosePair> pairs) {
  const Pose2 transform = align_rigid(pairs);
  return compute_stats(ate_residuals(pairs, transform));
}

inline ErrorStats compute_ate(const TrajectoryLog& est, const TrajectoryLog& gt, double max_dt) {
  return compute_ate(associate(est, gt, max_dt));
}

/// ATE over the last half of the associated pairs (aligned on that half).
inline ErrorStats compute_ate_final_half(const TrajectoryLog& est, const TrajectoryLog& gt, double max_dt) {
  const std::vector<PosePair> pairs = associate(est, gt, max_dt);
  const std::size_t start = pairs.size() / 2;
  return compute_ate(std::span<const PosePair>(pairs).subspan(start));
}

struct RpeStats {
  ErrorStats translational;  // metres
  ErrorStats rotational;     // degrees
};

inline RpeStats compute_rpe(std::span<const PosePair> pairs, std::size_t delta = 1) {
  if (delta == 0 || pairs.size() < delta + 1) {
    throw Error(ErrorKind::InsufficientData, "RPE needs at least delta + 1 associated poses");
  }
  std::vector<double> trans, rot;
  for (std::size_t i = 0; i + delta < pairs.size(); ++i) {
    const Pose2 gt_rel = compose(inverse(pairs[i].gt), pairs[i + delta].gt);
    const Pose2 est_rel = compose(inverse(pairs[i].est), pairs[i + delta].est);
    const Pose2 err = compose(inverse(gt_rel), est_rel);
    trans.push_back(std::hypot(err.x, err.y));
    rot.push_back(std::abs(err.theta) * 180.0 / std::numbers::pi);
  }
  return {compute_stats(trans), compute_stats(rot)};
}

inline RpeStats compute_rpe(const TrajectoryLog& est, const TrajectoryLog& gt, std::size_t delta, double max_dt) {
  return compute_rpe(associate(est, gt, max_dt), delta);
}

}  // namespace spectral_mcl
