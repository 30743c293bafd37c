#pragma once

#include <cmath>
#include <numbers>

namespace spectral_mcl {

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;
  a = std::remainder(a, 2.0 * std::numbers::pi);  // [-pi, pi]
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

/// SE(2) pose; theta is kept wrapped to (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

/// Relative motion expressed in the frame of the previous pose.
struct OdometryDelta {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;

  bool is_finite() const { return std::isfinite(dx) && std::isfinite(dy) && std::isfinite(dtheta); }
  friend bool operator==(const OdometryDelta&, const OdometryDelta&) = default;
};

inline Pose2 compose(const Pose2& p, const OdometryDelta& d) {
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  return Pose2(p.x + c * d.dx - s * d.dy, p.y + s * d.dx + c * d.dy, p.theta + d.dtheta);
}

inline Pose2 compose(const Pose2& a, const Pose2& b) { return compose(a, OdometryDelta{b.x, b.y, b.theta}); }

inline Pose2 inverse(const Pose2& p) {
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  return Pose2(-c * p.x - s * p.y, s * p.x - c * p.y, -p.theta);
}

inline OdometryDelta inverse(const OdometryDelta& d) {
  const Pose2 inv = inverse(Pose2(d.dx, d.dy, d.dtheta));
  return {inv.x, inv.y, inv.theta};
}

/// The delta d with compose(from, d) == to.
inline OdometryDelta between(const Pose2& from, const Pose2& to) {
  const double c = std::cos(from.theta), s = std::sin(from.theta);
  const double ex = to.x - from.x, ey = to.y - from.y;
  return {c * ex + s * ey, -s * ex + c * ey, wrap_angle(to.theta - from.theta)};
}

/// Point `range` metres along `bearing` (robot frame) from pose p.
inline void project_beam(const Pose2& p, double bearing, double range, double& wx, double& wy) {
  const double a = p.theta + bearing;
  wx = p.x + range * std::cos(a);
  wy = p.y + range * std::sin(a);
}

}  // namespace spectral_mcl
