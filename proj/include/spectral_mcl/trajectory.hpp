#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/pose.hpp"
#include "spectral_mcl/text_io.hpp"

namespace spectral_mcl {

struct TimedPose {
  double t = 0.0;
  Pose2 pose;
  friend bool operator==(const TimedPose&, const TimedPose&) = default;
};

/// Timestamped poses with strictly increasing timestamps.
struct TrajectoryLog {
  std::vector<TimedPose> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  void append(double t, const Pose2& pose) {
    if (!samples.empty() && !(t > samples.back().t)) {
      throw Error(ErrorKind::InvalidArgument, "trajectory timestamps must be strictly increasing");
    }
    samples.push_back({t, pose});
  }

  void validate() const {
    for (std::size_t k = 1; k < samples.size(); ++k) {
      if (!(samples[k].t > samples[k - 1].t)) {
        throw Error(ErrorKind::InvalidArgument, "trajectory timestamps must be strictly increasing");
      }
    }
  }

  friend bool operator==(const TrajectoryLog&, const TrajectoryLog&) = default;
};

// TUM text format: `timestamp tx ty tz qx qy qz qw`; planar poses use tz = 0
// and a pure-yaw quaternion.

/// Heading whose half-angle sine/cosine reproduce (qz, qw) exactly when such
/// a double exists nearby, so emitted files parse and re-emit identically.
inline double yaw_from_quaternion(double qz, double qw) {
  const double yaw = 2.0 * std::atan2(qz, qw);
  auto reproduces = [&](double a) { return std::sin(a / 2.0) == qz && std::cos(a / 2.0) == qw; };
  double up = yaw, down = yaw;
  for (int k = 0; k <= 8; ++k) {
    if (reproduces(up)) return up;
    if (reproduces(down)) return down;
    up = std::nextafter(up, 10.0);
    down = std::nextafter(down, -10.0);
  }
  return yaw;
}

inline void write_tum(std::ostream& out, const TrajectoryLog& log) {
  for (const TimedPose& s : log.samples) {
    // Half-angle of a wrapped heading stays in (-pi/2, pi/2], so qw >= 0.
    const double half = s.pose.theta / 2.0;
    out << format_double(s.t) << ' ' << format_double(s.pose.x) << ' ' << format_double(s.pose.y) << " 0 0 0 "
        << format_double(std::sin(half)) << ' ' << format_double(std::cos(half)) << '\n';
  }
}

inline TrajectoryLog read_tum(std::istream& in, const std::string& origin = "<stream>") {
  TrajectoryLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream fields{std::string(t)};
    std::string tok;
    std::vector<double> v;
    const std::string where = origin + ":" + std::to_string(line_no);
    while (fields >> tok) v.push_back(parse_double(tok, where));
    if (v.size() != 8) throw Error(ErrorKind::ParseError, where + ": expected 8 TUM fields");
    const double yaw = (v[4] == 0.0 && v[5] == 0.0)
                           ? yaw_from_quaternion(v[6], v[7])
                           : std::atan2(2.0 * (v[7] * v[6] + v[4] * v[5]), 1.0 - 2.0 * (v[5] * v[5] + v[6] * v[6]));
    Pose2 p;
    p.x = v[1];
    p.y = v[2];
    p.theta = wrap_angle(yaw);
    log.append(v[0], p);
  }
  return log;
}

inline TrajectoryLog load_tum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open trajectory " + path);
  return read_tum(in, path);
}

inline void save_tum(const std::string& path, const TrajectoryLog& log) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write trajectory " + path);
  write_tum(out, log);
}

}  // namespace spectral_mcl
