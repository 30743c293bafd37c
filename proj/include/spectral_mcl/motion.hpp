#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/pose.hpp"

namespace spectral_mcl {

/// Odometry covariance over (dx, dy, dtheta), sampled in the delta frame.
/// Semi-definite matrices are accepted: negative round-off eigenvalues are
/// clamped to zero before taking the square root.
class MotionNoise {
 public:
  MotionNoise() : covariance_(Eigen::Matrix3d::Zero()), factor_(Eigen::Matrix3d::Zero()) {}

  explicit MotionNoise(const Eigen::Matrix3d& covariance) : covariance_(covariance) {
    if (!covariance.allFinite()) throw Error(ErrorKind::InvalidCovariance, "covariance has non-finite entries");
    const double tol = 1e-12 * std::max(1.0, covariance.cwiseAbs().maxCoeff());
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > tol) {
      throw Error(ErrorKind::InvalidCovariance, "covariance must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(covariance);
    Eigen::Vector3d values = eig.eigenvalues();
    if (values.minCoeff() < -tol) {
      throw Error(ErrorKind::InvalidCovariance, "covariance must be positive semi-definite");
    }
    values = values.cwiseMax(0.0);
    factor_ = eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
  }

  static MotionNoise diagonal(double sigma_x, double sigma_y, double sigma_theta) {
    return MotionNoise(Eigen::Vector3d(sigma_x * sigma_x, sigma_y * sigma_y, sigma_theta * sigma_theta)
                           .asDiagonal()
                           .toDenseMatrix());
  }

  const Eigen::Matrix3d& covariance() const noexcept { return covariance_; }
  bool is_zero() const { return covariance_.isZero(0.0); }

  /// A draw from N(d, covariance).
  template <class Rng>
  OdometryDelta sample(const OdometryDelta& d, Rng& rng) const {
    if (is_zero()) return d;
    std::normal_distribution<double> unit(0.0, 1.0);
    const Eigen::Vector3d z(unit(rng), unit(rng), unit(rng));
    const Eigen::Vector3d e = factor_ * z;
    return {d.dx + e.x(), d.dy + e.y(), d.dtheta + e.z()};
  }

 private:
  Eigen::Matrix3d covariance_;
  Eigen::Matrix3d factor_;
};

template <class Rng>
Pose2 propagate(const Pose2& p, const OdometryDelta& d, const MotionNoise& noise, Rng& rng) {
  return compose(p, noise.sample(d, rng));
}

inline Pose2 propagate(const Pose2& p, const OdometryDelta& d, const MotionNoise& noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return propagate(p, d, noise, rng);
}

}  // namespace spectral_mcl
