#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "spectral_mcl/motion.hpp"
#include "spectral_mcl/pose.hpp"

using namespace spectral_mcl;
using Catch::Approx;
using fixture::kind_of;

namespace {

constexpr double kPi = std::numbers::pi;

bool wrapped(double a) { return a > -kPi && a <= kPi; }

}  // namespace

TEST_CASE("angle wrapping") {
  CHECK(wrap_angle(kPi) == kPi);
  CHECK(wrap_angle(-kPi) == Approx(kPi));
  CHECK(wrap_angle(3 * kPi) == Approx(kPi));
  CHECK(wrap_angle(2 * kPi) == Approx(0.0).margin(1e-15));
  CHECK(wrap_angle(-0.5) == -0.5);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int k = 0; k < 10000; ++k) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    CHECK(wrapped(w));
    CHECK(std::abs(std::remainder(a - w, 2 * kPi)) < 1e-9);
  }
  CHECK(Pose2(0, 0, -kPi).theta == Approx(kPi));
}

TEST_CASE("pose composition") {
  const Pose2 a = compose(Pose2(0, 0, 0), OdometryDelta{1, 0, 0});
  CHECK(a.x == 1.0);
  CHECK(a.y == 0.0);
  const Pose2 b = compose(Pose2(0, 0, kPi / 2), OdometryDelta{1, 0, 0});
  CHECK(b.x == Approx(0.0).margin(1e-15));
  CHECK(b.y == Approx(1.0));
  CHECK(b.theta == Approx(kPi / 2));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const Pose2 p(u(rng), u(rng), u(rng));
    const OdometryDelta d{u(rng), u(rng), u(rng)};
    const Pose2 back = compose(compose(p, d), inverse(d));
    CHECK(back.x == Approx(p.x).margin(1e-12));
    CHECK(back.y == Approx(p.y).margin(1e-12));
    CHECK(std::abs(wrap_angle(back.theta - p.theta)) < 1e-12);
    CHECK(wrapped(compose(p, d).theta));

    const Pose2 q(u(rng), u(rng), u(rng)), r(u(rng), u(rng), u(rng));
    const Pose2 l = compose(compose(p, q), r), rr = compose(p, compose(q, r));
    CHECK(l.x == Approx(rr.x).margin(1e-12));
    CHECK(l.y == Approx(rr.y).margin(1e-12));
    CHECK(std::abs(wrap_angle(l.theta - rr.theta)) < 1e-12);

    const Pose2 id = compose(p, OdometryDelta{});
    CHECK(id == p);

    const OdometryDelta bt = between(p, q);
    const Pose2 q2 = compose(p, bt);
    CHECK(q2.x == Approx(q.x).margin(1e-12));
    CHECK(q2.y == Approx(q.y).margin(1e-12));
    CHECK(std::abs(wrap_angle(q2.theta - q.theta)) < 1e-12);
  }
}

TEST_CASE("beam projection") {
  double x = 0, y = 0;
  project_beam(Pose2(1, 1, kPi / 2), -kPi / 2, 2.0, x, y);
  CHECK(x == Approx(3.0));
  CHECK(y == Approx(1.0));
}

TEST_CASE("covariance validation") {
  Eigen::Matrix3d asym = Eigen::Matrix3d::Identity();
  asym(0, 1) = 0.5;
  CHECK(kind_of([&] { MotionNoise n(asym); }) == ErrorKind::InvalidCovariance);
  Eigen::Matrix3d neg = Eigen::Matrix3d::Identity();
  neg(2, 2) = -0.1;
  CHECK(kind_of([&] { MotionNoise n(neg); }) == ErrorKind::InvalidCovariance);
  Eigen::Matrix3d nan = Eigen::Matrix3d::Identity();
  nan(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of([&] { MotionNoise n(nan); }) == ErrorKind::InvalidCovariance);

  // Semi-definite (axis-locked) is fine.
  Eigen::Matrix3d semi = Eigen::Matrix3d::Zero();
  semi(0, 0) = 0.01;
  const MotionNoise locked(semi);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const OdometryDelta d = locked.sample(OdometryDelta{1, 2, 0.3}, rng);
    CHECK(d.dy == Approx(2.0).margin(1e-12));
    CHECK(d.dtheta == Approx(0.3).margin(1e-12));
  }
}

TEST_CASE("propagation") {
  const Pose2 p(1.0, -2.0, 0.7);
  const OdometryDelta d{0.3, -0.1, 0.2};
  CHECK(propagate(p, d, MotionNoise(), 5) == compose(p, d));
  const MotionNoise n = MotionNoise::diagonal(0.05, 0.05, 0.05);
  CHECK(propagate(p, d, n, 9) == propagate(p, d, n, 9));
  CHECK_FALSE(propagate(p, d, n, 9) == propagate(p, d, n, 10));

  // Monte-Carlo mean of propagated poses.
  const double sigma = 0.05;
  const int n_samples = 100000;
  std::mt19937_64 rng(11);
  double mx = 0, my = 0, mt = 0;
  for (int k = 0; k < n_samples; ++k) {
    const Pose2 q = propagate(p, d, n, rng);
    mx += q.x;
    my += q.y;
    mt += q.theta;
  }
  const Pose2 expect = compose(p, d);
  const double tol = 4.0 * sigma / std::sqrt(static_cast<double>(n_samples));
  CHECK(std::abs(mx / n_samples - expect.x) < tol);
  CHECK(std::abs(my / n_samples - expect.y) < tol);
  CHECK(std::abs(mt / n_samples - expect.theta) < tol);
}

TEST_CASE("sampled delta covariance matches the model") {
  Eigen::Matrix3d cov;
  cov << 0.04, 0.01, 0.002, 0.01, 0.09, -0.003, 0.002, -0.003, 0.01;
  const MotionNoise n(cov);
  std::mt19937_64 rng(21);
  const int count = 100000;
  std::vector<Eigen::Vector3d> s(count);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (auto& v : s) {
    const OdometryDelta d = n.sample(OdometryDelta{}, rng);
    v = Eigen::Vector3d(d.dx, d.dy, d.dtheta);
    mean += v;
  }
  mean /= count;
  Eigen::Matrix3d emp = Eigen::Matrix3d::Zero();
  for (const auto& v : s) emp += (v - mean) * (v - mean).transpose();
  emp /= count - 1;
  // Diagonal and the dominant off-diagonal entries within 5% relative.
  for (int i = 0; i < 3; ++i) CHECK(emp(i, i) == Approx(cov(i, i)).epsilon(0.05));
  CHECK(emp(0, 1) == Approx(cov(0, 1)).epsilon(0.05));
  // Small correlations are checked against their sampling error instead.
  for (auto [i, j] : {std::pair{0, 2}, std::pair{1, 2}}) {
    const double se = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / count);
    CHECK(std::abs(emp(i, j) - cov(i, j)) < 4.0 * se);
  }
}
