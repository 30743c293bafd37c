#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spectral_mcl/error.hpp"

namespace spectral_mcl {

/// Default wavenumber grid: 200-3000 cm^-1 sampled at 512 bins.
inline constexpr double kDefaultGridStart = 200.0;
inline constexpr double kDefaultGridEnd = 3000.0;
inline constexpr std::size_t kDefaultBins = 512;
inline constexpr double kDefaultGridStep =
    (kDefaultGridEnd - kDefaultGridStart) / static_cast<double>(kDefaultBins - 1);

/// Intensities sampled on a uniform wavenumber grid. Immutable once built;
/// every intensity is non-negative.
class Spectrum {
 public:
  Spectrum(double grid_start, double grid_step, std::vector<double> intensities)
      : grid_start_(grid_start), grid_step_(grid_step), intensities_(std::move(intensities)) {
    if (!(grid_step_ > 0.0) || !std::isfinite(grid_start_)) {
      throw Error(ErrorKind::InvalidArgument, "spectrum grid step must be positive");
    }
    if (intensities_.size() < 2) {
      throw Error(ErrorKind::InvalidArgument, "spectrum needs at least two bins");
    }
    for (double v : intensities_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::InvalidArgument, "spectrum intensities must be finite and non-negative");
      }
    }
  }

  /// Spectrum on the default wavenumber grid.
  explicit Spectrum(std::vector<double> intensities) : Spectrum(kDefaultGridStart, 1.0, std::move(intensities)) {
    grid_step_ = (kDefaultGridEnd - kDefaultGridStart) / static_cast<double>(intensities_.size() - 1);
  }

  double grid_start() const noexcept { return grid_start_; }
  double grid_step() const noexcept { return grid_step_; }
  std::size_t size() const noexcept { return intensities_.size(); }
  std::span<const double> intensities() const noexcept { return intensities_; }
  double operator[](std::size_t i) const { return intensities_[i]; }
  double wavenumber(std::size_t i) const { return grid_start_ + grid_step_ * static_cast<double>(i); }

  double sum() const { return std::accumulate(intensities_.begin(), intensities_.end(), 0.0); }
  double max() const { return *std::max_element(intensities_.begin(), intensities_.end()); }
  double min() const { return *std::min_element(intensities_.begin(), intensities_.end()); }

  bool comparable_with(const Spectrum& other) const noexcept {
    return grid_start_ == other.grid_start_ && grid_step_ == other.grid_step_ && size() == other.size();
  }

  /// Same grid, new intensities.
  Spectrum with_intensities(std::vector<double> values) const {
    return Spectrum(grid_start_, grid_step_, std::move(values));
  }

  friend bool operator==(const Spectrum& a, const Spectrum& b) {
    return a.comparable_with(b) && a.intensities_ == b.intensities_;
  }

 private:
  double grid_start_;
  double grid_step_;
  std::vector<double> intensities_;
};

inline void require_comparable(const Spectrum& a, const Spectrum& b) {
  if (!a.comparable_with(b)) {
    throw Error(ErrorKind::GridMismatch, "spectra are sampled on different wavenumber grids");
  }
}

inline Spectrum normalize_unit_sum(const Spectrum& s) {
  const double total = s.sum();
  if (!(total > 0.0)) {
    throw Error(ErrorKind::ZeroSpectrum, "cannot unit-sum normalize an all-zero spectrum");
  }
  std::vector<double> out(s.intensities().begin(), s.intensities().end());
  for (double& v : out) v /= total;
  return s.with_intensities(std::move(out));
}

inline Spectrum normalize_minmax(const Spectrum& s) {
  const double lo = s.min();
  const double hi = s.max();
  if (!(hi > lo)) {
    throw Error(ErrorKind::ZeroSpectrum, "cannot min-max normalize a constant spectrum");
  }
  std::vector<double> out(s.size());
  const double span = hi - lo;
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = (s[i] - lo) / span;
  return s.with_intensities(std::move(out));
}

/// Least-squares polynomial baseline removal. The polynomial is fitted over
/// the bin index (mapped onto [-1, 1] for conditioning); negative residuals
/// are clipped to zero.
inline Spectrum baseline_correct(const Spectrum& s, int poly_order = 3) {
  const auto n = static_cast<Eigen::Index>(s.size());
  if (poly_order < 0 || poly_order >= n - 1) {
    throw Error(ErrorKind::InvalidOrder,
                "baseline order " + std::to_string(poly_order) + " invalid for " + std::to_string(n) + " bins");
  }
  Eigen::MatrixXd design(n, poly_order + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
    double p = 1.0;
    for (int k = 0; k <= poly_order; ++k) {
      design(i, k) = p;
      p *= u;
    }
    y(i) = s[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coeffs = design.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd fitted = design * coeffs;
  std::vector<double> out(s.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = y(i) - fitted(i);
    // Exact fits leave ~1e-16 residue; treat it as zero.
    out[static_cast<std::size_t>(i)] = r > 1e-12 * (1.0 + std::abs(y(i))) ? r : 0.0;
  }
  return s.with_intensities(std::move(out));
}

// ---------------------------------------------------------------------------
// Sensor noise

struct NoiseConfig {
  double shot_scale = 200.0;            // expected photon counts per unit intensity; 0 disables
  double read_sigma = 0.01;             // additive Gaussian read noise
  double baseline_coeffs_sigma = 0.05;  // std of cubic baseline drift coefficients
  std::uint64_t rng_seed = 0;

  static NoiseConfig none() { return NoiseConfig{0.0, 0.0, 0.0, 0}; }

  bool is_noise_free() const { return shot_scale == 0.0 && read_sigma == 0.0 && baseline_coeffs_sigma == 0.0; }

  void validate() const {
    if (!(shot_scale >= 0.0) || !(read_sigma >= 0.0) || !(baseline_coeffs_sigma >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "noise parameters must be non-negative");
    }
  }
};

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr int kNoiseBaselineOrder = 3;

/// Shot (Poisson), read (Gaussian) and polynomial baseline noise, clipped at
/// zero. Deterministic for a fixed cfg.rng_seed.
inline Spectrum apply_sensor_noise(const Spectrum& s, const NoiseConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  std::vector<double> out(s.intensities().begin(), s.intensities().end());
  if (cfg.shot_scale > 0.0) {
    for (double& v : out) {
      const double mean_counts = cfg.shot_scale * v;
      if (mean_counts > 0.0) {
        std::poisson_distribution<long long> shot(mean_counts);
        v = static_cast<double>(shot(rng)) / cfg.shot_scale;
      }
    }
  }
  if (cfg.read_sigma > 0.0) {
    for (double& v : out) v += cfg.read_sigma * unit_normal(rng);
  }
  if (cfg.baseline_coeffs_sigma > 0.0) {
    double coeffs[kNoiseBaselineOrder + 1];
    for (double& c : coeffs) c = cfg.baseline_coeffs_sigma * unit_normal(rng);
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double u = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
      double p = 1.0, b = 0.0;
      for (double c : coeffs) {
        b += c * p;
        p *= u;
      }
      out[i] += b;
    }
  }
  for (double& v : out) v = std::max(v, 0.0);
  return s.with_intensities(std::move(out));
}

}  // namespace spectral_mcl
