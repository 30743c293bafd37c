#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/spectrum.hpp"

namespace spectral_mcl {

enum class MetricKind { SLK, ModL2, Wasserstein, KL, SAM };

inline constexpr std::array<MetricKind, 5> kAllMetrics = {MetricKind::SLK, MetricKind::ModL2,
                                                         MetricKind::Wasserstein, MetricKind::KL,
                                                         MetricKind::SAM};

constexpr std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::SLK: return "slk";
    case MetricKind::ModL2: return "mod-l2";
    case MetricKind::Wasserstein: return "wasserstein";
    case MetricKind::KL: return "kl";
    case MetricKind::SAM: return "sam";
  }
  return "unknown";
}

inline MetricKind parse_metric(std::string_view name) {
  for (MetricKind k : kAllMetrics) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown similarity metric '" + std::string(name) + "'");
}

struct SimilarityMetric {
  MetricKind kind = MetricKind::ModL2;
  int window = 2;      // SLK half-window W
  double scale = 1.0;  // K in exp(-d^2 / K)

  void validate() const {
    if (window < 1) throw Error(ErrorKind::InvalidArgument, "SLK window must be >= 1");
    if (!(scale > 0.0)) throw Error(ErrorKind::InvalidScale, "metric scale K must be positive");
  }
};

inline constexpr double kKlFloor = 1e-9;

namespace detail {

/// Spectral linear kernel with window indices clamped into range. Bilinear
/// and symmetric in (a, b).
inline double slk_kernel(std::span<const double> a, std::span<const double> b, int window) {
  const auto n = static_cast<std::ptrdiff_t>(a.size());
  double total = 0.0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = a[i] * b[i];
    for (std::ptrdiff_t off = -window; off <= window; ++off) {
      const std::ptrdiff_t j = std::clamp<std::ptrdiff_t>(i + off, 0, n - 1);
      acc += (a[i] - a[j]) * (b[i] - b[j]);
    }
    total += acc;
  }
  return total;
}

}  // namespace detail

/// Kernel-induced squared distance k(a,a) + k(b,b) - 2 k(a,b). Because the
/// kernel is bilinear this equals k(a-b, a-b), which is evaluated directly.
/// Expects min-max normalized operands.
inline double dist_slk(const Spectrum& a, const Spectrum& b, int window) {
  require_comparable(a, b);
  if (window < 1) throw Error(ErrorKind::InvalidArgument, "SLK window must be >= 1");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return std::max(0.0, detail::slk_kernel(diff, diff, window));
}

/// Modified Euclidean distance. `observed` supplies the weight
/// w = max/(1 - max), inverted when max <= 0.5; `map` intensities play x_i.
/// Expects unit-sum operands.
inline double dist_mod_l2(const Spectrum& observed, const Spectrum& map) {
  require_comparable(observed, map);
  const double peak = observed.max();
  if (!(peak > 0.0) || !(peak < 1.0)) {
    throw Error(ErrorKind::DegenerateWeight, "observed maximum must lie strictly inside (0, 1)");
  }
  double w = peak / (1.0 - peak);
  if (peak <= 0.5) w = 1.0 / w;

  double total = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double x = map[i];
    const double z = observed[i];
    const double d = (z - x) * (z - x);
    if (z > x) {
      total += x != 0.0 ? d / w : d * w;
    } else {
      total += d;
    }
  }
  return std::sqrt(total);
}

/// 1-D earth mover's distance in bin units via the CDF difference.
/// Expects unit-sum operands.
inline double dist_wasserstein(const Spectrum& a, const Spectrum& b) {
  require_comparable(a, b);
  double cdf_a = 0.0, cdf_b = 0.0, total = 0.0;
  // The last CDF difference is zero for unit-sum inputs.
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    cdf_a += a[i];
    cdf_b += b[i];
    total += std::abs(cdf_a - cdf_b);
  }
  return total;
}

/// KL(observed || map) in nats, both operands floored by kKlFloor and
/// renormalized.
inline double dist_kl(const Spectrum& observed, const Spectrum& map) {
  require_comparable(observed, map);
  const std::size_t n = observed.size();
  const double floor_mass = kKlFloor * static_cast<double>(n);
  const double norm_a = observed.sum() + floor_mass;
  const double norm_b = map.sum() + floor_mass;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (observed[i] + kKlFloor) / norm_a;
    const double q = (map[i] + kKlFloor) / norm_b;
    total += p * std::log(p / q);
  }
  return std::max(0.0, total);
}

/// Spectral angle in radians.
inline double dist_sam(const Spectrum& a, const Spectrum& b) {
  require_comparable(a, b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw Error(ErrorKind::ZeroSpectrum, "spectral angle undefined for a zero spectrum");
  }
  if (a == b) return 0.0;
  const double cosine = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
  return std::acos(cosine);
}

/// Distance under `metric` between spectra already prepared for it (see
/// prepare_for_metric). Directional metrics take the observation first.
inline double spectral_distance(const SimilarityMetric& metric, const Spectrum& observed, const Spectrum& map) {
  switch (metric.kind) {
    case MetricKind::SLK: return dist_slk(observed, map, metric.window);
    case MetricKind::ModL2: return dist_mod_l2(observed, map);
    case MetricKind::Wasserstein: return dist_wasserstein(observed, map);
    case MetricKind::KL: return dist_kl(observed, map);
    case MetricKind::SAM: return dist_sam(observed, map);
  }
  return 0.0;
}

/// Squared-exponential map from spectral distance to likelihood.
inline double distance_to_likelihood(double d, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorKind::InvalidScale, "scale K must be positive");
  return std::exp(-(d * d) / scale);
}

/// Normalization each metric expects: min-max for SLK, unit-sum otherwise.
inline Spectrum normalize_for_metric(MetricKind kind, const Spectrum& s) {
  return kind == MetricKind::SLK ? normalize_minmax(s) : normalize_unit_sum(s);
}

inline constexpr int kDefaultBaselineOrder = 3;

/// Baseline correction followed by the metric's normalization.
inline Spectrum prepare_for_metric(MetricKind kind, const Spectrum& raw, int baseline_order = kDefaultBaselineOrder) {
  return normalize_for_metric(kind, baseline_correct(raw, baseline_order));
}

/// Median of all pairwise distances between distinct library spectra (both
/// orders for directional metrics). Inputs must already be prepared.
inline double median_pairwise_distance(std::span<const Spectrum> library, const SimilarityMetric& metric) {
  std::vector<double> distances;
  for (std::size_t i = 0; i < library.size(); ++i) {
    for (std::size_t j = 0; j < library.size(); ++j) {
      if (i == j || library[i] == library[j]) continue;
      distances.push_back(spectral_distance(metric, library[i], library[j]));
    }
  }
  if (distances.empty()) {
    throw Error(ErrorKind::InsufficientLibrary, "need at least two distinct library spectra");
  }
  std::sort(distances.begin(), distances.end());
  const std::size_t m = distances.size();
  return m % 2 == 1 ? distances[m / 2] : 0.5 * (distances[m / 2 - 1] + distances[m / 2]);
}

/// K such that the median inter-material distance maps to likelihood 0.5.
inline double calibrate_scale(std::span<const Spectrum> library, const SimilarityMetric& metric) {
  if (library.size() < 2) {
    throw Error(ErrorKind::InsufficientLibrary, "need at least two library spectra");
  }
  const double median = median_pairwise_distance(library, metric);
  if (!(median > 0.0)) {
    throw Error(ErrorKind::InsufficientLibrary, "library spectra are indistinguishable under this metric");
  }
  return median * median / std::numbers::ln2;
}

}  // namespace spectral_mcl
