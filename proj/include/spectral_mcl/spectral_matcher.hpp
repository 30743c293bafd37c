#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "spectral_mcl/similarity.hpp"
#include "spectral_mcl/spectral_library.hpp"

namespace spectral_mcl {

/// A library prepared for one similarity metric: preprocessed reference
/// spectra, the calibrated scale K, and the inter-material distance table.
class SpectralMatcher {
 public:
  SpectralMatcher(const SpectralLibrary& library, MetricKind kind, int window = 2,
                  std::optional<double> scale_override = std::nullopt,
                  int baseline_order = kDefaultBaselineOrder)
      : baseline_order_(baseline_order) {
    metric_.kind = kind;
    metric_.window = window;
    prepared_.reserve(library.size());
    for (const Spectrum& s : library.spectra) prepared_.push_back(prepare_for_metric(kind, s, baseline_order_));
    if (scale_override) {
      metric_.scale = *scale_override;
    } else {
      metric_.scale = calibrate_scale(prepared_, metric_);
    }
    metric_.validate();

    const std::size_t n = prepared_.size();
    table_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) table_[i * n + j] = spectral_distance(metric_, prepared_[i], prepared_[j]);
      }
    }
  }

  const SimilarityMetric& metric() const noexcept { return metric_; }
  double scale() const noexcept { return metric_.scale; }
  std::size_t size() const noexcept { return prepared_.size(); }
  const Spectrum& prepared(std::size_t id) const { return prepared_.at(id); }

  /// Median inter-material distance implied by the calibrated scale.
  double median_distance() const { return std::sqrt(metric_.scale * std::numbers::ln2); }

  Spectrum prepare(const Spectrum& raw) const { return prepare_for_metric(metric_.kind, raw, baseline_order_); }

  double distance(const Spectrum& prepared_observed, std::size_t id) const {
    return spectral_distance(metric_, prepared_observed, prepared_.at(id));
  }

  /// Distance between library entries, the first playing the observation.
  double library_distance(std::size_t observed_id, std::size_t map_id) const {
    return table_.at(observed_id * prepared_.size() + map_id);
  }

  double likelihood(double distance) const { return distance_to_likelihood(distance, metric_.scale); }

  std::vector<double> distances(const Spectrum& prepared_observed) const {
    std::vector<double> out(prepared_.size());
    for (std::size_t id = 0; id < prepared_.size(); ++id) out[id] = distance(prepared_observed, id);
    return out;
  }

  /// Index of the smallest entry; ties resolve to the lowest id.
  static std::size_t argmin(const std::vector<double>& distances) {
    std::size_t best = 0;
    for (std::size_t id = 1; id < distances.size(); ++id) {
      if (distances[id] < distances[best]) best = id;
    }
    return best;
  }

  std::size_t nearest(const Spectrum& prepared_observed) const { return argmin(distances(prepared_observed)); }

 private:
  SimilarityMetric metric_;
  int baseline_order_;
  std::vector<Spectrum> prepared_;
  std::vector<double> table_;
};

}  // namespace spectral_mcl
