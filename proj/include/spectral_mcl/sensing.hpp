#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spectral_mcl/chamfer.hpp"
#include "spectral_mcl/error.hpp"
#include "spectral_mcl/material_map.hpp"
#include "spectral_mcl/pose.hpp"
#include "spectral_mcl/raycast.hpp"
#include "spectral_mcl/spectral_matcher.hpp"

namespace spectral_mcl {

// ---------------------------------------------------------------------------
// Observations

struct ScanEntry {
  std::optional<double> range;               // metres; absent in bearing-only mode
  double bearing = 0.0;                      // radians, robot frame
  Spectrum spectrum;                         // raw observed spectrum
  std::optional<std::size_t> spectrum_id;    // set when the spectrum is a noise-free library entry
};

struct ScanTuple {
  double timestamp = 0.0;
  std::vector<ScanEntry> entries;

  void validate(double max_range) const {
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (k > 0 && !(entries[k].bearing > entries[k - 1].bearing)) {
        throw Error(ErrorKind::InvalidArgument, "scan bearings must be strictly increasing");
      }
      if (entries[k].range && !(*entries[k].range > 0.0 && *entries[k].range <= max_range)) {
        throw Error(ErrorKind::InvalidArgument, "scan range outside (0, max_range]");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Configuration

enum class SensorModelKind { Beam, LikelihoodField };

constexpr std::string_view to_string(SensorModelKind kind) {
  return kind == SensorModelKind::Beam ? "beam" : "field";
}

inline SensorModelKind parse_sensor_model(std::string_view name) {
  if (name == "beam") return SensorModelKind::Beam;
  if (name == "field" || name == "likelihood_field" || name == "likelihood-field") {
    return SensorModelKind::LikelihoodField;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown sensor model '" + std::string(name) + "'");
}

struct SensorModelConfig {
  SensorModelKind model = SensorModelKind::LikelihoodField;
  double eps_range = 0.0;      // weight of the range term
  double eps_material = 1.0;   // weight of the material term
  double sigma_o = 0.3;        // range noise std, metres
  MetricKind metric = MetricKind::ModL2;
  int slk_window = 2;
  double max_range = 4.0;
  bool use_ranges = true;

  void validate() const {
    if (!(eps_range >= 0.0 && eps_range <= 1.0 && eps_material >= 0.0 && eps_material <= 1.0) ||
        std::abs(eps_range + eps_material - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "sensor weights must lie in [0,1] and sum to 1");
    }
    if (!(sigma_o > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma_o must be positive");
    if (!(max_range > 0.0)) throw Error(ErrorKind::InvalidArgument, "max_range must be positive");
    if (slk_window < 1) throw Error(ErrorKind::InvalidArgument, "SLK window must be >= 1");
  }

  bool needs_spectra() const { return eps_material > 0.0 || !use_ranges; }
};

/// Floor for beams that leave the map or end on a cell without a material.
inline constexpr double kMissLikelihood = 0.01;
inline constexpr double kUnknownMaterialLikelihood = 0.01;

/// Endpoints are pushed this far past the measured range so that a return
/// on a wall surface resolves to the wall cell.
inline constexpr double kEndpointNudge = 1e-6;

// ---------------------------------------------------------------------------
// Per-beam primitives

inline double beam_range_likelihood(double range, double expected_range, double sigma_o) {
  const double e = range - expected_range;
  return std::exp(-(e * e) / (2.0 * sigma_o * sigma_o));
}

inline double beam_material_likelihood(const Spectrum& prepared_observed, const RayHit& hit,
                                       const SpectralMatcher& matcher) {
  if (!hit.material) return kUnknownMaterialLikelihood;
  return matcher.likelihood(matcher.distance(prepared_observed, *hit.material));
}

/// Observation entry with its spectral comparisons precomputed once per scan,
/// so per-particle evaluation is table lookups.
struct PreparedEntry {
  std::optional<double> range;
  double bearing = 0.0;
  std::size_t snapped_id = 0;                // nearest library spectrum
  std::vector<double> material_likelihoods;  // per library id
};

struct PreparedScan {
  double timestamp = 0.0;
  std::vector<PreparedEntry> entries;
};

/// Bundles the immutable inputs of both sensor models. All evaluation
/// methods are const and safe to call concurrently.
class SensorModel {
 public:
  SensorModel(const MaterialMap& map, const SensorModelConfig& cfg, const SpectralMatcher* matcher,
              const FieldSet* fields)
      : map_(map), cfg_(cfg), matcher_(matcher), fields_(fields) {
    cfg_.validate();
    if (cfg_.needs_spectra() && matcher_ == nullptr) {
      throw Error(ErrorKind::InvalidArgument, "material likelihoods need a spectral matcher");
    }
    if (cfg_.model == SensorModelKind::LikelihoodField) {
      if (fields_ == nullptr) throw Error(ErrorKind::InvalidArgument, "likelihood-field model needs chamfer fields");
      if (cfg_.needs_spectra() && fields_->spectral.size() != matcher_->size()) {
        throw Error(ErrorKind::InvalidArgument, "spectral fields do not match the library");
      }
    }
  }

  const SensorModelConfig& config() const noexcept { return cfg_; }
  const MaterialMap& map() const noexcept { return map_; }

  PreparedEntry prepare(const ScanEntry& entry) const {
    PreparedEntry out{cfg_.use_ranges ? entry.range : std::nullopt, entry.bearing, 0, {}};
    if (matcher_ != nullptr && cfg_.needs_spectra()) {
      const Spectrum observed = matcher_->prepare(entry.spectrum);
      const std::vector<double> d = matcher_->distances(observed);
      out.snapped_id = SpectralMatcher::argmin(d);
      out.material_likelihoods.resize(d.size());
      for (std::size_t id = 0; id < d.size(); ++id) out.material_likelihoods[id] = matcher_->likelihood(d[id]);
    }
    return out;
  }

  PreparedScan prepare(const ScanTuple& scan) const {
    PreparedScan out{scan.timestamp, {}};
    out.entries.reserve(scan.entries.size());
    for (const ScanEntry& e : scan.entries) out.entries.push_back(prepare(e));
    return out;
  }

  /// Particles outside the map or inside a non-free cell explain nothing.
  bool pose_admissible(const Pose2& pose) const { return map_.is_free(pose.x, pose.y); }

  /// Beam model: eps_R * P_R + eps_m * P_m at the raycast endpoint.
  double beam_likelihood(const PreparedEntry& entry, const Pose2& particle) const {
    if (!pose_admissible(particle)) return 0.0;
    const auto hit = raycast(map_, particle, entry.bearing, cfg_.max_range);
    if (!hit) return kMissLikelihood;
    const double p_material = material_term(entry, *hit);
    if (!entry.range) return p_material;
    const double p_range = beam_range_likelihood(*entry.range, hit->range, cfg_.sigma_o);
    return cfg_.eps_range * p_range + cfg_.eps_material * p_material;
  }

  /// Likelihood-field model. With a range the beam endpoint is projected and
  /// looked up in the range chamfer and in the snapped spectral field; without
  /// one a single raycast finds the endpoint and only the material term is used.
  double field_likelihood(const PreparedEntry& entry, const Pose2& particle) const {
    if (!pose_admissible(particle)) return 0.0;
    Cell cell;
    if (entry.range) {
      double wx = 0.0, wy = 0.0;
      project_beam(particle, entry.bearing, *entry.range + kEndpointNudge, wx, wy);
      const auto c = map_.cell_of(wx, wy);
      if (!c) return kMissLikelihood;
      cell = *c;
    } else {
      const auto hit = raycast(map_, particle, entry.bearing, cfg_.max_range);
      if (!hit) return kMissLikelihood;
      cell = hit->cell;
    }
    const double p_spectral = cfg_.needs_spectra() ? spectral_field_term(entry, cell) : 0.0;
    if (!entry.range) return p_spectral;
    const double delta = fields_->range.at(cell) * map_.resolution();
    const double p_range = std::exp(-(delta * delta) / (2.0 * cfg_.sigma_o * cfg_.sigma_o));
    return cfg_.eps_range * p_range + cfg_.eps_material * p_spectral;
  }

  double beam(const PreparedEntry& entry, const Pose2& particle) const {
    return cfg_.model == SensorModelKind::Beam ? beam_likelihood(entry, particle) : field_likelihood(entry, particle);
  }

  /// Sum of per-beam log-likelihoods (beams independent). -inf when any beam
  /// has zero likelihood (particle outside free space).
  double scan_log_likelihood(const PreparedScan& scan, const Pose2& particle) const {
    double total = 0.0;
    for (const PreparedEntry& e : scan.entries) total += std::log(beam(e, particle));
    return total;
  }

  double scan_likelihood(const PreparedScan& scan, const Pose2& particle) const {
    return std::exp(scan_log_likelihood(scan, particle));
  }

 private:
  double material_term(const PreparedEntry& entry, const RayHit& hit) const {
    if (cfg_.eps_material == 0.0 && entry.range) return 0.0;
    if (!hit.material) return kUnknownMaterialLikelihood;
    return entry.material_likelihoods.at(*hit.material);
  }

  double spectral_field_term(const PreparedEntry& entry, Cell cell) const {
    const double c = fields_->spectral[entry.snapped_id].at(cell);
    return matcher_->likelihood(c);
  }

  const MaterialMap& map_;
  SensorModelConfig cfg_;
  const SpectralMatcher* matcher_;
  const FieldSet* fields_;
};

// Free-function forms of the per-beam and per-scan models.

inline double beam_combined_likelihood(const ScanEntry& entry, const Pose2& particle, const SensorModel& model) {
  return model.beam_likelihood(model.prepare(entry), particle);
}

inline double field_likelihood(const ScanEntry& entry, const Pose2& particle, const SensorModel& model) {
  return model.field_likelihood(model.prepare(entry), particle);
}

inline double scan_likelihood(const ScanTuple& scan, const Pose2& particle, const SensorModel& model) {
  if (scan.entries.empty()) throw Error(ErrorKind::InvalidArgument, "scan has no entries");
  return model.scan_likelihood(model.prepare(scan), particle);
}

}  // namespace spectral_mcl
