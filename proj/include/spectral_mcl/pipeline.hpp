#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spectral_mcl/chamfer.hpp"
#include "spectral_mcl/error.hpp"
#include "spectral_mcl/evaluation.hpp"
#include "spectral_mcl/material_map.hpp"
#include "spectral_mcl/particle_filter.hpp"
#include "spectral_mcl/sensing.hpp"
#include "spectral_mcl/sim.hpp"
#include "spectral_mcl/spectral_matcher.hpp"
#include "spectral_mcl/trajectory.hpp"

namespace spectral_mcl {

enum class InitChoice { GroundTruth, Coarse, Uniform };

constexpr std::string_view to_string(InitChoice c) {
  switch (c) {
    case InitChoice::GroundTruth: return "gt";
    case InitChoice::Coarse: return "coarse";
    case InitChoice::Uniform: return "uniform";
  }
  return "?";
}

inline InitChoice parse_init(std::string_view name) {
  if (name == "gt") return InitChoice::GroundTruth;
  if (name == "coarse") return InitChoice::Coarse;
  if (name == "uniform") return InitChoice::Uniform;
  throw Error(ErrorKind::InvalidArgument, "unknown init mode '" + std::string(name) + "'");
}

/// Everything a localisation run depends on. Serialized verbatim to
/// manifest.resolved.json; a run from that file reproduces the outputs.
struct RunManifest {
  std::string map_path;
  std::string log_path;
  std::string gt_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;

  // filter
  int particles = 1000;
  int min_particles = 100;
  bool adaptive = true;
  InitChoice init = InitChoice::Coarse;
  double init_std_xy = 2.0;
  double init_std_theta = 2.0;
  double gt_init_std_xy = 0.1;
  double gt_init_std_theta = 0.1;
  double resample_threshold = 0.5;
  double kld_epsilon = 0.05;
  double kld_delta = 0.01;
  double motion_sigma_x = 0.03;
  double motion_sigma_y = 0.03;
  double motion_sigma_theta = 0.05;
  bool no_noise = false;

  // sensor model
  SensorModelConfig sensor;

  // evaluation
  std::optional<double> max_dt;
  std::size_t rpe_delta = 1;

  FilterConfig filter_config(const Pose2& start) const {
    FilterConfig f;
    f.n_max = particles;
    f.n_min = std::min(min_particles, particles);
    f.adaptive = adaptive;
    f.resample_threshold = resample_threshold;
    f.kld_epsilon = kld_epsilon;
    f.kld_delta = kld_delta;
    f.rng_seed = mix_seed(seed, 0xf1);
    f.motion_noise =
        no_noise ? MotionNoise() : MotionNoise::diagonal(motion_sigma_x, motion_sigma_y, motion_sigma_theta);
    f.init.mean = start;
    switch (init) {
      case InitChoice::Uniform:
        f.init.mode = InitMode::UniformFreeSpace;
        break;
      case InitChoice::GroundTruth:
        f.init.mode = InitMode::Gaussian;
        f.init.std_xy = no_noise ? 0.0 : gt_init_std_xy;
        f.init.std_theta = no_noise ? 0.0 : gt_init_std_theta;
        break;
      case InitChoice::Coarse:
        f.init.mode = InitMode::Gaussian;
        f.init.std_xy = init_std_xy;
        f.init.std_theta = init_std_theta;
        break;
    }
    return f;
  }
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j;
  j["map"] = m.map_path;
  j["log"] = m.log_path;
  j["gt"] = m.gt_path;
  j["out"] = m.out_dir;
  j["seed"] = m.seed;
  j["filter"] = {{"particles", m.particles},
                 {"min_particles", m.min_particles},
                 {"adaptive", m.adaptive},
                 {"init", std::string(to_string(m.init))},
                 {"init_std_xy", m.init_std_xy},
                 {"init_std_theta", m.init_std_theta},
                 {"gt_init_std_xy", m.gt_init_std_xy},
                 {"gt_init_std_theta", m.gt_init_std_theta},
                 {"resample_threshold", m.resample_threshold},
                 {"kld_epsilon", m.kld_epsilon},
                 {"kld_delta", m.kld_delta},
                 {"motion_sigma", {m.motion_sigma_x, m.motion_sigma_y, m.motion_sigma_theta}},
                 {"no_noise", m.no_noise}};
  j["sensor"] = {{"model", std::string(to_string(m.sensor.model))},
                 {"eps_r", m.sensor.eps_range},
                 {"eps_m", m.sensor.eps_material},
                 {"sigma_o", m.sensor.sigma_o},
                 {"metric", std::string(to_string(m.sensor.metric))},
                 {"slk_window", m.sensor.slk_window},
                 {"max_range", m.sensor.max_range},
                 {"use_ranges", m.sensor.use_ranges}};
  j["eval"] = {{"rpe_delta", m.rpe_delta}};
  if (m.max_dt) j["eval"]["max_dt"] = *m.max_dt;
  return j;
}

/// Missing keys keep their defaults.
inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.map_path = j.value("map", m.map_path);
    m.log_path = j.value("log", m.log_path);
    m.gt_path = j.value("gt", m.gt_path);
    m.out_dir = j.value("out", m.out_dir);
    m.seed = j.value("seed", m.seed);
    if (j.contains("filter")) {
      const auto& f = j["filter"];
      m.particles = f.value("particles", m.particles);
      m.min_particles = f.value("min_particles", m.min_particles);
      m.adaptive = f.value("adaptive", m.adaptive);
      if (f.contains("init")) m.init = parse_init(f["init"].get<std::string>());
      m.init_std_xy = f.value("init_std_xy", m.init_std_xy);
      m.init_std_theta = f.value("init_std_theta", m.init_std_theta);
      m.gt_init_std_xy = f.value("gt_init_std_xy", m.gt_init_std_xy);
      m.gt_init_std_theta = f.value("gt_init_std_theta", m.gt_init_std_theta);
      m.resample_threshold = f.value("resample_threshold", m.resample_threshold);
      m.kld_epsilon = f.value("kld_epsilon", m.kld_epsilon);
      m.kld_delta = f.value("kld_delta", m.kld_delta);
      if (f.contains("motion_sigma")) {
        const auto s = f["motion_sigma"].get<std::vector<double>>();
        if (s.size() != 3) throw Error(ErrorKind::ParseError, "motion_sigma needs three entries");
        m.motion_sigma_x = s[0];
        m.motion_sigma_y = s[1];
        m.motion_sigma_theta = s[2];
      }
      m.no_noise = f.value("no_noise", m.no_noise);
    }
    if (j.contains("sensor")) {
      const auto& s = j["sensor"];
      if (s.contains("model")) m.sensor.model = parse_sensor_model(s["model"].get<std::string>());
      m.sensor.eps_range = s.value("eps_r", m.sensor.eps_range);
      m.sensor.eps_material = s.value("eps_m", m.sensor.eps_material);
      m.sensor.sigma_o = s.value("sigma_o", m.sensor.sigma_o);
      if (s.contains("metric")) m.sensor.metric = parse_metric(s["metric"].get<std::string>());
      m.sensor.slk_window = s.value("slk_window", m.sensor.slk_window);
      m.sensor.max_range = s.value("max_range", m.sensor.max_range);
      m.sensor.use_ranges = s.value("use_ranges", m.sensor.use_ranges);
    }
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      m.rpe_delta = e.value("rpe_delta", m.rpe_delta);
      if (e.contains("max_dt")) m.max_dt = e["max_dt"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("manifest: ") + e.what());
  }
  return m;
}

inline RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open manifest " + path);
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Localisation

/// Per-run state shared by every step: matcher, chamfer fields, sensor model.
class Localizer {
 public:
  Localizer(const MaterialMap& map, const SensorModelConfig& sensor) : map_(map) {
    sensor.validate();
    matcher_.emplace(map.library(), sensor.metric, sensor.slk_window);
    if (sensor.model == SensorModelKind::LikelihoodField) {
      fields_.emplace(
          build_field_set(map, &*matcher_, default_spectral_step(*matcher_, map.resolution(), sensor.sigma_o)));
    }
    model_.emplace(map, sensor, &*matcher_, fields_ ? &*fields_ : nullptr);
  }

  const SpectralMatcher& matcher() const { return *matcher_; }
  const SensorModel& model() const { return *model_; }

 private:
  const MaterialMap& map_;
  std::optional<SpectralMatcher> matcher_;
  std::optional<FieldSet> fields_;
  std::optional<SensorModel> model_;
};

struct RunResult {
  TrajectoryLog estimate;
  double max_weight_error = 0.0;  // max |sum w - 1| after any update
  double filter_seconds = 0.0;
  std::size_t resamples = 0;
  std::size_t final_particles = 0;
};

/// Filter over the log: predict on odometry (not before the first record),
/// weight on the scan, resample, record the mean estimate.
inline RunResult run_localization(const MaterialMap& map, const std::vector<LogRecord>& records,
                                  const SensorModelConfig& sensor, const FilterConfig& filter,
                                  unsigned workers = worker_count()) {
  if (records.empty()) throw Error(ErrorKind::InsufficientData, "log has no records");
  const auto t0 = std::chrono::steady_clock::now();
  RunResult out;
  const Localizer loc(map, sensor);
  ParticleFilter pf(map, filter);
  for (std::size_t k = 0; k < records.size(); ++k) {
    const LogRecord& rec = records[k];
    if (k > 0) pf.predict(rec.odom);
    if (!rec.scan.entries.empty()) {
      pf.update(loc.model().prepare(rec.scan), loc.model(), workers);
      out.max_weight_error = std::max(out.max_weight_error, std::abs(weight_sum(pf.particles()) - 1.0));
    }
    if (pf.resample()) ++out.resamples;
    out.estimate.append(rec.t, pf.estimate().mean);
  }
  out.final_particles = pf.particles().size();
  out.filter_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Half the smallest timestamp spacing of the ground truth.
inline double default_max_dt(const TrajectoryLog& gt) {
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < gt.size(); ++k) dt = std::min(dt, gt.samples[k].t - gt.samples[k - 1].t);
  return std::isfinite(dt) ? 0.5 * dt : 0.25;
}

struct EvalResult {
  ErrorStats ate;
  std::optional<ErrorStats> ate_final_half;
  std::optional<RpeStats> rpe;
};

inline EvalResult evaluate(const TrajectoryLog& est, const TrajectoryLog& gt, double max_dt, std::size_t delta) {
  EvalResult r;
  const auto pairs = associate(est, gt, max_dt);
  r.ate = compute_ate(pairs);
  const std::span<const PosePair> half = std::span<const PosePair>(pairs).subspan(pairs.size() / 2);
  try {
    r.ate_final_half = compute_ate(half);
  } catch (const Error&) {
    r.ate_final_half.reset();
  }
  if (pairs.size() >= delta + 1) r.rpe = compute_rpe(pairs, delta);
  return r;
}

inline nlohmann::json to_json(const ErrorStats& s) {
  return {{"rmse", s.rmse}, {"mean", s.mean}, {"median", s.median}, {"sd", s.sd},
          {"min", s.min},   {"max", s.max},   {"count", s.count}};
}

// ---------------------------------------------------------------------------
// Artifacts

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
}

inline void write_eval_json(const std::filesystem::path& dir, const EvalResult& r) {
  nlohmann::json ate = to_json(r.ate);
  if (r.ate_final_half) ate["final_half"] = to_json(*r.ate_final_half);
  write_text(dir / "ate.json", ate.dump(2) + "\n");
  nlohmann::json rpe = nlohmann::json::object();
  if (r.rpe) rpe = {{"translational", to_json(r.rpe->translational)}, {"rotational_deg", to_json(r.rpe->rotational)}};
  write_text(dir / "rpe.json", rpe.dump(2) + "\n");
}

/// Overhead SVG: walls shaded by material, ground truth and estimate paths.
inline std::string render_svg(const MaterialMap& map, const TrajectoryLog& gt, const TrajectoryLog& est) {
  constexpr int px = 8;
  const int w = map.width() * px, h = map.height() * px;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::size_t n_mat = std::max<std::size_t>(1, map.library().size());
  for (int j = 0; j < map.height(); ++j) {
    for (int i = 0; i < map.width(); ++i) {
      const Cell c{i, j};
      const Occupancy o = map.occupancy(c);
      if (o == Occupancy::Free) continue;
      std::string fill = "#808080";
      if (const auto m = map.material(c)) {
        const int hue = static_cast<int>(360.0 * static_cast<double>(*m) / static_cast<double>(n_mat));
        fill = "hsl(" + std::to_string(hue) + ",60%,45%)";
      }
      svg << "<rect x=\"" << i * px << "\" y=\"" << (map.height() - 1 - j) * px << "\" width=\"" << px
          << "\" height=\"" << px << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  auto path = [&](const TrajectoryLog& log, const char* colour) {
    if (log.empty()) return;
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (const TimedPose& s : log.samples) {
      double gx = 0.0, gy = 0.0;
      map.world_to_grid(s.pose.x, s.pose.y, gx, gy);
      svg << format_double(gx * px) << ',' << format_double((map.height() - gy) * px) << ' ';
    }
    svg << "\"/>\n";
  };
  path(gt, "black");
  path(est, "red");
  svg << "</svg>\n";
  return svg.str();
}

inline std::string default_gt_path(const std::string& log_path) {
  return (std::filesystem::path(log_path).parent_path() / "gt.tum").string();
}

struct PipelineResult {
  RunResult run;
  EvalResult eval;
};

/// Filter + evaluation for a manifest; writes est.tum, gt.tum, ate.json,
/// rpe.json, plot.svg and manifest.resolved.json into out_dir.
inline PipelineResult run_pipeline(RunManifest m, unsigned workers = worker_count()) {
  namespace fs = std::filesystem;
  if (m.map_path.empty() || m.log_path.empty()) {
    throw Error(ErrorKind::InvalidArgument, "manifest needs map and log paths");
  }
  if (m.gt_path.empty()) m.gt_path = default_gt_path(m.log_path);
  if (!fs::exists(m.map_path)) throw Error(ErrorKind::MapMismatch, "map not found: " + m.map_path);
  const MaterialMap map = load_map(m.map_path);
  const auto records = load_log(m.log_path, map.library());
  const TrajectoryLog gt = load_tum(m.gt_path);
  if (gt.empty()) throw Error(ErrorKind::InsufficientData, "ground truth is empty");

  std::error_code ec;
  fs::create_directories(m.out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create output directory " + m.out_dir);
  const fs::path out(m.out_dir);
  write_text(out / "manifest.resolved.json", to_json(m).dump(2) + "\n");

  PipelineResult r;
  r.run = run_localization(map, records, m.sensor, m.filter_config(gt.samples.front().pose), workers);
  r.eval = evaluate(r.run.estimate, gt, m.max_dt.value_or(default_max_dt(gt)), m.rpe_delta);

  save_tum((out / "est.tum").string(), r.run.estimate);
  save_tum((out / "gt.tum").string(), gt);
  write_eval_json(out, r.eval);
  write_text(out / "plot.svg", render_svg(map, gt, r.run.estimate));
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { Metric, Eps, Model };

inline SweepAxis parse_axis(std::string_view name) {
  if (name == "metric") return SweepAxis::Metric;
  if (name == "eps") return SweepAxis::Eps;
  if (name == "model") return SweepAxis::Model;
  throw Error(ErrorKind::InvalidArgument, "unknown sweep axis '" + std::string(name) + "'");
}

inline constexpr double kSweepEpsRange[] = {0.2, 0.4, 0.5, 0.6, 0.8};

struct SweepRow {
  std::string name;
  RunManifest manifest;
  std::string status = "ok";
  std::optional<ErrorStats> ate;
  double wall_clock_s = 0.0;
};

inline std::vector<SweepRow> sweep_rows(const RunManifest& base, SweepAxis axis) {
  std::vector<SweepRow> rows;
  auto add = [&](std::string name, RunManifest m) {
    m.out_dir = (std::filesystem::path(base.out_dir) / name).string();
    rows.push_back({std::move(name), std::move(m), "ok", std::nullopt, 0.0});
  };
  switch (axis) {
    case SweepAxis::Metric:
      for (MetricKind k : kAllMetrics) {
        RunManifest m = base;
        m.sensor.metric = k;
        add(std::string(to_string(k)), m);
      }
      break;
    case SweepAxis::Eps:
      for (double eps_r : kSweepEpsRange) {
        RunManifest m = base;
        m.sensor.eps_range = eps_r;
        m.sensor.eps_material = 1.0 - eps_r;
        add("eps_r=" + format_double(eps_r), m);
      }
      break;
    case SweepAxis::Model:
      for (SensorModelKind k : {SensorModelKind::Beam, SensorModelKind::LikelihoodField}) {
        RunManifest m = base;
        m.sensor.model = k;
        add(std::string(to_string(k)), m);
      }
      break;
  }
  return rows;
}

/// Runs each row with the base seed. Failed rows keep their error name as
/// status. Rows come back ordered by ATE RMSE (failures last, ties by name).
inline std::vector<SweepRow> run_sweep(const RunManifest& base, SweepAxis axis, unsigned workers = worker_count()) {
  std::vector<SweepRow> rows = sweep_rows(base, axis);
  for (SweepRow& row : rows) {
    try {
      const PipelineResult r = run_pipeline(row.manifest, workers);
      row.ate = r.eval.ate;
      row.wall_clock_s = r.run.filter_seconds;
    } catch (const Error& e) {
      row.status = std::string(to_string(e.kind()));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.ate.has_value() != b.ate.has_value()) return a.ate.has_value();
    if (a.ate && a.ate->rmse != b.ate->rmse) return a.ate->rmse < b.ate->rmse;
    return a.name < b.name;
  });
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool include_timing = true) {
  out << "name,model,metric,eps_r,eps_m,status,rmse,mean,median,sd,min,max";
  if (include_timing) out << ",wall_clock_s";
  out << '\n';
  for (const SweepRow& r : rows) {
    const SensorModelConfig& s = r.manifest.sensor;
    out << r.name << ',' << to_string(s.model) << ',' << to_string(s.metric) << ',' << format_double(s.eps_range)
        << ',' << format_double(s.eps_material) << ',' << r.status;
    if (r.ate) {
      for (double v : {r.ate->rmse, r.ate->mean, r.ate->median, r.ate->sd, r.ate->min, r.ate->max}) {
        out << ',' << format_double(v);
      }
    } else {
      out << ",,,,,,";
    }
    if (include_timing) out << ',' << format_double(r.wall_clock_s);
    out << '\n';
  }
}

}  // namespace spectral_mcl
