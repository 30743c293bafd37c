// spectral-mcl: world/log generation, localisation runs, evaluation and sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spectral_mcl/error.hpp"
#include "spectral_mcl/evaluation.hpp"
#include "spectral_mcl/material_map.hpp"
#include "spectral_mcl/pipeline.hpp"
#include "spectral_mcl/sim.hpp"
#include "spectral_mcl/trajectory.hpp"

namespace fs = std::filesystem;
using namespace spectral_mcl;

namespace {

struct GenOptions {
  std::string layout = "corridor_loop";
  int size = 64;
  double resolution = 0.05;
  int materials = 5;
  std::string assignment = "per_wall_segment";
  std::string library;
  std::uint64_t seed = 0;
  int beams = 16;
  double max_range = 4.0;
  double range_sigma = 0.01;
  bool no_noise = false;
  std::string out = "dataset";
};

int cmd_gen(const GenOptions& o) {
  WorldSpec spec;
  spec.layout = parse_layout(o.layout);
  spec.size = o.size;
  spec.resolution = o.resolution;
  spec.n_materials = o.materials;
  spec.assignment = parse_assignment(o.assignment);
  spec.seed = o.seed;
  if (!o.library.empty()) spec.library_path = o.library;
  const MaterialMap map = generate_world(spec);

  SensorTruthConfig cfg = o.no_noise ? SensorTruthConfig::noise_free() : SensorTruthConfig{};
  cfg.k_beams = o.beams;
  cfg.max_range = o.max_range;
  if (!o.no_noise) cfg.range_sigma = o.range_sigma;
  const Dataset ds = generate_dataset(map, default_script(spec.layout, spec.size, spec.resolution), cfg,
                                      mix_seed(o.seed, 0xda7a));

  const fs::path out(o.out);
  std::error_code ec;
  fs::create_directories(out / "world", ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out.string());
  save_map((out / "world").string(), map);
  save_log((out / "run.jsonl").string(), ds.records);
  save_tum((out / "gt.tum").string(), ds.ground_truth);
  std::cout << "wrote " << ds.records.size() << " records to " << out.string() << '\n';
  return 0;
}

void print_stats(const char* label, const ErrorStats& s) {
  std::cout << label << " rmse=" << format_double(s.rmse) << " mean=" << format_double(s.mean)
            << " median=" << format_double(s.median) << " sd=" << format_double(s.sd)
            << " min=" << format_double(s.min) << " max=" << format_double(s.max) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Material-aware Monte-Carlo localisation with Raman spectra"};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a synthetic world, trajectory and sensor log");
  gen_cmd->add_option("--layout", gen.layout, "corridor_loop | rooms | symmetric_twin");
  gen_cmd->add_option("--size", gen.size, "Cells per side");
  gen_cmd->add_option("--resolution", gen.resolution, "Metres per cell");
  gen_cmd->add_option("--materials", gen.materials, "Number of materials");
  gen_cmd->add_option("--assignment", gen.assignment, "per_wall_segment | random_patches");
  gen_cmd->add_option("--library", gen.library, "Library file (synthetic peaks when omitted)");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--beams", gen.beams, "Beams per scan");
  gen_cmd->add_option("--max-range", gen.max_range, "Sensor range in metres");
  gen_cmd->add_option("--range-sigma", gen.range_sigma, "Range noise std in metres");
  gen_cmd->add_flag("--no-noise", gen.no_noise, "Noise-free odometry, ranges and spectra");
  gen_cmd->add_option("--out", gen.out, "Output directory");

  std::string manifest_path, model, metric, init;
  std::optional<double> eps_m;
  std::optional<std::uint64_t> seed;
  std::optional<int> particles;
  std::optional<std::string> map_opt, log_opt, gt_opt, out_opt;
  bool no_noise = false;
  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--manifest", manifest_path, "JSON run manifest; flags override its fields");
    cmd->add_option("--map", map_opt, "Map directory or map.txt");
    cmd->add_option("--log", log_opt, "Scan/odometry log (JSONL)");
    cmd->add_option("--gt", gt_opt, "Ground-truth TUM file (default: gt.tum next to the log)");
    cmd->add_option("--model", model, "beam | field");
    cmd->add_option("--metric", metric, "slk | mod-l2 | wasserstein | kl | sam");
    cmd->add_option("--eps-m", eps_m, "Material weight; the range weight is 1 - eps_m");
    cmd->add_option("--seed", seed, "Filter seed");
    cmd->add_option("--particles", particles, "Maximum particle count");
    cmd->add_option("--init", init, "gt | coarse | uniform");
    cmd->add_flag("--no-noise", no_noise, "Zero motion noise and exact ground-truth initialisation");
    cmd->add_option("--out", out_opt, "Output directory");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "Localise over a log and evaluate against ground truth");
  add_run_options(run_cmd);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Repeat a run across one configuration axis");
  add_run_options(sweep_cmd);
  std::string axis = "metric";
  bool no_timing = false;
  sweep_cmd->add_option("--axis", axis, "metric | eps | model");
  sweep_cmd->add_flag("--no-timing", no_timing, "Omit the wall-clock column");

  std::string est_path, eval_gt, eval_out;
  std::optional<double> max_dt;
  std::size_t delta = 1;
  CLI::App* eval_cmd = app.add_subcommand("eval", "ATE/RPE of an estimated trajectory");
  eval_cmd->add_option("--est", est_path, "Estimated TUM trajectory")->required();
  eval_cmd->add_option("--gt", eval_gt, "Ground-truth TUM trajectory")->required();
  eval_cmd->add_option("--max-dt", max_dt, "Association tolerance in seconds");
  eval_cmd->add_option("--delta", delta, "RPE frame offset");
  eval_cmd->add_option("--out", eval_out, "Directory for ate.json and rpe.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto resolve_manifest = [&]() {
    RunManifest m = manifest_path.empty() ? RunManifest{} : load_manifest(manifest_path);
    if (map_opt) m.map_path = *map_opt;
    if (log_opt) m.log_path = *log_opt;
    if (gt_opt) m.gt_path = *gt_opt;
    if (out_opt) m.out_dir = *out_opt;
    if (!model.empty()) m.sensor.model = parse_sensor_model(model);
    if (!metric.empty()) m.sensor.metric = parse_metric(metric);
    if (eps_m) {
      m.sensor.eps_material = *eps_m;
      m.sensor.eps_range = 1.0 - *eps_m;
    }
    if (seed) m.seed = *seed;
    if (particles) m.particles = *particles;
    if (!init.empty()) m.init = parse_init(init);
    if (no_noise) m.no_noise = true;
    return m;
  };

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*run_cmd) {
      const RunManifest m = resolve_manifest();
      const PipelineResult r = run_pipeline(m);
      print_stats("ate", r.eval.ate);
      if (r.eval.rpe) print_stats("rpe_trans", r.eval.rpe->translational);
      std::cout << "filter_seconds=" << format_double(r.run.filter_seconds) << " out=" << m.out_dir << '\n';
      return 0;
    }
    if (*sweep_cmd) {
      const RunManifest m = resolve_manifest();
      const auto rows = run_sweep(m, parse_axis(axis));
      fs::create_directories(m.out_dir);
      const fs::path csv = fs::path(m.out_dir) / "sweep.csv";
      std::ofstream out(csv);
      if (!out) throw Error(ErrorKind::IoError, "cannot write " + csv.string());
      write_sweep_csv(out, rows, !no_timing);
      write_sweep_csv(std::cout, rows, !no_timing);
      return 0;
    }
    if (*eval_cmd) {
      const TrajectoryLog est = load_tum(est_path);
      const TrajectoryLog gt = load_tum(eval_gt);
      const EvalResult r = evaluate(est, gt, max_dt.value_or(default_max_dt(gt)), delta);
      print_stats("ate", r.ate);
      if (r.rpe) {
        print_stats("rpe_trans", r.rpe->translational);
        print_stats("rpe_rot_deg", r.rpe->rotational);
      }
      if (!eval_out.empty()) {
        fs::create_directories(eval_out);
        write_eval_json(eval_out, r);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return is_input_error(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
