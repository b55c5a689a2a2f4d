#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spaasim/format.hpp"
#include "spaasim/rng.hpp"
#include "spaasim/scenario.hpp"

namespace spaasim::cli {

namespace fs = std::filesystem;
using harness::ScenarioConfig;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAlarm = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold_power_db;
  std::optional<double> threshold_phase_rad;
};

ScenarioConfig load_config(const GlobalOptions& opts) {
  if (opts.config_path.empty()) {
    throw harness::ConfigError("--config is required for this command");
  }
  ScenarioConfig config = harness::load_scenario(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.threshold_power_db) {
    if (!(*opts.threshold_power_db > 0.0)) {
      throw harness::ConfigError("--threshold-power-db must be positive");
    }
    config.thresholds.power_db = *opts.threshold_power_db;
  }
  if (opts.threshold_phase_rad) {
    if (!(*opts.threshold_phase_rad > 0.0)) {
      throw harness::ConfigError("--threshold-phase-rad must be positive");
    }
    config.thresholds.phase_rad = *opts.threshold_phase_rad;
  }
  return config;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write file " + path.string());
  f << content;
}

int cmd_simulate(const GlobalOptions& opts) {
  ScenarioConfig config = load_config(opts);
  harness::RunResult result = harness::run_scenario(config, opts.out_dir);
  std::cout << "scenario '" << config.scenario_id << "': " << config.steps
            << " step(s), alarm " << (result.report.alarm ? "RAISED" : "clear")
            << "\n"
            << "outputs written to " << opts.out_dir << "\n";
  return result.exit_code;
}

int cmd_baseline(const GlobalOptions& opts) {
  ScenarioConfig config = load_config(opts);
  attack::Scenario clean = harness::build_scenario(config);
  attack::PerturbedScenario system = attack::make_clean(clean);
  ids::ProbeSet probes = config.probes.build(config.ports, config.scenario_id);
  ids::BaselineRecord baseline =
      ids::capture_baseline(system, probes, config.detector,
                            config.baseline_repeats, derive_seed(config.seed, 2));
  fs::create_directories(opts.out_dir);
  fs::path path = fs::path(opts.out_dir) / "baseline.json";
  ids::save_baseline(baseline, path);
  std::cout << "baseline for '" << config.scenario_id << "' ("
            << baseline.probes.probes.size() << " probes, " << baseline.repeats
            << " repeat(s)) written to " << path.string() << "\n";
  return kExitClean;
}

int cmd_monitor(const GlobalOptions& opts, const std::string& baseline_path,
                int step) {
  ScenarioConfig config = load_config(opts);
  attack::Scenario clean = harness::build_scenario(config);
  for (const auto& a : config.attacks) {
    a.validate(clean.system.ports, clean.system.node_count());
  }
  fs::path bpath = baseline_path.empty()
                       ? fs::path(opts.out_dir) / "baseline.json"
                       : fs::path(baseline_path);
  ids::BaselineRecord baseline = ids::load_baseline(bpath);
  int at_step = step < 0 ? config.steps - 1 : step;
  attack::PerturbedScenario current = attack::inject_suite(
      clean, config.attacks, at_step, derive_seed(config.seed, 5));
  ids::DetectionReport report =
      ids::check(current, baseline, config.thresholds, config.detector,
                 derive_seed(config.seed, 4));
  fs::create_directories(opts.out_dir);
  ids::save_report(report, fs::path(opts.out_dir) / "report.json");
  write_text(fs::path(opts.out_dir) / "report.txt", ids::report_to_text(report));
  std::cout << ids::report_to_text(report);
  return report.alarm ? kExitAlarm : kExitClean;
}

int cmd_attack(const GlobalOptions& opts) {
  ScenarioConfig config = load_config(opts);
  attack::Scenario clean = harness::build_scenario(config);
  for (const auto& a : config.attacks) {
    a.validate(clean.system.ports, clean.system.node_count());
  }
  SignalVector drive = config.input.build(config.ports);
  std::vector<physics::Readings> clean_rows, attacked_rows;
  for (int step = 0; step < config.steps; ++step) {
    std::uint64_t step_seed =
        derive_seed(config.seed, 3, static_cast<std::uint64_t>(step));
    attack::PerturbedScenario clean_system = attack::make_clean(clean);
    SignalVector clean_out =
        attack::run_forward(clean_system, drive, derive_seed(step_seed, 1));
    clean_rows.push_back(physics::read_outputs(
        clean_out, config.detector, derive_seed(step_seed, 2),
        config.input_power_mw, config.scenario_id + "_clean", step));
    attack::PerturbedScenario attacked = attack::inject_suite(
        clean, config.attacks, step, derive_seed(step_seed, 0));
    SignalVector attacked_out =
        attack::run_forward(attacked, drive, derive_seed(step_seed, 1));
    attacked_rows.push_back(physics::read_outputs(
        attacked_out, config.detector, derive_seed(step_seed, 2),
        config.input_power_mw, config.scenario_id + "_attacked", step));
  }
  fs::create_directories(opts.out_dir);
  harness::export_readings(clean_rows,
                           fs::path(opts.out_dir) / "readings_clean.csv");
  harness::export_readings(attacked_rows,
                           fs::path(opts.out_dir) / "readings_attacked.csv");
  std::cout << "clean and attacked readings for '" << config.scenario_id
            << "' written to " << opts.out_dir << "\n";
  return kExitClean;
}

int cmd_infer(const GlobalOptions& opts) {
  ScenarioConfig config = load_config(opts);
  harness::Dataset data =
      harness::make_blobs(config.ports, config.inference.dataset);
  harness::AccuracyReport report = harness::run_inference(config, data);
  fs::create_directories(opts.out_dir);
  harness::save_accuracy(report, fs::path(opts.out_dir) / "accuracy.json");
  write_text(fs::path(opts.out_dir) / "accuracy.txt",
             harness::accuracy_to_text(report));
  std::cout << harness::accuracy_to_text(report);
  return kExitClean;
}

int cmd_calibrate(const GlobalOptions& opts, double target_fpr, int trials) {
  ScenarioConfig config = load_config(opts);
  attack::Scenario clean = harness::build_scenario(config);
  ids::ProbeSet probes = config.probes.build(config.ports, config.scenario_id);
  ids::ThresholdConfig thresholds = ids::calibrate_thresholds(
      clean, config.detector, probes, target_fpr, trials,
      derive_seed(config.seed, 6), config.baseline_repeats);
  fs::create_directories(opts.out_dir);
  write_text(fs::path(opts.out_dir) / "thresholds.json",
             std::string("{\n  \"power_db\": ") +
                 format_double(thresholds.power_db) +
                 ",\n  \"phase_rad\": " + format_double(thresholds.phase_rad) +
                 "\n}\n");
  std::cout << "calibrated thresholds (target FPR "
            << format_double(target_fpr) << ", " << trials
            << " trials): power " << format_double(thresholds.power_db)
            << " dB, phase " << format_double(thresholds.phase_rad)
            << " rad\n";
  return kExitClean;
}

int cmd_report(const std::string& input, const std::string& csv_out) {
  ids::DetectionReport report = ids::load_report(input);
  std::cout << ids::report_to_text(report);
  if (!csv_out.empty()) {
    write_text(csv_out, ids::report_to_csv(report));
  }
  return kExitClean;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Coherent MZI-mesh photonic accelerator simulator with "
               "attack injection and side-channel intrusion detection"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "Scenario config file (JSON)");
  app.add_option("--seed", opts.seed, "Override the scenario seed");
  app.add_option("--out-dir", opts.out_dir, "Output directory (default: out)");
  app.add_option("--threshold-power-db", opts.threshold_power_db,
                 "Override the power alarm threshold (dB)");
  app.add_option("--threshold-phase-rad", opts.threshold_phase_rad,
                 "Override the phase alarm threshold (rad)");

  auto* simulate = app.add_subcommand(
      "simulate", "Run the full pipeline: baseline, timeline, detection check");
  auto* baseline =
      app.add_subcommand("baseline", "Capture and store baseline readings");

  auto* monitor = app.add_subcommand(
      "monitor", "Check the configured system against a stored baseline");
  std::string baseline_path;
  int monitor_step = -1;
  monitor->add_option("--baseline", baseline_path,
                      "Baseline file (default: <out-dir>/baseline.json)");
  monitor->add_option("--step", monitor_step,
                      "Trigger evaluation step (default: last step)");

  auto* attack_cmd = app.add_subcommand(
      "attack", "Export clean vs attacked readings for the configured drive");
  auto* infer = app.add_subcommand(
      "infer", "Run the toy-classifier accuracy degradation experiment");

  auto* calibrate = app.add_subcommand(
      "calibrate", "Derive alarm thresholds from clean-run statistics");
  double target_fpr = 0.01;
  int calib_trials = 2000;
  calibrate->add_option("--target-fpr", target_fpr,
                        "Target false-positive rate (default 0.01)");
  calibrate->add_option("--trials", calib_trials,
                        "Clean trials for the quantile (default 2000)");

  auto* report_cmd =
      app.add_subcommand("report", "Print a stored detection report");
  std::string report_input, report_csv;
  report_cmd->add_option("--input", report_input, "report.json to load")
      ->required();
  report_cmd->add_option("--csv", report_csv,
                         "Also export the deviation table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitClean : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opts);
    if (baseline->parsed()) return cmd_baseline(opts);
    if (monitor->parsed()) return cmd_monitor(opts, baseline_path, monitor_step);
    if (attack_cmd->parsed()) return cmd_attack(opts);
    if (infer->parsed()) return cmd_infer(opts);
    if (calibrate->parsed()) return cmd_calibrate(opts, target_fpr, calib_trials);
    if (report_cmd->parsed()) return cmd_report(report_input, report_csv);
  } catch (const harness::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace spaasim::cli
