#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spaasim/attack.hpp"
#include "spaasim/common.hpp"
#include "spaasim/ids.hpp"
#include "spaasim/mesh.hpp"
#include "spaasim/physics.hpp"

namespace spaasim::harness {

// Config file problem: carries either a line/column (syntax) or the path of
// the offending field (semantics).
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct WeightSource {
  enum class Kind { haar, matrix, trained };
  Kind kind = Kind::haar;
  std::uint64_t seed = 1;
  TransferMatrix matrix;  // kind == matrix

  bool operator==(const WeightSource& o) const;
};

struct InputSpec {
  enum class Kind { uniform, basis, explicit_amplitudes };
  Kind kind = Kind::uniform;
  int port = 0;                 // basis
  SignalVector amplitudes;      // explicit

  SignalVector build(int ports) const;
  bool operator==(const InputSpec& o) const;
};

struct ProbeSpec {
  enum class Kind { basis_plus_uniform, explicit_vectors };
  Kind kind = Kind::basis_plus_uniform;
  std::vector<SignalVector> vectors;

  ids::ProbeSet build(int ports, const std::string& scenario_id) const;
  bool operator==(const ProbeSpec& o) const;
};

struct DatasetConfig {
  int samples_per_class = 100;
  double spread = 0.15;
  double base = 0.2;
  double peak = 1.0;
  std::uint64_t seed = 7;

  bool operator==(const DatasetConfig& o) const = default;
};

struct InferenceConfig {
  DatasetConfig dataset;
  std::vector<double> noise_sigmas = {0.0, 0.1, 0.2, 0.3, 0.5};
  int trials = 100;

  bool operator==(const InferenceConfig& o) const = default;
};

// One file fully determines a run; every random quantity has an explicit
// seed somewhere in here.
struct ScenarioConfig {
  int schema_version = 1;
  std::string scenario_id = "scenario";
  int ports = 4;
  std::uint64_t seed = 0;
  int steps = 1;
  std::vector<std::string> tags;
  double input_power_mw = 1.0;
  WeightSource weights;
  InputSpec input;
  physics::DetectorModel detector;
  physics::TuningModel tuning;
  double crosstalk_coupling_length_um = 100.0;
  double layout_pitch_um = 50.0;
  ids::ThresholdConfig thresholds;
  ProbeSpec probes;
  int baseline_repeats = 1;
  std::vector<attack::AttackSpec> attacks;
  InferenceConfig inference;

  bool operator==(const ScenarioConfig& o) const;
};

// Strict parse: unknown keys are rejected with their path, syntax errors
// carry line/column.
ScenarioConfig parse_scenario(const std::string& config_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Canonical JSON form; parse(serialize(c)) == c.
std::string serialize_scenario(const ScenarioConfig& config);

// Instantiate the clean scenario: mesh programs, physics, tags.
attack::Scenario build_scenario(const ScenarioConfig& config);

struct RunResult {
  std::vector<physics::Readings> readings;  // one per step
  ids::DetectionReport report;
  ids::BaselineRecord baseline;
  int exit_code = 0;  // 0 clean, 2 alarm
};

// Full pipeline: build, capture baseline, step through the timeline with
// attacks armed per trigger, export readings, run the detection check at
// the final step. Writes readings.csv, baseline.json, report.json and
// report.txt into out_dir.
RunResult run_scenario(const ScenarioConfig& config,
                       const std::filesystem::path& out_dir);

// 4-class / N-feature Gaussian blob toy data; features clipped at zero so
// they encode onto amplitudes.
struct Dataset {
  Eigen::MatrixXd features;  // row per sample
  std::vector<int> labels;
};

Dataset make_blobs(int classes, const DatasetConfig& config);

// Class-centroid linear map with unit-norm rows; argmax-equivalent to
// nearest-centroid on normalized inputs.
Eigen::MatrixXd train_prototype_classifier(const Dataset& train, int classes);

struct AccuracyEntry {
  std::string label;
  double sigma = 0.0;
  double accuracy = 0.0;
  int trials = 1;
};

struct AccuracyReport {
  std::string scenario_id;
  double clean_accuracy = 0.0;
  std::vector<AccuracyEntry> noise_curve;  // mean accuracy per phase-noise sigma
  std::vector<AccuracyEntry> attacked;     // accuracy under each configured attack
};

// Encode samples as normalized amplitudes, classify by argmax output power,
// sweep the configured phase-noise grid and attack list.
AccuracyReport run_inference(const ScenarioConfig& config, const Dataset& data);

std::string accuracy_to_text(const AccuracyReport& report);
void save_accuracy(const AccuracyReport& report,
                   const std::filesystem::path& json_path);

// CSV with header scenario,step,port,power_dbm,phase_rad; byte-stable.
std::string readings_to_csv(const std::vector<physics::Readings>& readings);
void export_readings(const std::vector<physics::Readings>& readings,
                     const std::filesystem::path& path);
std::vector<physics::Readings> parse_readings_csv(const std::string& text);

}  // namespace spaasim::harness

namespace spaasim::cli {

// Entry point behind the spaasim binary; returns the process exit code
// (0 clean, 2 alarm, 1 usage/config error, 3 runtime error).
int run_cli(int argc, const char* const* argv);

}  // namespace spaasim::cli
