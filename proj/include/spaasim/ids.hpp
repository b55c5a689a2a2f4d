#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spaasim/attack.hpp"
#include "spaasim/common.hpp"
#include "spaasim/physics.hpp"

namespace spaasim::ids {

// Fixed probe inputs replayed during baseline capture and every check.
struct ProbeSet {
  std::string scenario_id;
  std::vector<SignalVector> probes;

  // Default coverage set: the N basis vectors (one per effective-matrix
  // column) plus the uniform vector (sensitive to relative phase between
  // columns).
  static ProbeSet basis_plus_uniform(int ports, const std::string& scenario_id);
  void validate(int ports) const;
};

struct PortReading {
  double power_dbm = 0.0;
  double phase_rad = 0.0;
};

// Reference readings captured at initialization. Power means are taken in
// the dB domain, phases as circular means.
struct BaselineRecord {
  std::string scenario_id;
  int ports = 0;
  int repeats = 1;
  std::uint64_t seed = 0;
  ProbeSet probes;
  std::vector<std::vector<PortReading>> records;  // [probe][port]
};

struct ThresholdConfig {
  double power_db = 0.5;
  double phase_rad = 0.05;
};

struct Deviation {
  int probe = 0;
  int port = 0;
  double power_db = 0.0;   // |delta| of dB-domain means
  double phase_rad = 0.0;  // wrapped distance of port-0-relative phases
  bool exceeds = false;
  double severity = 0.0;   // max of deviation/threshold ratios
};

struct DetectionReport {
  std::string scenario_id;
  ThresholdConfig thresholds;
  bool alarm = false;
  std::vector<Deviation> deviations;   // every probe x port
  std::vector<Deviation> exceedances;  // sorted by severity, descending
};

// Detection-quality metrics over repeated clean and attacked trials.
struct EvalMetrics {
  int clean_trials = 0;
  int attack_trials = 0;
  double false_positive_rate = 0.0;
  double true_positive_rate = 0.0;
  std::map<std::string, double> per_kind_rate;
  std::vector<double> clean_power_devs;    // per clean trial, worst port
  std::vector<double> clean_phase_devs;
  std::vector<double> attack_power_devs;   // per attacked trial, worst port
  std::vector<double> attack_phase_devs;
};

// Replay every probe `repeats` times with derived seeds and store the
// per-port mean readings.
BaselineRecord capture_baseline(const attack::PerturbedScenario& system,
                                const ProbeSet& probes,
                                const physics::DetectorModel& detector,
                                int repeats, std::uint64_t seed);

// Replay the baseline probes against the current system and compare: alarm
// when any power deviation exceeds thresholds.power_db or any relative
// phase deviation exceeds thresholds.phase_rad.
DetectionReport check(const attack::PerturbedScenario& system,
                      const BaselineRecord& baseline,
                      const ThresholdConfig& thresholds,
                      const physics::DetectorModel& detector,
                      std::uint64_t seed);

// Clean trials measure the false-positive rate, attacked trials (each
// attack from the suite, `trials` times) the detection rates.
EvalMetrics evaluate(const attack::Scenario& clean,
                     const std::vector<attack::AttackSpec>& suite,
                     const ThresholdConfig& thresholds,
                     const physics::DetectorModel& detector,
                     const ProbeSet& probes, int trials, int repeats,
                     std::uint64_t seed);

// Empirical (1 - target_fpr) quantile of clean worst-case deviations,
// times a 1.5 safety factor, floored at 1e-9 per channel.
ThresholdConfig calibrate_thresholds(const attack::Scenario& clean,
                                     const physics::DetectorModel& detector,
                                     const ProbeSet& probes, double target_fpr,
                                     int trials, std::uint64_t seed,
                                     int repeats = 1);

// Versioned baseline file (JSON schema, schema_version field).
void save_baseline(const BaselineRecord& baseline,
                   const std::filesystem::path& path);
BaselineRecord load_baseline(const std::filesystem::path& path);

std::string report_to_text(const DetectionReport& report);
std::string report_to_csv(const DetectionReport& report);
void save_report(const DetectionReport& report,
                 const std::filesystem::path& json_path);
DetectionReport load_report(const std::filesystem::path& json_path);

}  // namespace spaasim::ids
