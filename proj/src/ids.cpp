#include "spaasim/ids.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spaasim/format.hpp"
#include "spaasim/rng.hpp"

namespace spaasim::ids {

using nlohmann::json;

namespace {

constexpr int kBaselineSchemaVersion = 1;
constexpr double kMinThreshold = 1e-9;
constexpr double kSafetyFactor = 1.5;

// One averaged acquisition of the whole probe set. Fresh sub-seeds per
// (probe, repeat); detector noise and flooding noise draw from separate
// streams.
std::vector<std::vector<PortReading>> acquire(
    const attack::PerturbedScenario& system, const ProbeSet& probes,
    const physics::DetectorModel& detector, int repeats, std::uint64_t seed) {
  std::vector<std::vector<PortReading>> records;
  records.reserve(probes.probes.size());
  int ports = system.scenario.system.ports;
  for (size_t i = 0; i < probes.probes.size(); ++i) {
    // Means are taken relative to the first acquisition (dB offsets, phase
    // offsets on the circle), so repeats of identical readings reproduce
    // them exactly.
    std::vector<double> first_power(static_cast<size_t>(ports), 0.0);
    std::vector<double> first_phase(static_cast<size_t>(ports), 0.0);
    std::vector<double> power_delta(static_cast<size_t>(ports), 0.0);
    std::vector<double> sin_delta(static_cast<size_t>(ports), 0.0);
    std::vector<double> cos_delta(static_cast<size_t>(ports), 0.0);
    for (int m = 0; m < repeats; ++m) {
      std::uint64_t s = derive_seed(seed, i, static_cast<std::uint64_t>(m));
      attack::PerturbedScenario replay = system;  // taps recorded per replay
      SignalVector out =
          attack::run_forward(replay, probes.probes[i], derive_seed(s, 0));
      physics::Readings r = physics::read_outputs(
          out, detector, derive_seed(s, 1), system.scenario.input_power_mw);
      for (int p = 0; p < ports; ++p) {
        auto k = static_cast<size_t>(p);
        if (m == 0) {
          first_power[k] = r.power_dbm[k];
          first_phase[k] = r.phase_rad[k];
        }
        power_delta[k] += r.power_dbm[k] - first_power[k];
        double d = r.phase_rad[k] - first_phase[k];
        sin_delta[k] += std::sin(d);
        cos_delta[k] += std::cos(d);
      }
    }
    std::vector<PortReading> row(static_cast<size_t>(ports));
    for (int p = 0; p < ports; ++p) {
      auto k = static_cast<size_t>(p);
      row[k].power_dbm = first_power[k] + power_delta[k] / repeats;
      double mean_offset = (sin_delta[k] == 0.0 && cos_delta[k] == 0.0)
                               ? 0.0
                               : std::atan2(sin_delta[k], cos_delta[k]);
      row[k].phase_rad = mean_offset == 0.0
                             ? first_phase[k]
                             : wrap_pm_pi(first_phase[k] + mean_offset);
    }
    records.push_back(std::move(row));
  }
  return records;
}

double relative_phase(const std::vector<PortReading>& row, int port) {
  return wrap_pm_pi(row[static_cast<size_t>(port)].phase_rad -
                    row[0].phase_rad);
}

void sort_by_severity(std::vector<Deviation>& devs) {
  std::sort(devs.begin(), devs.end(), [](const Deviation& a, const Deviation& b) {
    if (a.severity != b.severity) return a.severity > b.severity;
    if (a.probe != b.probe) return a.probe < b.probe;
    return a.port < b.port;
  });
}

json reading_to_json(const PortReading& r) {
  return json{{"power_dbm", r.power_dbm}, {"phase_rad", r.phase_rad}};
}

PortReading reading_from_json(const json& j) {
  return {j.at("power_dbm").get<double>(), j.at("phase_rad").get<double>()};
}

}  // namespace

ProbeSet ProbeSet::basis_plus_uniform(int ports, const std::string& scenario_id) {
  require(ports >= 1, "probes: port count must be >= 1");
  ProbeSet set;
  set.scenario_id = scenario_id;
  for (int i = 0; i < ports; ++i) {
    SignalVector e = SignalVector::Zero(ports);
    e[i] = Complex(1.0, 0.0);
    set.probes.push_back(e);
  }
  set.probes.push_back(SignalVector::Constant(
      ports, Complex(1.0 / std::sqrt(static_cast<double>(ports)), 0.0)));
  return set;
}

void ProbeSet::validate(int ports) const {
  if (probes.empty()) throw ContractError("probes: set must be non-empty");
  for (const auto& p : probes) {
    if (p.size() != ports) {
      throw ContractError("probes: probe length " + std::to_string(p.size()) +
                          " does not match port count " +
                          std::to_string(ports));
    }
  }
}

BaselineRecord capture_baseline(const attack::PerturbedScenario& system,
                                const ProbeSet& probes,
                                const physics::DetectorModel& detector,
                                int repeats, std::uint64_t seed) {
  require(repeats >= 1, "baseline: repeats must be >= 1");
  probes.validate(system.scenario.system.ports);
  BaselineRecord record;
  record.scenario_id = system.scenario.id;
  record.ports = system.scenario.system.ports;
  record.repeats = repeats;
  record.seed = seed;
  record.probes = probes;
  record.records = acquire(system, probes, detector, repeats, seed);
  return record;
}

DetectionReport check(const attack::PerturbedScenario& system,
                      const BaselineRecord& baseline,
                      const ThresholdConfig& thresholds,
                      const physics::DetectorModel& detector,
                      std::uint64_t seed) {
  require(thresholds.power_db > 0.0 && thresholds.phase_rad > 0.0,
          "check: thresholds must be positive");
  if (baseline.ports != system.scenario.system.ports) {
    throw ContractError("check: baseline has " +
                        std::to_string(baseline.ports) + " ports, system has " +
                        std::to_string(system.scenario.system.ports));
  }
  baseline.probes.validate(baseline.ports);

  auto current =
      acquire(system, baseline.probes, detector, baseline.repeats, seed);

  DetectionReport report;
  report.scenario_id = system.scenario.id;
  report.thresholds = thresholds;
  for (size_t i = 0; i < current.size(); ++i) {
    for (int p = 0; p < baseline.ports; ++p) {
      Deviation d;
      d.probe = static_cast<int>(i);
      d.port = p;
      d.power_db = std::fabs(current[i][static_cast<size_t>(p)].power_dbm -
                             baseline.records[i][static_cast<size_t>(p)].power_dbm);
      d.phase_rad = wrapped_distance(relative_phase(current[i], p),
                                     relative_phase(baseline.records[i], p));
      d.severity = std::max(d.power_db / thresholds.power_db,
                            d.phase_rad / thresholds.phase_rad);
      d.exceeds = d.power_db > thresholds.power_db ||
                  d.phase_rad > thresholds.phase_rad;
      if (d.exceeds) {
        report.alarm = true;
        report.exceedances.push_back(d);
      }
      report.deviations.push_back(d);
    }
  }
  sort_by_severity(report.exceedances);
  return report;
}

EvalMetrics evaluate(const attack::Scenario& clean,
                     const std::vector<attack::AttackSpec>& suite,
                     const ThresholdConfig& thresholds,
                     const physics::DetectorModel& detector,
                     const ProbeSet& probes, int trials, int repeats,
                     std::uint64_t seed) {
  require(trials >= 1, "evaluate: trials must be >= 1");
  attack::PerturbedScenario clean_system = attack::make_clean(clean);
  BaselineRecord baseline = capture_baseline(clean_system, probes, detector,
                                             repeats, derive_seed(seed, 0));

  EvalMetrics metrics;
  metrics.clean_trials = trials;

  int false_alarms = 0;
  for (int t = 0; t < trials; ++t) {
    DetectionReport r = check(clean_system, baseline, thresholds, detector,
                              derive_seed(seed, 1, static_cast<std::uint64_t>(t)));
    double wp = 0.0, wf = 0.0;
    for (const auto& d : r.deviations) {
      wp = std::max(wp, d.power_db);
      wf = std::max(wf, d.phase_rad);
    }
    metrics.clean_power_devs.push_back(wp);
    metrics.clean_phase_devs.push_back(wf);
    if (r.alarm) ++false_alarms;
  }
  metrics.false_positive_rate = static_cast<double>(false_alarms) / trials;

  int detections = 0;
  int attacked_total = 0;
  std::map<std::string, std::pair<int, int>> kind_counts;  // hits, total
  for (size_t a = 0; a < suite.size(); ++a) {
    for (int t = 0; t < trials; ++t) {
      std::uint64_t s =
          derive_seed(seed, 2 + a, static_cast<std::uint64_t>(t));
      attack::PerturbedScenario attacked =
          attack::inject(clean, suite[a], /*step=*/0, derive_seed(s, 0));
      DetectionReport r =
          check(attacked, baseline, thresholds, detector, derive_seed(s, 1));
      double wp = 0.0, wf = 0.0;
      for (const auto& d : r.deviations) {
        wp = std::max(wp, d.power_db);
        wf = std::max(wf, d.phase_rad);
      }
      metrics.attack_power_devs.push_back(wp);
      metrics.attack_phase_devs.push_back(wf);
      auto& counts = kind_counts[attack::to_string(suite[a].kind)];
      ++counts.second;
      ++attacked_total;
      if (r.alarm) {
        ++detections;
        ++counts.first;
      }
    }
  }
  metrics.attack_trials = attacked_total;
  metrics.true_positive_rate =
      attacked_total == 0 ? 0.0
                          : static_cast<double>(detections) / attacked_total;
  for (const auto& [kind, counts] : kind_counts) {
    metrics.per_kind_rate[kind] =
        static_cast<double>(counts.first) / counts.second;
  }
  return metrics;
}

ThresholdConfig calibrate_thresholds(const attack::Scenario& clean,
                                     const physics::DetectorModel& detector,
                                     const ProbeSet& probes, double target_fpr,
                                     int trials, std::uint64_t seed,
                                     int repeats) {
  require(target_fpr > 0.0 && target_fpr < 1.0,
          "calibrate: target FPR must be in (0, 1)");
  int needed = static_cast<int>(std::ceil(1.0 / target_fpr));
  if (trials < needed) {
    throw ValidationError("calibrate: " + std::to_string(trials) +
                          " trials cannot resolve the " +
                          format_double(1.0 - target_fpr) +
                          " quantile; need at least " + std::to_string(needed));
  }

  attack::PerturbedScenario system = attack::make_clean(clean);
  BaselineRecord baseline = capture_baseline(system, probes, detector, repeats,
                                             derive_seed(seed, 0));
  // Thresholds must be positive for check(); calibration only needs the
  // deviation table, so use placeholders.
  ThresholdConfig probe_thresholds{1.0, 1.0};
  std::vector<double> worst_power, worst_phase;
  worst_power.reserve(static_cast<size_t>(trials));
  worst_phase.reserve(static_cast<size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    DetectionReport r =
        check(system, baseline, probe_thresholds, detector,
              derive_seed(seed, 1, static_cast<std::uint64_t>(t)));
    double wp = 0.0, wf = 0.0;
    for (const auto& d : r.deviations) {
      wp = std::max(wp, d.power_db);
      wf = std::max(wf, d.phase_rad);
    }
    worst_power.push_back(wp);
    worst_phase.push_back(wf);
  }
  auto quantile = [&](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    size_t idx = static_cast<size_t>(
        std::ceil((1.0 - target_fpr) * static_cast<double>(v.size())));
    idx = std::min(idx == 0 ? 0 : idx - 1, v.size() - 1);
    return v[idx];
  };
  ThresholdConfig out;
  out.power_db = kSafetyFactor * std::max(quantile(worst_power), kMinThreshold);
  out.phase_rad = kSafetyFactor * std::max(quantile(worst_phase), kMinThreshold);
  return out;
}

void save_baseline(const BaselineRecord& baseline,
                   const std::filesystem::path& path) {
  json probes = json::array();
  for (const auto& p : baseline.probes.probes) {
    json v = json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      v.push_back(json::array({p[i].real(), p[i].imag()}));
    }
    probes.push_back(v);
  }
  json records = json::array();
  for (const auto& row : baseline.records) {
    json r = json::array();
    for (const auto& reading : row) r.push_back(reading_to_json(reading));
    records.push_back(r);
  }
  json j{{"schema_version", kBaselineSchemaVersion},
         {"scenario_id", baseline.scenario_id},
         {"ports", baseline.ports},
         {"repeats", baseline.repeats},
         {"seed", baseline.seed},
         {"probes", probes},
         {"records", records}};
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write baseline file " + path.string());
  f << j.dump(2) << "\n";
}

BaselineRecord load_baseline(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read baseline file " + path.string());
  json j = json::parse(f);
  if (j.at("schema_version").get<int>() != kBaselineSchemaVersion) {
    throw ValidationError("baseline file " + path.string() +
                          ": unsupported schema_version");
  }
  BaselineRecord out;
  out.scenario_id = j.at("scenario_id").get<std::string>();
  out.ports = j.at("ports").get<int>();
  out.repeats = j.at("repeats").get<int>();
  out.seed = j.at("seed").get<std::uint64_t>();
  out.probes.scenario_id = out.scenario_id;
  for (const auto& v : j.at("probes")) {
    SignalVector p(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      p[static_cast<Eigen::Index>(i)] =
          Complex(v[i][0].get<double>(), v[i][1].get<double>());
    }
    out.probes.probes.push_back(std::move(p));
  }
  for (const auto& row : j.at("records")) {
    std::vector<PortReading> r;
    for (const auto& reading : row) r.push_back(reading_from_json(reading));
    out.records.push_back(std::move(r));
  }
  return out;
}

std::string report_to_text(const DetectionReport& report) {
  std::ostringstream os;
  os << "scenario: " << report.scenario_id << "\n";
  os << "thresholds: power " << format_double(report.thresholds.power_db)
     << " dB, phase " << format_double(report.thresholds.phase_rad)
     << " rad\n";
  os << "alarm: " << (report.alarm ? "YES" : "no") << "\n";
  os << "exceedances: " << report.exceedances.size() << "\n";
  for (const auto& d : report.exceedances) {
    os << "  probe " << d.probe << " port " << d.port << ": dpower "
       << format_double(d.power_db) << " dB, dphase "
       << format_double(d.phase_rad) << " rad, severity "
       << format_double(d.severity) << "\n";
  }
  return os.str();
}

std::string report_to_csv(const DetectionReport& report) {
  std::ostringstream os;
  os << "scenario,probe,port,dpower_db,dphase_rad,exceeds\n";
  for (const auto& d : report.deviations) {
    os << report.scenario_id << "," << d.probe << "," << d.port << ","
       << format_double(d.power_db) << "," << format_double(d.phase_rad) << ","
       << (d.exceeds ? 1 : 0) << "\n";
  }
  return os.str();
}

void save_report(const DetectionReport& report,
                 const std::filesystem::path& json_path) {
  json devs = json::array();
  for (const auto& d : report.deviations) {
    devs.push_back(json{{"probe", d.probe},
                        {"port", d.port},
                        {"dpower_db", d.power_db},
                        {"dphase_rad", d.phase_rad},
                        {"exceeds", d.exceeds},
                        {"severity", d.severity}});
  }
  json j{{"schema_version", 1},
         {"scenario_id", report.scenario_id},
         {"alarm", report.alarm},
         {"thresholds",
          json{{"power_db", report.thresholds.power_db},
               {"phase_rad", report.thresholds.phase_rad}}},
         {"deviations", devs}};
  std::ofstream f(json_path);
  if (!f) {
    throw std::runtime_error("cannot write report file " + json_path.string());
  }
  f << j.dump(2) << "\n";
}

DetectionReport load_report(const std::filesystem::path& json_path) {
  std::ifstream f(json_path);
  if (!f) {
    throw std::runtime_error("cannot read report file " + json_path.string());
  }
  json j = json::parse(f);
  DetectionReport out;
  out.scenario_id = j.at("scenario_id").get<std::string>();
  out.alarm = j.at("alarm").get<bool>();
  out.thresholds.power_db = j.at("thresholds").at("power_db").get<double>();
  out.thresholds.phase_rad = j.at("thresholds").at("phase_rad").get<double>();
  for (const auto& dj : j.at("deviations")) {
    Deviation d;
    d.probe = dj.at("probe").get<int>();
    d.port = dj.at("port").get<int>();
    d.power_db = dj.at("dpower_db").get<double>();
    d.phase_rad = dj.at("dphase_rad").get<double>();
    d.exceeds = dj.at("exceeds").get<bool>();
    d.severity = dj.at("severity").get<double>();
    out.deviations.push_back(d);
    if (d.exceeds) out.exceedances.push_back(d);
  }
  sort_by_severity(out.exceedances);
  return out;
}

}  // namespace spaasim::ids
