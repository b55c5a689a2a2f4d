#include "spaasim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spaasim/format.hpp"
#include "spaasim/rng.hpp"

namespace spaasim::harness {

using nlohmann::json;

namespace {

// Seed streams hanging off the master scenario seed.
enum SeedStream : std::uint64_t {
  kWeights = 1,
  kBaseline = 2,
  kSteps = 3,
  kCheck = 4,
  kInject = 5,
  kInference = 6,
};

TransferMatrix trained_weights(const ScenarioConfig& config) {
  Dataset train = make_blobs(config.ports, config.inference.dataset);
  return train_prototype_classifier(train, config.ports).cast<Complex>();
}

mesh::MeshProgram add_phase_noise(const mesh::MeshProgram& program,
                                  double sigma, Rng& rng) {
  mesh::MeshProgram out = program;
  for (auto& p : out.placements) {
    p.setting = mesh::MZISetting(p.setting.theta + rng.gaussian(sigma),
                                 p.setting.phi + rng.gaussian(sigma));
  }
  for (auto& phase : out.output_phases) {
    phase = wrap_two_pi(phase + rng.gaussian(sigma));
  }
  return out;
}

int argmax_power(const SignalVector& out) {
  int best = 0;
  double best_power = -1.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double p = std::norm(out[i]);
    if (p > best_power) {
      best_power = p;
      best = static_cast<int>(i);
    }
  }
  return best;
}

SignalVector encode_sample(const Eigen::VectorXd& features) {
  SignalVector x(features.size());
  double norm2 = 0.0;
  for (Eigen::Index i = 0; i < features.size(); ++i) {
    double f = std::max(features[i], 0.0);
    x[i] = Complex(f, 0.0);
    norm2 += f * f;
  }
  if (norm2 == 0.0) {
    throw ContractError("inference: sample encodes to the zero vector");
  }
  return x / std::sqrt(norm2);
}

double classify_accuracy(attack::PerturbedScenario& system, const Dataset& data,
                         std::uint64_t forward_seed) {
  int hits = 0;
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    SignalVector x = encode_sample(data.features.row(i));
    SignalVector y = attack::run_forward(
        system, x, derive_seed(forward_seed, static_cast<std::uint64_t>(i)));
    if (argmax_power(y) == data.labels[static_cast<size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.features.rows());
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write file " + path.string());
  f << content;
}

}  // namespace

SignalVector InputSpec::build(int ports) const {
  switch (kind) {
    case Kind::uniform:
      return SignalVector::Constant(
          ports, Complex(1.0 / std::sqrt(static_cast<double>(ports)), 0.0));
    case Kind::basis: {
      require(port >= 0 && port < ports, "input: basis port out of range");
      SignalVector e = SignalVector::Zero(ports);
      e[port] = Complex(1.0, 0.0);
      return e;
    }
    case Kind::explicit_amplitudes:
      require(amplitudes.size() == ports,
              "input: amplitude length must equal ports");
      return amplitudes;
  }
  throw ContractError("input: unknown kind");
}

ids::ProbeSet ProbeSpec::build(int ports, const std::string& scenario_id) const {
  if (kind == Kind::basis_plus_uniform) {
    return ids::ProbeSet::basis_plus_uniform(ports, scenario_id);
  }
  ids::ProbeSet set;
  set.scenario_id = scenario_id;
  set.probes = vectors;
  set.validate(ports);
  return set;
}

attack::Scenario build_scenario(const ScenarioConfig& config) {
  attack::Scenario s;
  s.id = config.scenario_id;
  s.tuning = config.tuning;
  s.crosstalk_coupling_length_um = config.crosstalk_coupling_length_um;
  s.layout_pitch_um = config.layout_pitch_um;
  s.input_power_mw = config.input_power_mw;
  s.tags = config.tags;
  switch (config.weights.kind) {
    case WeightSource::Kind::haar:
      s.system = mesh::MeshSystem::from_unitary(
          mesh::haar_unitary(config.ports, config.weights.seed));
      break;
    case WeightSource::Kind::matrix:
      s.system = mesh::MeshSystem::from_weights(
          mesh::WeightMatrix::from_matrix(config.weights.matrix));
      break;
    case WeightSource::Kind::trained:
      s.system = mesh::MeshSystem::from_weights(
          mesh::WeightMatrix::from_matrix(trained_weights(config)));
      break;
  }
  return s;
}

RunResult run_scenario(const ScenarioConfig& config,
                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  attack::Scenario clean = build_scenario(config);
  for (const auto& a : config.attacks) {
    a.validate(clean.system.ports, clean.system.node_count());
  }
  ids::ProbeSet probes = config.probes.build(config.ports, config.scenario_id);

  attack::PerturbedScenario clean_system = attack::make_clean(clean);
  ids::BaselineRecord baseline = ids::capture_baseline(
      clean_system, probes, config.detector, config.baseline_repeats,
      derive_seed(config.seed, kBaseline));

  SignalVector drive = config.input.build(config.ports);
  std::vector<physics::Readings> readings;
  readings.reserve(static_cast<size_t>(config.steps));
  for (int step = 0; step < config.steps; ++step) {
    std::uint64_t step_seed =
        derive_seed(config.seed, kSteps, static_cast<std::uint64_t>(step));
    attack::PerturbedScenario current = attack::inject_suite(
        clean, config.attacks, step, derive_seed(step_seed, 0));
    SignalVector out =
        attack::run_forward(current, drive, derive_seed(step_seed, 1));
    readings.push_back(physics::read_outputs(
        out, config.detector, derive_seed(step_seed, 2), config.input_power_mw,
        config.scenario_id, step));
  }

  attack::PerturbedScenario final_state =
      attack::inject_suite(clean, config.attacks, config.steps - 1,
                           derive_seed(config.seed, kInject));
  ids::DetectionReport report =
      ids::check(final_state, baseline, config.thresholds, config.detector,
                 derive_seed(config.seed, kCheck));

  export_readings(readings, out_dir / "readings.csv");
  ids::save_baseline(baseline, out_dir / "baseline.json");
  ids::save_report(report, out_dir / "report.json");
  write_file(out_dir / "report.txt", ids::report_to_text(report));

  RunResult result;
  result.readings = std::move(readings);
  result.report = std::move(report);
  result.baseline = std::move(baseline);
  result.exit_code = result.report.alarm ? 2 : 0;
  return result;
}

Dataset make_blobs(int classes, const DatasetConfig& config) {
  require(classes >= 2, "dataset: need at least 2 classes");
  Rng rng(config.seed);
  int total = classes * config.samples_per_class;
  Dataset data;
  data.features.resize(total, classes);
  data.labels.reserve(static_cast<size_t>(total));
  int row = 0;
  for (int c = 0; c < classes; ++c) {
    for (int s = 0; s < config.samples_per_class; ++s) {
      for (int f = 0; f < classes; ++f) {
        double centroid = (f == c) ? config.peak : config.base;
        data.features(row, f) =
            std::max(centroid + rng.gaussian(config.spread), 0.0);
      }
      data.labels.push_back(c);
      ++row;
    }
  }
  return data;
}

Eigen::MatrixXd train_prototype_classifier(const Dataset& train, int classes) {
  require(train.features.rows() > 0, "train: empty dataset");
  require(train.features.cols() == classes,
          "train: feature count must equal class count for the square map");
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(classes, classes);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(classes);
  for (Eigen::Index i = 0; i < train.features.rows(); ++i) {
    int label = train.labels[static_cast<size_t>(i)];
    centroids.row(label) += train.features.row(i);
    counts[label] += 1.0;
  }
  for (int c = 0; c < classes; ++c) {
    require(counts[c] > 0.0, "train: class without samples");
    centroids.row(c) /= counts[c];
    double norm = centroids.row(c).norm();
    require(norm > 0.0, "train: degenerate class centroid");
    centroids.row(c) /= norm;
  }
  return centroids;
}

AccuracyReport run_inference(const ScenarioConfig& config, const Dataset& data) {
  if (data.features.cols() != config.ports) {
    throw ContractError("inference: " + std::to_string(data.features.cols()) +
                        " features do not fit " + std::to_string(config.ports) +
                        " ports");
  }
  require(data.features.rows() > 0 &&
              data.labels.size() == static_cast<size_t>(data.features.rows()),
          "inference: malformed dataset");

  attack::Scenario clean = build_scenario(config);
  std::uint64_t base = derive_seed(config.seed, kInference);

  AccuracyReport report;
  report.scenario_id = config.scenario_id;
  attack::PerturbedScenario clean_system = attack::make_clean(clean);
  report.clean_accuracy =
      classify_accuracy(clean_system, data, derive_seed(base, 0));

  // Phase-noise degradation curve; trial seeds are shared across sigmas so
  // curves differ only by the noise scale.
  for (double sigma : config.inference.noise_sigmas) {
    double sum = 0.0;
    for (int t = 0; t < config.inference.trials; ++t) {
      attack::PerturbedScenario noisy = attack::make_clean(clean);
      if (sigma > 0.0) {
        Rng rng(derive_seed(base, 1, static_cast<std::uint64_t>(t)));
        auto& sys = noisy.scenario.system;
        sys.input_mesh = add_phase_noise(sys.input_mesh, sigma, rng);
        sys.output_mesh = add_phase_noise(sys.output_mesh, sigma, rng);
      }
      sum += classify_accuracy(noisy, data, derive_seed(base, 2));
    }
    AccuracyEntry entry;
    entry.label = "phase_noise";
    entry.sigma = sigma;
    entry.trials = config.inference.trials;
    entry.accuracy = sum / config.inference.trials;
    report.noise_curve.push_back(entry);
  }

  for (size_t a = 0; a < config.attacks.size(); ++a) {
    const auto& spec = config.attacks[a];
    spec.validate(clean.system.ports, clean.system.node_count());
    attack::PerturbedScenario attacked =
        attack::inject(clean, spec, /*step=*/0, derive_seed(base, 3, a));
    AccuracyEntry entry;
    entry.label = attack::to_string(spec.kind);
    entry.sigma = spec.magnitude;
    entry.trials = 1;
    entry.accuracy = classify_accuracy(attacked, data, derive_seed(base, 4, a));
    report.attacked.push_back(entry);
  }
  return report;
}

std::string accuracy_to_text(const AccuracyReport& report) {
  std::ostringstream os;
  os << "scenario: " << report.scenario_id << "\n";
  os << "clean accuracy: " << format_double(report.clean_accuracy) << "\n";
  os << "phase-noise curve:\n";
  for (const auto& e : report.noise_curve) {
    os << "  sigma " << format_double(e.sigma) << " rad: accuracy "
       << format_double(e.accuracy) << " (" << e.trials << " trials)\n";
  }
  if (!report.attacked.empty()) {
    os << "under attack:\n";
    for (const auto& e : report.attacked) {
      os << "  " << e.label << " (magnitude " << format_double(e.sigma)
         << "): accuracy " << format_double(e.accuracy) << "\n";
    }
  }
  return os.str();
}

void save_accuracy(const AccuracyReport& report,
                   const std::filesystem::path& json_path) {
  auto entry_to_json = [](const AccuracyEntry& e) {
    return json{{"label", e.label},
                {"sigma", e.sigma},
                {"accuracy", e.accuracy},
                {"trials", e.trials}};
  };
  json curve = json::array();
  for (const auto& e : report.noise_curve) curve.push_back(entry_to_json(e));
  json attacked = json::array();
  for (const auto& e : report.attacked) attacked.push_back(entry_to_json(e));
  json j{{"schema_version", 1},
         {"scenario_id", report.scenario_id},
         {"clean_accuracy", report.clean_accuracy},
         {"noise_curve", curve},
         {"attacked", attacked}};
  std::ofstream f(json_path);
  if (!f) throw std::runtime_error("cannot write file " + json_path.string());
  f << j.dump(2) << "\n";
}

std::string readings_to_csv(const std::vector<physics::Readings>& readings) {
  std::ostringstream os;
  os << "scenario,step,port,power_dbm,phase_rad\n";
  for (const auto& r : readings) {
    for (size_t port = 0; port < r.power_dbm.size(); ++port) {
      os << r.scenario_id << "," << r.step << "," << port << ","
         << format_double(r.power_dbm[port]) << ","
         << format_double(r.phase_rad[port]) << "\n";
    }
  }
  return os.str();
}

void export_readings(const std::vector<physics::Readings>& readings,
                     const std::filesystem::path& path) {
  write_file(path, readings_to_csv(readings));
}

std::vector<physics::Readings> parse_readings_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) ||
      line != "scenario,step,port,power_dbm,phase_rad") {
    throw ValidationError("readings csv: bad header");
  }
  std::vector<physics::Readings> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string scenario, step_s, port_s, power_s, phase_s;
    if (!std::getline(ls, scenario, ',') || !std::getline(ls, step_s, ',') ||
        !std::getline(ls, port_s, ',') || !std::getline(ls, power_s, ',') ||
        !std::getline(ls, phase_s)) {
      throw ValidationError("readings csv: malformed row \"" + line + "\"");
    }
    int step = std::stoi(step_s);
    int port = std::stoi(port_s);
    if (out.empty() || out.back().step != step ||
        out.back().scenario_id != scenario) {
      physics::Readings r;
      r.scenario_id = scenario;
      r.step = step;
      out.push_back(std::move(r));
    }
    if (port != static_cast<int>(out.back().power_dbm.size())) {
      throw ValidationError("readings csv: ports out of order");
    }
    out.back().power_dbm.push_back(std::stod(power_s));
    out.back().phase_rad.push_back(std::stod(phase_s));
  }
  return out;
}

}  // namespace spaasim::harness
