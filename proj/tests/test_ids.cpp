#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spaasim/attack.hpp"
#include "spaasim/ids.hpp"
#include "spaasim/mesh.hpp"
#include "spaasim/rng.hpp"

using namespace spaasim;
using namespace spaasim::ids;

namespace {

attack::Scenario haar_scenario(int ports, std::uint64_t seed) {
  attack::Scenario s;
  s.id = "ids_test";
  s.system = mesh::MeshSystem::from_unitary(mesh::haar_unitary(ports, seed));
  return s;
}

double worst_power(const DetectionReport& r) {
  double w = 0.0;
  for (const auto& d : r.deviations) w = std::max(w, d.power_db);
  return w;
}

double worst_phase(const DetectionReport& r) {
  double w = 0.0;
  for (const auto& d : r.deviations) w = std::max(w, d.phase_rad);
  return w;
}

}  // namespace

TEST_CASE("baseline capture is deterministic and repeat-invariant without noise") {
  attack::Scenario clean = haar_scenario(4, 41);
  attack::PerturbedScenario system = attack::make_clean(clean);
  ProbeSet probes = ProbeSet::basis_plus_uniform(4, clean.id);

  physics::DetectorModel noiseless;
  BaselineRecord m1 = capture_baseline(system, probes, noiseless, 1, 5);
  BaselineRecord m10 = capture_baseline(system, probes, noiseless, 10, 5);
  REQUIRE(m1.records.size() == m10.records.size());
  for (size_t i = 0; i < m1.records.size(); ++i) {
    for (size_t p = 0; p < m1.records[i].size(); ++p) {
      CHECK(m1.records[i][p].power_dbm == m10.records[i][p].power_dbm);
      CHECK(m1.records[i][p].phase_rad == m10.records[i][p].phase_rad);
    }
  }

  physics::DetectorModel noisy;
  noisy.power_noise_sigma_db = 0.2;
  noisy.phase_noise_sigma_rad = 0.02;
  BaselineRecord a = capture_baseline(system, probes, noisy, 3, 5);
  BaselineRecord b = capture_baseline(system, probes, noisy, 3, 5);
  for (size_t i = 0; i < a.records.size(); ++i) {
    for (size_t p = 0; p < a.records[i].size(); ++p) {
      CHECK(a.records[i][p].power_dbm == b.records[i][p].power_dbm);
      CHECK(a.records[i][p].phase_rad == b.records[i][p].phase_rad);
    }
  }
}

TEST_CASE("averaged baseline approaches the noiseless truth") {
  attack::Scenario clean = haar_scenario(4, 42);
  attack::PerturbedScenario system = attack::make_clean(clean);
  ProbeSet probes = ProbeSet::basis_plus_uniform(4, clean.id);

  physics::DetectorModel noiseless;
  BaselineRecord truth = capture_baseline(system, probes, noiseless, 1, 5);

  physics::DetectorModel noisy;
  noisy.power_noise_sigma_db = 0.1;
  BaselineRecord averaged = capture_baseline(system, probes, noisy, 100, 5);
  for (size_t i = 0; i < truth.records.size(); ++i) {
    for (size_t p = 0; p < truth.records[i].size(); ++p) {
      CHECK(std::fabs(averaged.records[i][p].power_dbm -
                      truth.records[i][p].power_dbm) < 0.05);
    }
  }
}

TEST_CASE("check on an unattacked noiseless system reports zeros") {
  attack::Scenario clean = haar_scenario(4, 43);
  attack::PerturbedScenario system = attack::make_clean(clean);
  ProbeSet probes = ProbeSet::basis_plus_uniform(4, clean.id);
  physics::DetectorModel noiseless;
  BaselineRecord baseline = capture_baseline(system, probes, noiseless, 1, 5);

  // any positive thresholds, down to epsilon scale
  for (double th : {1e-9, 1e-3, 0.5}) {
    DetectionReport report =
        check(system, baseline, {th, th}, noiseless, 777);
    CHECK_FALSE(report.alarm);
    CHECK(report.exceedances.empty());
    for (const auto& d : report.deviations) {
      CHECK(d.power_db == 0.0);
      CHECK(d.phase_rad == 0.0);
    }
  }
}

TEST_CASE("hijacking one node past the thresholds raises the alarm") {
  attack::Scenario clean = haar_scenario(4, 44);
  attack::PerturbedScenario system = attack::make_clean(clean);
  ProbeSet probes = ProbeSet::basis_plus_uniform(4, clean.id);
  physics::DetectorModel noiseless;
  BaselineRecord baseline = capture_baseline(system, probes, noiseless, 1, 5);

  attack::AttackSpec hijack;
  hijack.kind = attack::AttackKind::ip_hijack;
  hijack.targets = {1};
  double theta = clean.system.input_mesh.placements[1].setting.theta;
  double phi = clean.system.input_mesh.placements[1].setting.phi;
  hijack.hijack_settings = {mesh::MZISetting(theta + kPi, phi)};
  attack::PerturbedScenario attacked = attack::inject(clean, hijack, 0, 1);

  DetectionReport report =
      check(attacked, baseline, {0.5, 0.05}, noiseless, 778);
  CHECK(report.alarm);
  REQUIRE_FALSE(report.exceedances.empty());
  CHECK(report.exceedances.front().severity >= 1.0);
  // exceedances are sorted by severity
  for (size_t i = 1; i < report.exceedances.size(); ++i) {
    CHECK(report.exceedances[i - 1].severity >=
          report.exceedances[i].severity);
  }
}

TEST_CASE("a phase-only perturbation is caught by the phase channel alone") {
  attack::Scenario clean = haar_scenario(4, 45);
  attack::PerturbedScenario system = attack::make_clean(clean);
  ProbeSet probes = ProbeSet::basis_plus_uniform(4, clean.id);
  physics::DetectorModel noiseless;
  BaselineRecord baseline = capture_baseline(system, probes, noiseless, 1, 5);

  attack::PerturbedScenario shifted = attack::make_clean(clean);
  auto& screen = shifted.scenario.system.input_mesh.output_phases;
  screen[2] = wrap_two_pi(screen[2] + 0.2);

  ThresholdConfig thresholds{0.5, 0.05};
  DetectionReport report = check(shifted, baseline, thresholds, noiseless, 779);
  CHECK(report.alarm);
  for (const auto& d : report.deviations) {
    CHECK(d.power_db < thresholds.power_db);  // power channel alone is blind
    CHECK(d.power_db < 1e-9);
  }
  CHECK(worst_phase(report) > thresholds.phase_rad);
}

TEST_CASE("alarm flag always equals the deviation table") {
  attack::Scenario clean = haar_scenario(4, 46);
  attack::PerturbedScenario system = attack::make_clean(clean);
  ProbeSet probes = ProbeSet::basis_plus_uniform(4, clean.id);
  physics::DetectorModel noisy;
  noisy.power_noise_sigma_db = 0.3;
  BaselineRecord baseline = capture_baseline(system, probes, noisy, 1, 5);
  ThresholdConfig thresholds{0.4, 0.05};
  for (int t = 0; t < 50; ++t) {
    DetectionReport r = check(system, baseline, thresholds, noisy,
                              static_cast<std::uint64_t>(t));
    bool any = false;
    for (const auto& d : r.deviations) {
      bool exceeds = d.power_db > thresholds.power_db ||
                     d.phase_rad > thresholds.phase_rad;
      CHECK(exceeds == d.exceeds);
      any = any || exceeds;
    }
    CHECK(r.alarm == any);
  }
}

TEST_CASE("wrapped distance is a proper circle metric") {
  Rng rng(47);
  for (int t = 0; t < 200; ++t) {
    double a = (rng.uniform() - 0.5) * 20.0;
    double b = (rng.uniform() - 0.5) * 20.0;
    CHECK(wrapped_distance(a, b) == doctest::Approx(wrapped_distance(b, a)));
    CHECK(wrapped_distance(a, b) <= kPi + 1e-12);
    int k = static_cast<int>(rng.next_u64() % 4);
    CHECK(wrapped_distance(a, a + kTwoPi * k) < 1e-9);
  }
}

TEST_CASE("worst deviation grows with flooding and thermal magnitude") {
  attack::Scenario clean = haar_scenario(4, 48);
  attack::PerturbedScenario system = attack::make_clean(clean);
  ProbeSet probes = ProbeSet::basis_plus_uniform(4, clean.id);
  physics::DetectorModel noiseless;
  BaselineRecord baseline = capture_baseline(system, probes, noiseless, 1, 5);
  ThresholdConfig thresholds{0.5, 0.05};

  double last = -1.0;
  for (double sigma : {0.05, 0.1, 0.2, 0.4}) {
    attack::AttackSpec flood;
    flood.kind = attack::AttackKind::flooding;
    flood.targets = {0};
    flood.magnitude = sigma;
    double mean = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      attack::PerturbedScenario attacked = attack::inject(clean, flood, 0, s);
      DetectionReport r = check(attacked, baseline, thresholds, noiseless,
                                1000 + s);  // same seeds across magnitudes
      mean += worst_power(r);
    }
    mean /= 5.0;
    CHECK(mean >= last);
    last = mean;
  }

  last = -1.0;
  for (double dt : {5.0, 10.0, 25.0, 50.0}) {
    attack::AttackSpec heat;
    heat.kind = attack::AttackKind::thermal;
    heat.targets = {2};
    heat.magnitude = dt;
    attack::PerturbedScenario attacked = attack::inject(clean, heat, 0, 1);
    DetectionReport r = check(attacked, baseline, thresholds, noiseless, 2000);
    double dev = std::max(worst_power(r), worst_phase(r));
    CHECK(dev >= last);
    last = dev;
  }
}

TEST_CASE("evaluate: clean suite has zero FPR, the full suite is detected") {
  attack::Scenario clean = haar_scenario(4, 49);
  ProbeSet probes = ProbeSet::basis_plus_uniform(4, clean.id);
  physics::DetectorModel noiseless;
  ThresholdConfig thresholds{0.5, 0.05};

  EvalMetrics empty = evaluate(clean, {}, thresholds, noiseless, probes,
                               /*trials=*/20, /*repeats=*/1, 7);
  CHECK(empty.false_positive_rate == 0.0);
  CHECK(empty.attack_trials == 0);

  std::vector<attack::AttackSpec> suite;
  attack::AttackSpec flood;
  flood.kind = attack::AttackKind::flooding;
  flood.targets = {0};
  flood.magnitude = 0.1;
  suite.push_back(flood);
  attack::AttackSpec bh;
  bh.kind = attack::AttackKind::black_hole;
  bh.targets = {0};
  suite.push_back(bh);
  attack::AttackSpec sink;
  sink.kind = attack::AttackKind::sinkhole;
  sink.targets = {2};  // mid-mesh node: boundary nodes tap sub-threshold
  sink.magnitude = 0.1;
  suite.push_back(sink);
  attack::AttackSpec flip;
  flip.kind = attack::AttackKind::reroute;
  flip.targets = {0};
  suite.push_back(flip);
  attack::AttackSpec hijack;
  hijack.kind = attack::AttackKind::ip_hijack;
  hijack.targets = {0};
  double theta = clean.system.input_mesh.placements[0].setting.theta;
  double phi = clean.system.input_mesh.placements[0].setting.phi;
  hijack.hijack_settings = {mesh::MZISetting(theta + kPi / 2.0, phi)};
  suite.push_back(hijack);

  EvalMetrics metrics = evaluate(clean, suite, thresholds, noiseless, probes,
                                 /*trials=*/5, /*repeats=*/1, 7);
  CHECK(metrics.false_positive_rate == 0.0);
  CHECK(metrics.true_positive_rate == 1.0);
  for (const auto& [kind, rate] : metrics.per_kind_rate) {
    INFO("kind ", kind);
    CHECK(rate == 1.0);
  }
}

TEST_CASE("calibration collapses to epsilon without noise") {
  attack::Scenario clean = haar_scenario(4, 50);
  ProbeSet probes = ProbeSet::basis_plus_uniform(4, clean.id);
  physics::DetectorModel noiseless;
  ThresholdConfig t =
      calibrate_thresholds(clean, noiseless, probes, 0.01, 200, 7);
  CHECK(t.power_db == doctest::Approx(1.5e-9).epsilon(1e-12));
  CHECK(t.phase_rad == doctest::Approx(1.5e-9).epsilon(1e-12));
}

TEST_CASE("calibrated power threshold tracks the empirical quantile") {
  attack::Scenario clean = haar_scenario(4, 51);
  ProbeSet probes = ProbeSet::basis_plus_uniform(4, clean.id);
  physics::DetectorModel noisy;
  noisy.power_noise_sigma_db = 0.1;

  int trials = 4000;
  ThresholdConfig t =
      calibrate_thresholds(clean, noisy, probes, 0.01, trials, 7);

  // Analytic cross-check: per reading the clean deviation is
  // |N(0, sigma*sqrt(2))| and the trial maximum runs over
  // probes x ports = 20 readings, so the 0.99 quantile sits near
  // z(0.99^(1/20)) * sigma * sqrt(2) ~ 0.49 dB; calibration multiplies
  // by the 1.5 safety factor.
  CHECK(t.power_db > 1.5 * 0.35);
  CHECK(t.power_db < 1.5 * 0.65);
  // phase channel is noiseless: collapses to epsilon
  CHECK(t.phase_rad == doctest::Approx(1.5e-9).epsilon(1e-12));

  ThresholdConfig looser =
      calibrate_thresholds(clean, noisy, probes, 0.5, trials, 7);
  CHECK(looser.power_db < t.power_db);  // quantile monotonicity

  CHECK_THROWS_WITH_AS(
      calibrate_thresholds(clean, noisy, probes, 0.01, 50, 7),
      doctest::Contains("cannot resolve"), ValidationError);
}

TEST_CASE("baseline records survive the file round trip") {
  attack::Scenario clean = haar_scenario(3, 52);
  attack::PerturbedScenario system = attack::make_clean(clean);
  ProbeSet probes = ProbeSet::basis_plus_uniform(3, clean.id);
  physics::DetectorModel noisy;
  noisy.power_noise_sigma_db = 0.05;
  BaselineRecord baseline = capture_baseline(system, probes, noisy, 2, 5);

  auto path = std::filesystem::temp_directory_path() / "spaasim_baseline.json";
  save_baseline(baseline, path);
  BaselineRecord loaded = load_baseline(path);
  CHECK(loaded.scenario_id == baseline.scenario_id);
  CHECK(loaded.ports == baseline.ports);
  CHECK(loaded.repeats == baseline.repeats);
  CHECK(loaded.seed == baseline.seed);
  REQUIRE(loaded.records.size() == baseline.records.size());
  for (size_t i = 0; i < baseline.records.size(); ++i) {
    for (size_t p = 0; p < baseline.records[i].size(); ++p) {
      CHECK(loaded.records[i][p].power_dbm == baseline.records[i][p].power_dbm);
      CHECK(loaded.records[i][p].phase_rad == baseline.records[i][p].phase_rad);
    }
    CHECK((loaded.probes.probes[i] - baseline.probes.probes[i]).norm() == 0.0);
  }
  std::filesystem::remove(path);
}
