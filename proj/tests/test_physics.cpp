#include <doctest.h>

#include <cmath>

#include "spaasim/mesh.hpp"
#include "spaasim/physics.hpp"
#include "spaasim/rng.hpp"

using namespace spaasim;
using namespace spaasim::physics;

namespace {

mesh::MeshProgram small_program() {
  mesh::MeshProgram prog = mesh::MeshProgram::identity(3);
  prog.placements.push_back({0, 0, mesh::MZISetting(1.0, 2.0)});
  prog.placements.push_back({1, 1, mesh::MZISetting(3.0, 4.0)});
  prog.placements.push_back({2, 0, mesh::MZISetting(5.0, 6.0)});
  return prog;
}

}  // namespace

TEST_CASE("thermal phase offset is the linear map") {
  TuningModel model;
  CHECK(thermal_phase_offset(model, 0.0) == 0.0);
  model.phase_per_kelvin = 0.02;
  CHECK(thermal_phase_offset(model, 25.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(thermal_phase_offset(model, -10.0) ==
        doctest::Approx(-thermal_phase_offset(model, 10.0)).epsilon(1e-15));
}

TEST_CASE("crosstalk with no heat sources leaves the program untouched") {
  mesh::MeshProgram prog = small_program();
  CrosstalkField field;
  field.node_positions = grid_positions(prog);
  mesh::MeshProgram out = apply_thermal_crosstalk(prog, field, TuningModel{});
  for (size_t i = 0; i < prog.placements.size(); ++i) {
    CHECK(out.placements[i].setting.theta == prog.placements[i].setting.theta);
    CHECK(out.placements[i].setting.phi == prog.placements[i].setting.phi);
  }
}

TEST_CASE("single heat source decays with distance per the kernel") {
  mesh::MeshProgram prog = small_program();
  TuningModel tuning;
  CrosstalkField field;
  field.node_positions = grid_positions(prog, 50.0);
  field.coupling_length_um = 100.0;
  field.heat_sources = {{field.node_positions[0], 25.0}};

  std::vector<double> offsets = crosstalk_offsets(field, tuning);
  CHECK(offsets[0] == doctest::Approx(tuning.phase_per_kelvin * 25.0).epsilon(1e-15));
  for (size_t i = 0; i < offsets.size(); ++i) {
    double dx = field.node_positions[i].x_um - field.node_positions[0].x_um;
    double dy = field.node_positions[i].y_um - field.node_positions[0].y_um;
    double expected =
        tuning.phase_per_kelvin * 25.0 * std::exp(-std::hypot(dx, dy) / 100.0);
    CHECK(offsets[i] == doctest::Approx(expected).epsilon(1e-12));
  }

  mesh::MeshProgram heated = apply_thermal_crosstalk(prog, field, tuning);
  CHECK(heated.placements[0].setting.theta ==
        doctest::Approx(wrap_two_pi(1.0 + offsets[0])).epsilon(1e-12));
  CHECK(heated.placements[0].setting.phi ==
        doctest::Approx(wrap_two_pi(2.0 + offsets[0])).epsilon(1e-12));
}

TEST_CASE("ambient heating offsets every placement equally") {
  mesh::MeshProgram prog = small_program();
  TuningModel tuning;
  CrosstalkField field;
  field.node_positions = grid_positions(prog);
  field.coupling_length_um = 1e12;  // global temperature rise
  field.heat_sources = {{{0.0, 0.0}, 25.0}};
  std::vector<double> offsets = crosstalk_offsets(field, tuning);
  for (double o : offsets) {
    CHECK(o == doctest::Approx(offsets[0]).epsilon(1e-9));
  }
}

TEST_CASE("crosstalk offsets strictly decrease with distance") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    CrosstalkField field;
    field.coupling_length_um = 20.0 + 200.0 * rng.uniform();
    for (int i = 0; i < 8; ++i) {
      field.node_positions.push_back(
          {rng.uniform() * 500.0, rng.uniform() * 500.0});
    }
    Position src{rng.uniform() * 500.0, rng.uniform() * 500.0};
    field.heat_sources = {{src, 10.0 + 40.0 * rng.uniform()}};
    std::vector<double> offsets = crosstalk_offsets(field, TuningModel{});
    for (size_t i = 0; i < offsets.size(); ++i) {
      for (size_t j = 0; j < offsets.size(); ++j) {
        double di = std::hypot(field.node_positions[i].x_um - src.x_um,
                               field.node_positions[i].y_um - src.y_um);
        double dj = std::hypot(field.node_positions[j].x_um - src.x_um,
                               field.node_positions[j].y_um - src.y_um);
        if (di < dj) CHECK(offsets[i] > offsets[j]);
      }
    }
  }
}

TEST_CASE("crosstalk validates the position count") {
  mesh::MeshProgram prog = small_program();
  CrosstalkField field;
  field.node_positions = {{0, 0}};
  CHECK_THROWS_AS(apply_thermal_crosstalk(prog, field, TuningModel{}),
                  ContractError);
}

TEST_CASE("mrr critical coupling sends everything to the drop port") {
  MRRParams params;
  params.self_coupling_t1 = 0.9;
  params.self_coupling_t2 = 0.9;
  params.round_trip_loss_a = 1.0;
  params.round_trip_phase = 0.0;
  MRRTransfer t = mrr_transfer(params);
  CHECK(std::abs(t.through) < 1e-14);
  CHECK(std::norm(t.through) + std::norm(t.drop) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mrr far off resonance passes to the through port") {
  MRRParams params;
  params.self_coupling_t1 = 0.9;
  params.self_coupling_t2 = 0.9;
  params.round_trip_loss_a = 1.0;
  params.round_trip_phase = kPi;
  MRRTransfer t = mrr_transfer(params);
  double expected = (1.8 / 1.81) * (1.8 / 1.81);  // (t1+t2)/(1+t1*t2), squared
  CHECK(std::norm(t.through) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::norm(t.through) > 0.98);
}

TEST_CASE("mrr with a fully lossy ring reduces to the first coupler") {
  MRRParams params;
  params.self_coupling_t1 = 0.7;
  params.self_coupling_t2 = 0.9;
  params.round_trip_loss_a = 0.0;
  params.round_trip_phase = 1.3;
  MRRTransfer t = mrr_transfer(params);
  CHECK(std::abs(t.drop) == 0.0);
  CHECK(std::abs(t.through - Complex(0.7, 0.0)) < 1e-15);
}

TEST_CASE("mrr transfer is passive for all parameters") {
  Rng rng(22);
  for (int trial = 0; trial < 500; ++trial) {
    MRRParams params;
    params.self_coupling_t1 = rng.uniform();
    params.self_coupling_t2 = rng.uniform();
    params.round_trip_loss_a = rng.uniform();
    params.round_trip_phase = rng.uniform() * kTwoPi;
    Complex denom = 1.0 - params.self_coupling_t1 * params.self_coupling_t2 *
                              params.round_trip_loss_a *
                              std::exp(Complex(0, params.round_trip_phase));
    if (std::abs(denom) < 1e-6) continue;  // skip near-singular draws
    MRRTransfer t = mrr_transfer(params);
    CHECK(std::norm(t.through) + std::norm(t.drop) <= 1.0 + 1e-12);
  }
}

TEST_CASE("mrr singular point raises a numeric error") {
  MRRParams params;
  params.self_coupling_t1 = 1.0;
  params.self_coupling_t2 = 1.0;
  params.round_trip_loss_a = 1.0;
  params.round_trip_phase = 0.0;
  CHECK_THROWS_AS(mrr_transfer(params), NumericError);
}

TEST_CASE("read_outputs reference points") {
  DetectorModel detector;  // zero noise
  SignalVector s(3);
  s << Complex(1, 0), Complex(0, 0), Complex(0, 1);
  Readings r = read_outputs(s, detector, 0);
  CHECK(r.power_dbm[0] == 0.0);          // 1 mW reference
  CHECK(r.power_dbm[1] == detector.power_floor_dbm);
  CHECK(r.phase_rad[1] == 0.0);          // floor convention
  CHECK(r.power_dbm[2] == 0.0);
  CHECK(r.phase_rad[2] == doctest::Approx(kPi / 2.0).epsilon(1e-15));
}

TEST_CASE("read_outputs is deterministic per seed and exact without noise") {
  DetectorModel noisy;
  noisy.power_noise_sigma_db = 0.3;
  noisy.phase_noise_sigma_rad = 0.05;
  Rng rng(23);
  SignalVector s(4);
  for (int i = 0; i < 4; ++i) s[i] = rng.complex_gaussian(1.0);

  Readings a = read_outputs(s, noisy, 99);
  Readings b = read_outputs(s, noisy, 99);
  CHECK(a.power_dbm == b.power_dbm);
  CHECK(a.phase_rad == b.phase_rad);
  Readings c = read_outputs(s, noisy, 100);
  CHECK(a.power_dbm != c.power_dbm);

  DetectorModel clean;
  Readings exact1 = read_outputs(s, clean, 1);
  Readings exact2 = read_outputs(s, clean, 2);
  CHECK(exact1.power_dbm == exact2.power_dbm);  // seed-independent
  for (int i = 0; i < 4; ++i) {
    CHECK(exact1.power_dbm[static_cast<size_t>(i)] ==
          10.0 * std::log10(std::norm(s[i])));
    CHECK(exact1.phase_rad[static_cast<size_t>(i)] ==
          wrap_pm_pi(std::arg(s[i])));
  }
}

TEST_CASE("grid and system layouts follow the rectangle") {
  mesh::MeshProgram prog = small_program();
  std::vector<Position> pos = grid_positions(prog, 50.0);
  REQUIRE(pos.size() == 3);
  CHECK(pos[0].x_um == 0.0);
  CHECK(pos[0].y_um == 0.0);
  CHECK(pos[1].x_um == 50.0);
  CHECK(pos[1].y_um == 50.0);
  CHECK(pos[2].x_um == 100.0);
  CHECK(pos[2].y_um == 0.0);

  mesh::MeshSystem sys;
  sys.ports = 3;
  sys.input_mesh = prog;
  sys.attenuations = {1.0, 1.0, 1.0};
  sys.output_mesh = prog;
  std::vector<Position> spos = system_positions(sys, 50.0);
  REQUIRE(spos.size() == 6);
  // output mesh shifted past the 3 input layers plus the attenuator column
  CHECK(spos[3].x_um == doctest::Approx(200.0));
}
