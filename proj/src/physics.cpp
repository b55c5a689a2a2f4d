#include "spaasim/physics.hpp"

#include <algorithm>
#include <cmath>

#include "spaasim/rng.hpp"

namespace spaasim::physics {

double thermal_phase_offset(const TuningModel& model, double delta_t_kelvin) {
  require(std::isfinite(delta_t_kelvin), "thermal: delta T must be finite");
  require(model.phase_per_kelvin > 0.0, "thermal: slope must be positive");
  return model.phase_per_kelvin * delta_t_kelvin;
}

std::vector<double> crosstalk_offsets(const CrosstalkField& field,
                                      const TuningModel& tuning) {
  require(field.coupling_length_um > 0.0,
          "crosstalk: coupling length must be positive");
  std::vector<double> offsets(field.node_positions.size(), 0.0);
  for (const auto& src : field.heat_sources) {
    require(src.delta_t_kelvin >= 0.0,
            "crosstalk: heating sources need delta T >= 0");
    double base = thermal_phase_offset(tuning, src.delta_t_kelvin);
    for (size_t i = 0; i < field.node_positions.size(); ++i) {
      double dx = field.node_positions[i].x_um - src.position.x_um;
      double dy = field.node_positions[i].y_um - src.position.y_um;
      double dist = std::hypot(dx, dy);
      offsets[i] += base * std::exp(-dist / field.coupling_length_um);
    }
  }
  return offsets;
}

mesh::MeshProgram apply_thermal_crosstalk(const mesh::MeshProgram& program,
                                          const CrosstalkField& field,
                                          const TuningModel& tuning) {
  if (field.node_positions.size() != program.placements.size()) {
    throw ContractError("crosstalk: " +
                        std::to_string(field.node_positions.size()) +
                        " node positions for " +
                        std::to_string(program.placements.size()) +
                        " placements");
  }
  std::vector<double> offsets = crosstalk_offsets(field, tuning);
  mesh::MeshProgram out = program;
  for (size_t i = 0; i < out.placements.size(); ++i) {
    auto& s = out.placements[i].setting;
    s = mesh::MZISetting(s.theta + offsets[i], s.phi + offsets[i]);
  }
  return out;
}

MRRTransfer mrr_transfer(const MRRParams& params) {
  require(params.self_coupling_t1 >= 0.0 && params.self_coupling_t1 <= 1.0 &&
              params.self_coupling_t2 >= 0.0 && params.self_coupling_t2 <= 1.0,
          "mrr: self-coupling coefficients must be in [0, 1]");
  require(params.round_trip_loss_a >= 0.0 && params.round_trip_loss_a <= 1.0,
          "mrr: round-trip amplitude must be in [0, 1]");
  require(std::isfinite(params.round_trip_phase), "mrr: phase must be finite");
  double t1 = params.self_coupling_t1;
  double t2 = params.self_coupling_t2;
  double a = params.round_trip_loss_a;
  Complex loop = a * std::exp(Complex(0.0, params.round_trip_phase));
  Complex denom = 1.0 - t1 * t2 * loop;
  if (std::abs(denom) < 1e-12) {
    throw NumericError("mrr: transfer function singular (t1*t2*a*e^{i phi} ~ 1)");
  }
  MRRTransfer out;
  out.through = (t1 - t2 * loop) / denom;
  out.drop = -std::sqrt((1.0 - t1 * t1) * (1.0 - t2 * t2)) * std::sqrt(a) *
             std::exp(Complex(0.0, params.round_trip_phase / 2.0)) / denom;
  return out;
}

Readings read_outputs(const SignalVector& signal, const DetectorModel& detector,
                      std::uint64_t rng_seed, double input_power_mw,
                      const std::string& scenario_id, int step) {
  require(detector.power_noise_sigma_db >= 0.0 &&
              detector.phase_noise_sigma_rad >= 0.0,
          "detector: noise sigmas must be >= 0");
  require(input_power_mw > 0.0, "detector: reference power must be positive");
  Rng rng(rng_seed);
  Readings out;
  out.scenario_id = scenario_id;
  out.step = step;
  out.power_dbm.reserve(static_cast<size_t>(signal.size()));
  out.phase_rad.reserve(static_cast<size_t>(signal.size()));
  for (Eigen::Index i = 0; i < signal.size(); ++i) {
    double p_mw = std::norm(signal[i]) * input_power_mw;
    double dbm = p_mw > 0.0 ? 10.0 * std::log10(p_mw) : detector.power_floor_dbm;
    dbm = std::max(detector.power_floor_dbm, dbm);
    dbm += rng.gaussian(detector.power_noise_sigma_db);
    double phase = p_mw > 0.0 ? std::arg(signal[i]) : 0.0;
    phase = wrap_pm_pi(phase + rng.gaussian(detector.phase_noise_sigma_rad));
    out.power_dbm.push_back(dbm);
    out.phase_rad.push_back(phase);
  }
  return out;
}

std::vector<Position> grid_positions(const mesh::MeshProgram& program,
                                     double pitch_um) {
  require(pitch_um > 0.0, "layout: pitch must be positive");
  std::vector<Position> pos;
  pos.reserve(program.placements.size());
  for (const auto& p : program.placements) {
    pos.push_back({p.layer * pitch_um, p.top_port * pitch_um});
  }
  return pos;
}

std::vector<Position> system_positions(const mesh::MeshSystem& system,
                                       double pitch_um) {
  std::vector<Position> pos = grid_positions(system.input_mesh, pitch_um);
  int input_layers = 0;
  for (const auto& p : system.input_mesh.placements) {
    input_layers = std::max(input_layers, p.layer + 1);
  }
  // one spare column for the attenuation stage
  double x0 = (input_layers + 1) * pitch_um;
  for (const auto& p : system.output_mesh.placements) {
    pos.push_back({x0 + p.layer * pitch_um, p.top_port * pitch_um});
  }
  return pos;
}

}  // namespace spaasim::physics
