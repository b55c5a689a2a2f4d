#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spaasim/common.hpp"
#include "spaasim/mesh.hpp"

namespace spaasim::physics {

// Linear thermo-optic phase map: one microheater kelvin buys
// phase_per_kelvin radians on the shifter it sits on.
struct TuningModel {
  double phase_per_kelvin = 0.02;   // rad/K
  double nominal_temperature = 300.0;  // K
};

struct Position {
  double x_um = 0.0;
  double y_um = 0.0;
};

struct HeatSource {
  Position position;
  double delta_t_kelvin = 0.0;
};

// Geometry and decay model for inter-node thermal crosstalk. One position
// per MZI placement, exponential decay with the coupling length.
struct CrosstalkField {
  std::vector<Position> node_positions;
  double coupling_length_um = 100.0;
  std::vector<HeatSource> heat_sources;
};

// Add-drop microring: two self-coupling coefficients, round-trip amplitude
// a and round-trip phase (wavelength detuning).
struct MRRParams {
  double self_coupling_t1 = 0.9;
  double self_coupling_t2 = 0.9;
  double round_trip_loss_a = 1.0;
  double round_trip_phase = 0.0;
};

struct MRRTransfer {
  Complex through;
  Complex drop;
};

// Coherent readout: Gaussian read noise on power (dB) and phase (rad),
// clamped to a power floor so zero amplitudes stay representable.
struct DetectorModel {
  double power_noise_sigma_db = 0.0;
  double phase_noise_sigma_rad = 0.0;
  double power_floor_dbm = -120.0;
};

// One acquisition of every output port.
struct Readings {
  std::string scenario_id;
  int step = 0;
  std::vector<double> power_dbm;
  std::vector<double> phase_rad;
};

double thermal_phase_offset(const TuningModel& model, double delta_t_kelvin);

// Per-placement phase offsets from all heat sources, summed with
// exponential distance decay, applied to both theta and phi.
mesh::MeshProgram apply_thermal_crosstalk(const mesh::MeshProgram& program,
                                          const CrosstalkField& field,
                                          const TuningModel& tuning);

// Offsets only, same decay model; exposed for tests and the attack engine.
std::vector<double> crosstalk_offsets(const CrosstalkField& field,
                                      const TuningModel& tuning);

MRRTransfer mrr_transfer(const MRRParams& params);

// Sample detector readings for one signal vector. Power in dBm against the
// given per-port reference power; phase wrapped to (-pi, pi], reported as 0
// for zero amplitude. Deterministic per seed.
Readings read_outputs(const SignalVector& signal, const DetectorModel& detector,
                      std::uint64_t rng_seed, double input_power_mw = 1.0,
                      const std::string& scenario_id = "", int step = 0);

// Rectangular chip layout on a uniform grid: x follows the layer, y the top
// port of each placement.
std::vector<Position> grid_positions(const mesh::MeshProgram& program,
                                     double pitch_um = 50.0);

// Layout for a two-mesh system; the output mesh is offset in x past the
// input mesh and the attenuation column.
std::vector<Position> system_positions(const mesh::MeshSystem& system,
                                       double pitch_um = 50.0);

}  // namespace spaasim::physics
