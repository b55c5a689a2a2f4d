#pragma once

#include <cstdint>
#include <vector>

#include "spaasim/common.hpp"

namespace spaasim::mesh {

// MZI convention used throughout this project
// --------------------------------------------
// A 2x2 Mach-Zehnder block is the cascade  T(theta, phi) = C * P(theta) * C * E(phi)
// with
//   C        = (1/sqrt(2)) [[1, i], [i, 1]]        (ideal 3-dB coupler)
//   P(theta) = diag(e^{i*theta}, 1)                (internal arm phase difference)
//   E(phi)   = diag(e^{i*phi}, 1)                  (external phase on the top input)
// which closes to
//   T = (1/2) [[e^{i*phi}(e^{i*theta}-1),   i(e^{i*theta}+1)      ],
//              [i*e^{i*phi}(e^{i*theta}+1), 1-e^{i*theta}         ]]
// theta = 0 is the cross state, theta = pi the bar state. Every transfer
// matrix, decomposition and phase program in the code base uses this
// convention; all phases are stored wrapped into [0, 2*pi).

struct MZISetting {
  double theta = 0.0;
  double phi = 0.0;

  MZISetting() = default;
  MZISetting(double theta_rad, double phi_rad)
      : theta(wrap_two_pi(theta_rad)), phi(wrap_two_pi(phi_rad)) {}
};

// One MZI in the rectangular mesh, acting on ports (top_port, top_port+1).
struct Placement {
  int layer = 0;
  int top_port = 0;
  MZISetting setting;
};

// An ordered MZI phase program realizing an N x N unitary: placements are
// applied to the signal vector in list order, then the output phase screen.
struct MeshProgram {
  int port_count = 0;
  std::vector<Placement> placements;
  std::vector<double> output_phases;  // size port_count, wrapped [0, 2*pi)

  static MeshProgram identity(int ports);
  int node_count() const { return static_cast<int>(placements.size()); }
  void validate() const;  // throws ContractError on malformed structure
};

// A weight matrix normalized so the optical implementation never has to
// amplify: entries/scale has spectral norm <= 1.
struct WeightMatrix {
  TransferMatrix entries;
  double scale = 1.0;

  static WeightMatrix from_matrix(const TransferMatrix& m);
  TransferMatrix normalized() const { return entries / scale; }
};

// SVD-mapped accelerator: input_mesh realizes V^dagger, the diagonal
// attenuation stage realizes Sigma/scale, output_mesh realizes U.
struct SvdMeshes {
  MeshProgram output_mesh;            // U
  std::vector<double> attenuations;   // in [0, 1]
  MeshProgram input_mesh;             // V^dagger
};

// The programmed accelerator as a whole. A plain unitary system is the
// degenerate case: attenuations all 1, empty output mesh.
struct MeshSystem {
  int ports = 0;
  MeshProgram input_mesh;
  std::vector<double> attenuations;
  MeshProgram output_mesh;

  static MeshSystem from_weights(const WeightMatrix& weights);
  static MeshSystem from_unitary(const TransferMatrix& unitary);
  int node_count() const {
    return input_mesh.node_count() + output_mesh.node_count();
  }
};

// 2x2 coupler [[t, i*r], [i*r, t]], t = sqrt(1-power_split), r = sqrt(power_split).
TransferMatrix coupler_transfer(double power_split);

// Closed-form 2x2 MZI transfer for the convention above. Always unitary.
TransferMatrix mzi_transfer(const MZISetting& setting);

// Propagate amplitudes through the program. Preserves total power.
SignalVector mesh_forward(const MeshProgram& program, const SignalVector& input);

// Dense N x N product of all placements and the phase screen.
TransferMatrix mesh_recompose(const MeshProgram& program);

// Rectangular mesh decomposition of an N x N unitary into N(N-1)/2 MZIs
// plus an output phase screen. mesh_recompose(result) == unitary to 1e-9.
MeshProgram clements_decompose(const TransferMatrix& unitary,
                               double unitarity_tol = 1e-8);

// W/scale = U * Sigma * V^dagger mapped onto two meshes and attenuators.
SvdMeshes svd_map(const WeightMatrix& weights);

// Propagate through input mesh, attenuators, output mesh.
SignalVector system_forward(const MeshSystem& system, const SignalVector& input);

// Haar-distributed random unitary (QR of a complex Ginibre matrix with the
// phase convention fix-up). Deterministic per seed.
TransferMatrix haar_unitary(int n, std::uint64_t seed);

// Frobenius norm of U^dagger*U - I; the unitarity defect.
double unitarity_defect(const TransferMatrix& m);

}  // namespace spaasim::mesh
