#include "spaasim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spaasim/rng.hpp"

namespace spaasim::mesh {

namespace {

const Complex kI(0.0, 1.0);

// Compact form of the convention in mesh.hpp:
//   T = i * e^{i*theta/2} [[e^{i*phi} s, c], [e^{i*phi} c, -s]]
// with s = sin(theta/2), c = cos(theta/2). Identical to the C*P*C*E product.
struct Block2 {
  Complex t00, t01, t10, t11;
};

Block2 mzi_block(double theta, double phi) {
  double s = std::sin(theta / 2.0);
  double c = std::cos(theta / 2.0);
  Complex lead = kI * std::exp(kI * (theta / 2.0));
  Complex ph = std::exp(kI * phi);
  return {lead * ph * s, lead * c, lead * ph * c, lead * -s};
}

void apply_block_to_pair(const Block2& b, Complex& upper, Complex& lower) {
  Complex a = upper, d = lower;
  upper = b.t00 * a + b.t01 * d;
  lower = b.t10 * a + b.t11 * d;
}

// Left-multiply rows (k, k+1) of m by the block.
void apply_block_to_rows(const Block2& b, TransferMatrix& m, int k) {
  Eigen::RowVectorXcd upper = m.row(k);
  Eigen::RowVectorXcd lower = m.row(k + 1);
  m.row(k) = b.t00 * upper + b.t01 * lower;
  m.row(k + 1) = b.t10 * upper + b.t11 * lower;
}

// Right-multiply columns (k, k+1) of m by the adjoint of the block.
void apply_block_adjoint_to_cols(const Block2& b, TransferMatrix& m, int k) {
  Eigen::VectorXcd left = m.col(k);
  Eigen::VectorXcd right = m.col(k + 1);
  m.col(k) = std::conj(b.t00) * left + std::conj(b.t01) * right;
  m.col(k + 1) = std::conj(b.t10) * left + std::conj(b.t11) * right;
}

// Nulling settings for U * T(theta, phi)^dagger at column pair (c, c+1):
// the new (r, c) entry is proportional to e^{-i*phi} s * a + cos * b with
// a = U(r, c), b = U(r, c+1). Zero pivots resolve to the bar state.
MZISetting right_null_setting(Complex a, Complex b) {
  double ma = std::abs(a), mb = std::abs(b);
  if (ma == 0.0 && mb == 0.0) return {kPi, 0.0};
  if (mb == 0.0) return {0.0, 0.0};
  if (ma == 0.0) return {kPi, 0.0};
  double theta = 2.0 * std::atan2(mb, ma);
  double phi = std::arg(-a * std::conj(b));
  return {theta, phi};
}

// Nulling settings for T(theta, phi) * U at row pair (r-1, r): the new
// (r, c) entry is proportional to e^{i*phi} c * a - s * b with
// a = U(r-1, c), b = U(r, c).
MZISetting left_null_setting(Complex a, Complex b) {
  double ma = std::abs(a), mb = std::abs(b);
  if (ma == 0.0 && mb == 0.0) return {kPi, 0.0};
  if (mb == 0.0) return {kPi, 0.0};
  if (ma == 0.0) return {0.0, 0.0};
  double theta = 2.0 * std::atan2(ma, mb);
  double phi = std::arg(b) - std::arg(a);
  return {theta, phi};
}

// Commute an inverse block from the left of a phase screen to its right:
//   T(theta, phi)^dagger * diag(e^{i*psi1}, e^{i*psi2})
//     = diag(e^{i*psi1'}, e^{i*psi2'}) * T(theta, phi')
// Exact for all phases under the convention in mesh.hpp.
void push_through_screen(const MZISetting& in, double& psi1, double& psi2,
                         MZISetting& out) {
  out = MZISetting(in.theta, psi1 - psi2);
  double p1 = psi2 - in.phi - in.theta + kPi;
  double p2 = psi2 - in.theta + kPi;
  psi1 = wrap_two_pi(p1);
  psi2 = wrap_two_pi(p2);
}

// Pack placements into rectangular layers: each MZI lands one layer after
// the latest layer touching either of its ports.
void assign_layers(MeshProgram& program) {
  std::vector<int> last(program.port_count, -1);
  for (auto& p : program.placements) {
    int layer = std::max(last[p.top_port], last[p.top_port + 1]) + 1;
    p.layer = layer;
    last[p.top_port] = layer;
    last[p.top_port + 1] = layer;
  }
}

}  // namespace

MeshProgram MeshProgram::identity(int ports) {
  require(ports >= 1, "mesh: port count must be >= 1");
  MeshProgram p;
  p.port_count = ports;
  p.output_phases.assign(static_cast<size_t>(ports), 0.0);
  return p;
}

void MeshProgram::validate() const {
  require(port_count >= 1, "mesh: port count must be >= 1");
  require(static_cast<int>(output_phases.size()) == port_count,
          "mesh: phase screen size must equal port count");
  for (const auto& p : placements) {
    if (p.top_port < 0 || p.top_port + 1 >= port_count) {
      throw ContractError("mesh: placement on ports (" +
                          std::to_string(p.top_port) + ", " +
                          std::to_string(p.top_port + 1) +
                          ") is outside the " + std::to_string(port_count) +
                          "-port mesh");
    }
    if (!std::isfinite(p.setting.theta) || !std::isfinite(p.setting.phi)) {
      throw ContractError("mesh: non-finite phase setting");
    }
  }
}

TransferMatrix coupler_transfer(double power_split) {
  if (!(power_split >= 0.0 && power_split <= 1.0)) {
    throw ContractError("coupler: power split must be in [0, 1], got " +
                        std::to_string(power_split));
  }
  double t = std::sqrt(1.0 - power_split);
  double r = std::sqrt(power_split);
  TransferMatrix m(2, 2);
  m << Complex(t, 0.0), Complex(0.0, r), Complex(0.0, r), Complex(t, 0.0);
  return m;
}

TransferMatrix mzi_transfer(const MZISetting& setting) {
  require(std::isfinite(setting.theta) && std::isfinite(setting.phi),
          "mzi: phases must be finite");
  Block2 b = mzi_block(setting.theta, setting.phi);
  TransferMatrix m(2, 2);
  m << b.t00, b.t01, b.t10, b.t11;
  return m;
}

SignalVector mesh_forward(const MeshProgram& program, const SignalVector& input) {
  if (input.size() != program.port_count) {
    throw ContractError("mesh_forward: input has " +
                        std::to_string(input.size()) + " ports, program has " +
                        std::to_string(program.port_count));
  }
  SignalVector x = input;
  for (const auto& p : program.placements) {
    Block2 b = mzi_block(p.setting.theta, p.setting.phi);
    apply_block_to_pair(b, x[p.top_port], x[p.top_port + 1]);
  }
  for (int i = 0; i < program.port_count; ++i) {
    x[i] *= std::exp(kI * program.output_phases[i]);
  }
  return x;
}

TransferMatrix mesh_recompose(const MeshProgram& program) {
  program.validate();
  int n = program.port_count;
  TransferMatrix m = TransferMatrix::Identity(n, n);
  for (const auto& p : program.placements) {
    apply_block_to_rows(mzi_block(p.setting.theta, p.setting.phi), m,
                        p.top_port);
  }
  for (int i = 0; i < n; ++i) {
    m.row(i) *= std::exp(kI * program.output_phases[i]);
  }
  return m;
}

double unitarity_defect(const TransferMatrix& m) {
  TransferMatrix g = m.adjoint() * m;
  g -= TransferMatrix::Identity(m.cols(), m.cols());
  return g.norm();
}

MeshProgram clements_decompose(const TransferMatrix& unitary,
                               double unitarity_tol) {
  const int n = static_cast<int>(unitary.rows());
  require(unitary.rows() == unitary.cols() && n >= 1,
          "decompose: matrix must be square");
  double defect = unitarity_defect(unitary);
  if (!(defect <= unitarity_tol)) {
    throw ValidationError(
        "decompose: input is not unitary, |U^dagger U - I|_F = " +
        std::to_string(defect));
  }

  TransferMatrix v = unitary;
  struct Null {
    int top_port;
    MZISetting setting;
  };
  std::vector<Null> rights;  // chronological, consumed from the input side
  std::vector<Null> lefts;   // chronological, consumed from the output side

  // Null the lower triangle along anti-diagonal sweeps, alternating the
  // side the MZI is pulled from (rectangular arrangement).
  for (int s = 0; s < n - 1; ++s) {
    if (s % 2 == 0) {
      for (int j = 0; j <= s; ++j) {
        int r = n - 1 - j;
        int c = s - j;
        MZISetting st = right_null_setting(v(r, c), v(r, c + 1));
        apply_block_adjoint_to_cols(mzi_block(st.theta, st.phi), v, c);
        rights.push_back({c, st});
      }
    } else {
      for (int j = 0; j <= s; ++j) {
        int r = n - 1 - s + j;
        int c = j;
        MZISetting st = left_null_setting(v(r - 1, c), v(r, c));
        apply_block_to_rows(mzi_block(st.theta, st.phi), v, r - 1);
        lefts.push_back({r - 1, st});
      }
    }
  }

  // v is now diagonal with unit-modulus entries.
  std::vector<double> psi(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) psi[static_cast<size_t>(i)] = std::arg(v(i, i));

  MeshProgram program;
  program.port_count = n;
  program.placements.reserve(rights.size() + lefts.size());
  for (const auto& r : rights) {
    program.placements.push_back({0, r.top_port, r.setting});
  }
  // The output-side inverses sit to the left of the phase screen; commute
  // each one through so the screen ends up last. Reverse chronological
  // order keeps them adjacent to the screen as they move.
  for (auto it = lefts.rbegin(); it != lefts.rend(); ++it) {
    MZISetting pushed;
    push_through_screen(it->setting, psi[static_cast<size_t>(it->top_port)],
                        psi[static_cast<size_t>(it->top_port) + 1], pushed);
    program.placements.push_back({0, it->top_port, pushed});
  }
  program.output_phases.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    program.output_phases[static_cast<size_t>(i)] =
        wrap_two_pi(psi[static_cast<size_t>(i)]);
  }
  assign_layers(program);
  return program;
}

WeightMatrix WeightMatrix::from_matrix(const TransferMatrix& m) {
  require(m.rows() == m.cols() && m.rows() >= 1,
          "weights: matrix must be square");
  Eigen::JacobiSVD<TransferMatrix> svd(m);
  if (svd.info() != Eigen::Success) {
    throw NumericError("weights: SVD did not converge");
  }
  double smax = svd.singularValues()(0);
  WeightMatrix w;
  w.entries = m;
  w.scale = std::max(1.0, smax);
  return w;
}

SvdMeshes svd_map(const WeightMatrix& weights) {
  const auto& m = weights.entries;
  require(m.rows() == m.cols() && m.rows() >= 1,
          "svd_map: weight matrix must be square");
  Eigen::JacobiSVD<TransferMatrix> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw NumericError("svd_map: SVD did not converge");
  }
  SvdMeshes out;
  out.output_mesh = clements_decompose(svd.matrixU());
  out.input_mesh = clements_decompose(svd.matrixV().adjoint());
  const auto& sv = svd.singularValues();
  out.attenuations.resize(static_cast<size_t>(sv.size()));
  for (int i = 0; i < sv.size(); ++i) {
    out.attenuations[static_cast<size_t>(i)] =
        std::min(1.0, sv(i) / weights.scale);
  }
  return out;
}

MeshSystem MeshSystem::from_weights(const WeightMatrix& weights) {
  SvdMeshes meshes = svd_map(weights);
  MeshSystem sys;
  sys.ports = static_cast<int>(weights.entries.rows());
  sys.input_mesh = std::move(meshes.input_mesh);
  sys.attenuations = std::move(meshes.attenuations);
  sys.output_mesh = std::move(meshes.output_mesh);
  return sys;
}

MeshSystem MeshSystem::from_unitary(const TransferMatrix& unitary) {
  MeshSystem sys;
  sys.ports = static_cast<int>(unitary.rows());
  sys.input_mesh = clements_decompose(unitary);
  sys.attenuations.assign(static_cast<size_t>(sys.ports), 1.0);
  sys.output_mesh = MeshProgram::identity(sys.ports);
  return sys;
}

SignalVector system_forward(const MeshSystem& system, const SignalVector& input) {
  if (input.size() != system.ports) {
    throw ContractError("system_forward: input has " +
                        std::to_string(input.size()) + " ports, system has " +
                        std::to_string(system.ports));
  }
  require(static_cast<int>(system.attenuations.size()) == system.ports,
          "system_forward: attenuation stage size must equal port count");
  SignalVector x = mesh_forward(system.input_mesh, input);
  for (int i = 0; i < system.ports; ++i) {
    x[i] *= system.attenuations[static_cast<size_t>(i)];
  }
  return mesh_forward(system.output_mesh, x);
}

TransferMatrix haar_unitary(int n, std::uint64_t seed) {
  require(n >= 1, "haar_unitary: n must be >= 1");
  Rng rng(seed);
  TransferMatrix z(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      z(i, j) = rng.complex_gaussian(1.0 / std::sqrt(2.0));
    }
  }
  Eigen::HouseholderQR<TransferMatrix> qr(z);
  TransferMatrix q = qr.householderQ();
  TransferMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    Complex d = r(i, i);
    double mag = std::abs(d);
    q.col(i) *= (mag == 0.0) ? Complex(1.0, 0.0) : d / mag;
  }
  return q;
}

}  // namespace spaasim::mesh
