#include "spaasim/attack.hpp"

#include <algorithm>
#include <cmath>

#include "spaasim/rng.hpp"

namespace spaasim::attack {

namespace {

// Global node ids cover the input mesh first, then the output mesh.
struct NodeRef {
  mesh::MeshProgram* program;
  size_t index;
};

NodeRef resolve_node(mesh::MeshSystem& system, int node) {
  int m1 = system.input_mesh.node_count();
  if (node < m1) {
    return {&system.input_mesh, static_cast<size_t>(node)};
  }
  return {&system.output_mesh, static_cast<size_t>(node - m1)};
}

void apply_payload(PerturbedScenario& out, const AttackSpec& attack) {
  auto& system = out.scenario.system;
  switch (attack.kind) {
    case AttackKind::flooding:
      for (int port : attack.targets) {
        out.input_noise.push_back({port, attack.magnitude});
      }
      break;
    case AttackKind::black_hole:
      for (int node : attack.targets) {
        out.lossy_nodes.push_back({node, 0.0});
      }
      break;
    case AttackKind::sinkhole:
      for (int node : attack.targets) {
        out.lossy_nodes.push_back({node, std::sqrt(1.0 - attack.magnitude)});
        out.taps.push_back({node, attack.magnitude});
      }
      break;
    case AttackKind::reroute:
      for (int node : attack.targets) {
        NodeRef ref = resolve_node(system, node);
        auto& s = ref.program->placements[ref.index].setting;
        s = mesh::MZISetting(s.theta + kPi, s.phi);
      }
      break;
    case AttackKind::ip_hijack:
      for (size_t i = 0; i < attack.targets.size(); ++i) {
        NodeRef ref = resolve_node(system, attack.targets[i]);
        ref.program->placements[ref.index].setting = attack.hijack_settings[i];
      }
      break;
    case AttackKind::thermal: {
      std::vector<physics::Position> positions =
          physics::system_positions(system, out.scenario.layout_pitch_um);
      std::vector<physics::HeatSource> sources;
      sources.reserve(attack.targets.size());
      for (int node : attack.targets) {
        sources.push_back(
            {positions[static_cast<size_t>(node)], attack.magnitude});
      }
      int m1 = system.input_mesh.node_count();
      physics::CrosstalkField field;
      field.coupling_length_um = out.scenario.crosstalk_coupling_length_um;
      field.heat_sources = sources;
      field.node_positions.assign(positions.begin(), positions.begin() + m1);
      system.input_mesh = physics::apply_thermal_crosstalk(
          system.input_mesh, field, out.scenario.tuning);
      field.node_positions.assign(positions.begin() + m1, positions.end());
      system.output_mesh = physics::apply_thermal_crosstalk(
          system.output_mesh, field, out.scenario.tuning);
      break;
    }
  }
}

}  // namespace

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::flooding: return "flooding";
    case AttackKind::black_hole: return "black_hole";
    case AttackKind::sinkhole: return "sinkhole";
    case AttackKind::reroute: return "reroute";
    case AttackKind::ip_hijack: return "ip_hijack";
    case AttackKind::thermal: return "thermal";
  }
  throw ValidationError("unknown attack kind");
}

AttackKind attack_kind_from_string(const std::string& name) {
  if (name == "flooding") return AttackKind::flooding;
  if (name == "black_hole") return AttackKind::black_hole;
  if (name == "sinkhole") return AttackKind::sinkhole;
  if (name == "reroute") return AttackKind::reroute;
  if (name == "ip_hijack") return AttackKind::ip_hijack;
  if (name == "thermal") return AttackKind::thermal;
  throw ValidationError("unknown attack kind '" + name + "'");
}

bool trigger_fires(const Trigger& trigger, int step,
                   const std::vector<std::string>& tags) {
  switch (trigger.kind) {
    case Trigger::Kind::always:
      return true;
    case Trigger::Kind::after_step:
      return step >= trigger.step;
    case Trigger::Kind::on_scenario_tag:
      return std::find(tags.begin(), tags.end(), trigger.tag) != tags.end();
  }
  return false;
}

void AttackSpec::validate(int ports, int node_count) const {
  bool node_targeted = kind != AttackKind::flooding;
  if (targets.empty()) {
    throw ValidationError("attack " + to_string(kind) + ": targets required");
  }
  int limit = node_targeted ? node_count : ports;
  for (int t : targets) {
    if (t < 0 || t >= limit) {
      throw ValidationError("attack " + to_string(kind) + ": target " +
                            std::to_string(t) + " out of range [0, " +
                            std::to_string(limit) + ")");
    }
  }
  switch (kind) {
    case AttackKind::flooding:
      if (!(magnitude >= 0.0)) {
        throw ValidationError("flooding magnitude (sigma) must be >= 0");
      }
      break;
    case AttackKind::sinkhole:
      if (!(magnitude > 0.0 && magnitude <= 1.0)) {
        throw ValidationError("sinkhole magnitude out of (0,1]");
      }
      break;
    case AttackKind::thermal:
      if (!(magnitude >= 0.0)) {
        throw ValidationError("thermal magnitude (delta T) must be >= 0");
      }
      break;
    case AttackKind::ip_hijack:
      if (hijack_settings.size() != targets.size()) {
        throw ValidationError(
            "ip_hijack needs one (theta, phi) setting per target");
      }
      break;
    case AttackKind::black_hole:
    case AttackKind::reroute:
      break;
  }
}

PerturbedScenario make_clean(const Scenario& scenario) {
  PerturbedScenario out;
  out.scenario = scenario;
  return out;
}

PerturbedScenario inject(const Scenario& clean, const AttackSpec& attack,
                         int step, std::uint64_t rng_seed) {
  require(step >= 0, "inject: step must be >= 0");
  attack.validate(clean.system.ports, clean.system.node_count());
  PerturbedScenario out = make_clean(clean);
  out.seed = rng_seed;
  if (trigger_fires(attack.trigger, step, clean.tags)) {
    apply_payload(out, attack);
  }
  return out;
}

PerturbedScenario inject_suite(const Scenario& clean,
                               const std::vector<AttackSpec>& attacks,
                               int step, std::uint64_t rng_seed) {
  require(step >= 0, "inject: step must be >= 0");
  PerturbedScenario out = make_clean(clean);
  out.seed = rng_seed;
  for (const auto& attack : attacks) {
    attack.validate(clean.system.ports, clean.system.node_count());
    if (trigger_fires(attack.trigger, step, clean.tags)) {
      apply_payload(out, attack);
    }
  }
  return out;
}

SignalVector run_forward(PerturbedScenario& scenario, const SignalVector& input,
                         std::uint64_t noise_seed) {
  auto& system = scenario.scenario.system;
  if (input.size() != system.ports) {
    throw ContractError("run_forward: input has " +
                        std::to_string(input.size()) + " ports, system has " +
                        std::to_string(system.ports));
  }

  SignalVector x = input;
  Rng rng(noise_seed);
  for (const auto& noise : scenario.input_noise) {
    x[noise.port] += rng.complex_gaussian(noise.sigma);
  }

  // Dense per-node effect tables; node ids span both meshes.
  int total = system.node_count();
  std::vector<double> transmission(static_cast<size_t>(total), 1.0);
  std::vector<double> tap_ratio(static_cast<size_t>(total), 0.0);
  for (const auto& l : scenario.lossy_nodes) {
    transmission[static_cast<size_t>(l.node)] *= l.transmission;
  }
  for (const auto& t : scenario.taps) {
    tap_ratio[static_cast<size_t>(t.node)] = t.ratio;
  }

  const Complex j(0.0, 1.0);
  auto walk = [&](const mesh::MeshProgram& program, int node_base) {
    for (size_t i = 0; i < program.placements.size(); ++i) {
      const auto& p = program.placements[i];
      TransferMatrix t = mesh::mzi_transfer(p.setting);
      Complex a = x[p.top_port], b = x[p.top_port + 1];
      Complex u = t(0, 0) * a + t(0, 1) * b;
      Complex l = t(1, 0) * a + t(1, 1) * b;
      size_t node = static_cast<size_t>(node_base) + i;
      if (tap_ratio[node] > 0.0) {
        double root = std::sqrt(tap_ratio[node]);
        scenario.tapped_signals.push_back(
            {static_cast<int>(node), root * u, root * l});
      }
      x[p.top_port] = transmission[node] * u;
      x[p.top_port + 1] = transmission[node] * l;
    }
    for (int i = 0; i < program.port_count; ++i) {
      x[i] *= std::exp(j * program.output_phases[i]);
    }
  };

  walk(system.input_mesh, 0);
  for (int i = 0; i < system.ports; ++i) {
    x[i] *= system.attenuations[static_cast<size_t>(i)];
  }
  walk(system.output_mesh, system.input_mesh.node_count());
  return x;
}

}  // namespace spaasim::attack
