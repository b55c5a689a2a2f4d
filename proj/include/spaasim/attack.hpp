#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spaasim/common.hpp"
#include "spaasim/mesh.hpp"
#include "spaasim/physics.hpp"

namespace spaasim::attack {

// The five trojan payloads plus the thermal-crosstalk channel.
enum class AttackKind {
  flooding,    // Gaussian noise injected on input ports
  black_hole,  // node absorbs everything routed through it
  sinkhole,    // node taps a power fraction and records the amplitudes
  reroute,     // cross<->bar flip of a node (theta + pi)
  ip_hijack,   // controller override of a node's phase pair
  thermal,     // heat a node, crosstalk perturbs the neighbourhood
};

std::string to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& name);

// Trojans stay idle until their trigger fires.
struct Trigger {
  enum class Kind { always, after_step, on_scenario_tag };
  Kind kind = Kind::always;
  int step = 0;        // after_step: fires once the step counter reaches it
  std::string tag;     // on_scenario_tag: fires when the scenario has the tag
};

bool trigger_fires(const Trigger& trigger, int step,
                   const std::vector<std::string>& tags);

struct AttackSpec {
  AttackKind kind = AttackKind::flooding;
  std::vector<int> targets;  // node ids; input port ids for flooding
  double magnitude = 0.0;    // sigma / tap ratio / delta T; unused for
                             // reroute and ip_hijack
  std::vector<mesh::MZISetting> hijack_settings;  // one per target
  Trigger trigger;

  // Range-checks the spec against a concrete system.
  void validate(int ports, int node_count) const;
};

// The clean system under test together with the physical context the
// attack engine needs (thermal model, layout), and the scenario tags that
// drive trigger evaluation.
struct Scenario {
  std::string id = "scenario";
  mesh::MeshSystem system;
  physics::TuningModel tuning;
  double crosstalk_coupling_length_um = 100.0;
  double layout_pitch_um = 50.0;
  double input_power_mw = 1.0;
  std::vector<std::string> tags;
};

struct InputNoise {
  int port = 0;
  double sigma = 0.0;
};

struct LossyNode {
  int node = 0;
  double transmission = 1.0;  // amplitude factor in [0, 1]
};

struct NodeTap {
  int node = 0;
  double ratio = 0.0;  // power fraction diverted, in (0, 1]
};

struct TappedSignal {
  int node = 0;
  Complex upper;
  Complex lower;
};

// A scenario with zero or more attack payloads armed. With no payloads the
// forward path is bit-identical to the clean scenario.
struct PerturbedScenario {
  Scenario scenario;                  // programs possibly rewritten
  std::vector<InputNoise> input_noise;
  std::vector<LossyNode> lossy_nodes;
  std::vector<NodeTap> taps;
  std::vector<TappedSignal> tapped_signals;  // filled by run_forward
  std::uint64_t seed = 0;
};

PerturbedScenario make_clean(const Scenario& scenario);

// Apply one attack if its trigger fires at this step; otherwise return the
// clean scenario unchanged (idle trojan).
PerturbedScenario inject(const Scenario& clean, const AttackSpec& attack,
                         int step, std::uint64_t rng_seed);

// Apply a list of attacks in declaration order.
PerturbedScenario inject_suite(const Scenario& clean,
                               const std::vector<AttackSpec>& attacks,
                               int step, std::uint64_t rng_seed);

// Forward propagation honouring the armed payloads: input noise, per-node
// transmission, tap recording. noise_seed controls the flooding draws for
// this invocation only.
SignalVector run_forward(PerturbedScenario& scenario, const SignalVector& input,
                         std::uint64_t noise_seed);

}  // namespace spaasim::attack
