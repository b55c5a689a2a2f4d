#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spaasim/scenario.hpp"

namespace spaasim::harness {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config " + (path.empty() ? std::string("/") : path) +
                    ": " + what);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      fail(path + "/" + key, "unknown key \"" + key + "\"");
    }
  }
}

const json* find(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::uint64_t get_seed(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !j.is_number_integer()) {
    fail(path, "expected an integer seed");
  }
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Complex get_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  fail(path, "expected a number or an [re, im] pair");
}

SignalVector get_complex_vector(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  SignalVector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] =
        get_complex(j[i], path + "/" + std::to_string(i));
  }
  return v;
}

TransferMatrix get_complex_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(path, "expected rows to be arrays");
  TransferMatrix m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      fail(path + "/" + std::to_string(r), "ragged matrix row");
    }
    for (size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          get_complex(row[c], path + "/" + std::to_string(r) + "/" +
                                  std::to_string(c));
    }
  }
  return m;
}

WeightSource parse_weights(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"source", "seed", "matrix"}, path);
  WeightSource w;
  std::string source = "haar";
  if (const json* s = find(j, "source")) source = get_string(*s, path + "/source");
  if (source == "haar") {
    w.kind = WeightSource::Kind::haar;
  } else if (source == "matrix") {
    w.kind = WeightSource::Kind::matrix;
  } else if (source == "trained") {
    w.kind = WeightSource::Kind::trained;
  } else {
    fail(path + "/source", "expected one of haar, matrix, trained");
  }
  if (const json* s = find(j, "seed")) w.seed = get_seed(*s, path + "/seed");
  if (const json* m = find(j, "matrix")) {
    w.matrix = get_complex_matrix(*m, path + "/matrix");
  }
  if (w.kind == WeightSource::Kind::matrix && w.matrix.size() == 0) {
    fail(path, "source \"matrix\" requires a matrix");
  }
  return w;
}

InputSpec parse_input(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"kind", "port", "amplitudes"}, path);
  InputSpec in;
  std::string kind = "uniform";
  if (const json* k = find(j, "kind")) kind = get_string(*k, path + "/kind");
  if (kind == "uniform") {
    in.kind = InputSpec::Kind::uniform;
  } else if (kind == "basis") {
    in.kind = InputSpec::Kind::basis;
  } else if (kind == "explicit") {
    in.kind = InputSpec::Kind::explicit_amplitudes;
  } else {
    fail(path + "/kind", "expected one of uniform, basis, explicit");
  }
  if (const json* p = find(j, "port")) in.port = get_int(*p, path + "/port");
  if (const json* a = find(j, "amplitudes")) {
    in.amplitudes = get_complex_vector(*a, path + "/amplitudes");
  }
  if (in.kind == InputSpec::Kind::explicit_amplitudes &&
      in.amplitudes.size() == 0) {
    fail(path, "kind \"explicit\" requires amplitudes");
  }
  return in;
}

ProbeSpec parse_probes(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"kind", "vectors"}, path);
  ProbeSpec probes;
  std::string kind = "basis_plus_uniform";
  if (const json* k = find(j, "kind")) kind = get_string(*k, path + "/kind");
  if (kind == "basis_plus_uniform") {
    probes.kind = ProbeSpec::Kind::basis_plus_uniform;
  } else if (kind == "explicit") {
    probes.kind = ProbeSpec::Kind::explicit_vectors;
  } else {
    fail(path + "/kind", "expected one of basis_plus_uniform, explicit");
  }
  if (const json* v = find(j, "vectors")) {
    if (!v->is_array()) fail(path + "/vectors", "expected an array");
    for (size_t i = 0; i < v->size(); ++i) {
      probes.vectors.push_back(get_complex_vector(
          (*v)[i], path + "/vectors/" + std::to_string(i)));
    }
  }
  if (probes.kind == ProbeSpec::Kind::explicit_vectors &&
      probes.vectors.empty()) {
    fail(path, "kind \"explicit\" requires vectors");
  }
  return probes;
}

attack::Trigger parse_trigger(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"type", "step", "tag"}, path);
  attack::Trigger t;
  std::string type = "always";
  if (const json* k = find(j, "type")) type = get_string(*k, path + "/type");
  if (type == "always") {
    t.kind = attack::Trigger::Kind::always;
  } else if (type == "after_step") {
    t.kind = attack::Trigger::Kind::after_step;
    const json* s = find(j, "step");
    if (!s) fail(path, "after_step trigger requires a step");
    t.step = get_int(*s, path + "/step");
  } else if (type == "on_scenario_tag") {
    t.kind = attack::Trigger::Kind::on_scenario_tag;
    const json* tag = find(j, "tag");
    if (!tag) fail(path, "on_scenario_tag trigger requires a tag");
    t.tag = get_string(*tag, path + "/tag");
  } else {
    fail(path + "/type", "expected one of always, after_step, on_scenario_tag");
  }
  return t;
}

attack::AttackSpec parse_attack(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"kind", "targets", "magnitude", "phases", "trigger"},
                      path);
  attack::AttackSpec a;
  const json* kind = find(j, "kind");
  if (!kind) fail(path, "attack requires a kind");
  try {
    a.kind = attack::attack_kind_from_string(get_string(*kind, path + "/kind"));
  } catch (const ValidationError& e) {
    fail(path + "/kind", e.what());
  }
  const json* targets = find(j, "targets");
  if (!targets || !targets->is_array() || targets->empty()) {
    fail(path + "/targets", "attack requires a non-empty target list");
  }
  for (size_t i = 0; i < targets->size(); ++i) {
    a.targets.push_back(
        get_int((*targets)[i], path + "/targets/" + std::to_string(i)));
  }
  if (const json* m = find(j, "magnitude")) {
    a.magnitude = get_number(*m, path + "/magnitude");
  }
  if (const json* p = find(j, "phases")) {
    if (!p->is_array()) fail(path + "/phases", "expected an array");
    for (size_t i = 0; i < p->size(); ++i) {
      const json& pair = (*p)[i];
      std::string ppath = path + "/phases/" + std::to_string(i);
      if (!pair.is_array() || pair.size() != 2) {
        fail(ppath, "expected a [theta, phi] pair");
      }
      a.hijack_settings.emplace_back(get_number(pair[0], ppath + "/0"),
                                     get_number(pair[1], ppath + "/1"));
    }
  }
  if (const json* t = find(j, "trigger")) {
    a.trigger = parse_trigger(*t, path + "/trigger");
  }
  // Range rules that do not need the instantiated system.
  switch (a.kind) {
    case attack::AttackKind::sinkhole:
      if (!(a.magnitude > 0.0 && a.magnitude <= 1.0)) {
        fail(path + "/magnitude", "sinkhole magnitude out of (0,1]");
      }
      break;
    case attack::AttackKind::flooding:
      if (!(a.magnitude >= 0.0)) {
        fail(path + "/magnitude", "flooding magnitude (sigma) must be >= 0");
      }
      break;
    case attack::AttackKind::thermal:
      if (!(a.magnitude >= 0.0)) {
        fail(path + "/magnitude", "thermal magnitude (delta T) must be >= 0");
      }
      break;
    case attack::AttackKind::ip_hijack:
      if (a.hijack_settings.size() != a.targets.size()) {
        fail(path + "/phases", "ip_hijack needs one [theta, phi] per target");
      }
      break;
    default:
      break;
  }
  return a;
}

json complex_to_json(const Complex& c) {
  return json::array({c.real(), c.imag()});
}

json vector_to_json(const SignalVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v[i]));
  return out;
}

json matrix_to_json(const TransferMatrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(complex_to_json(m(r, c)));
    }
    out.push_back(row);
  }
  return out;
}

std::pair<int, int> line_and_column(const std::string& text, size_t byte) {
  int line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

bool WeightSource::operator==(const WeightSource& o) const {
  if (kind != o.kind || seed != o.seed) return false;
  if (matrix.rows() != o.matrix.rows() || matrix.cols() != o.matrix.cols()) {
    return false;
  }
  return matrix.size() == 0 || matrix == o.matrix;
}

bool InputSpec::operator==(const InputSpec& o) const {
  if (kind != o.kind || port != o.port) return false;
  if (amplitudes.size() != o.amplitudes.size()) return false;
  return amplitudes.size() == 0 || amplitudes == o.amplitudes;
}

bool ProbeSpec::operator==(const ProbeSpec& o) const {
  if (kind != o.kind || vectors.size() != o.vectors.size()) return false;
  for (size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != o.vectors[i].size() ||
        vectors[i] != o.vectors[i]) {
      return false;
    }
  }
  return true;
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  auto attack_eq = [](const attack::AttackSpec& a, const attack::AttackSpec& b) {
    auto setting_eq = [](const mesh::MZISetting& x, const mesh::MZISetting& y) {
      return x.theta == y.theta && x.phi == y.phi;
    };
    if (a.kind != b.kind || a.targets != b.targets ||
        a.magnitude != b.magnitude ||
        a.hijack_settings.size() != b.hijack_settings.size() ||
        a.trigger.kind != b.trigger.kind || a.trigger.step != b.trigger.step ||
        a.trigger.tag != b.trigger.tag) {
      return false;
    }
    for (size_t i = 0; i < a.hijack_settings.size(); ++i) {
      if (!setting_eq(a.hijack_settings[i], b.hijack_settings[i])) return false;
    }
    return true;
  };
  if (attacks.size() != o.attacks.size()) return false;
  for (size_t i = 0; i < attacks.size(); ++i) {
    if (!attack_eq(attacks[i], o.attacks[i])) return false;
  }
  return schema_version == o.schema_version && scenario_id == o.scenario_id &&
         ports == o.ports && seed == o.seed && steps == o.steps &&
         tags == o.tags && input_power_mw == o.input_power_mw &&
         weights == o.weights && input == o.input &&
         detector.power_noise_sigma_db == o.detector.power_noise_sigma_db &&
         detector.phase_noise_sigma_rad == o.detector.phase_noise_sigma_rad &&
         detector.power_floor_dbm == o.detector.power_floor_dbm &&
         tuning.phase_per_kelvin == o.tuning.phase_per_kelvin &&
         tuning.nominal_temperature == o.tuning.nominal_temperature &&
         crosstalk_coupling_length_um == o.crosstalk_coupling_length_um &&
         layout_pitch_um == o.layout_pitch_um &&
         thresholds.power_db == o.thresholds.power_db &&
         thresholds.phase_rad == o.thresholds.phase_rad &&
         probes == o.probes && baseline_repeats == o.baseline_repeats &&
         inference == o.inference;
}

ScenarioConfig parse_scenario(const std::string& config_text) {
  json j;
  try {
    j = json::parse(config_text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_and_column(config_text, e.byte);
    throw ConfigError("config parse error at line " + std::to_string(line) +
                      ", column " + std::to_string(col) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config /: expected a JSON object");

  reject_unknown_keys(
      j,
      {"schema_version", "scenario_id", "ports", "seed", "steps", "tags",
       "input_power_mw", "weights", "input", "detector", "tuning", "crosstalk",
       "thresholds", "probes", "baseline", "attacks", "inference"},
      "");

  ScenarioConfig c;
  if (const json* v = find(j, "schema_version")) {
    c.schema_version = get_int(*v, "/schema_version");
    if (c.schema_version != 1) fail("/schema_version", "unsupported version");
  }
  if (const json* v = find(j, "scenario_id")) {
    c.scenario_id = get_string(*v, "/scenario_id");
  }
  if (const json* v = find(j, "ports")) c.ports = get_int(*v, "/ports");
  if (c.ports < 2) fail("/ports", "need at least 2 ports");
  if (const json* v = find(j, "seed")) c.seed = get_seed(*v, "/seed");
  if (const json* v = find(j, "steps")) c.steps = get_int(*v, "/steps");
  if (c.steps < 1) fail("/steps", "need at least 1 step");
  if (const json* v = find(j, "tags")) {
    if (!v->is_array()) fail("/tags", "expected an array of strings");
    for (size_t i = 0; i < v->size(); ++i) {
      c.tags.push_back(get_string((*v)[i], "/tags/" + std::to_string(i)));
    }
  }
  if (const json* v = find(j, "input_power_mw")) {
    c.input_power_mw = get_number(*v, "/input_power_mw");
    if (!(c.input_power_mw > 0.0)) fail("/input_power_mw", "must be positive");
  }
  if (const json* v = find(j, "weights")) c.weights = parse_weights(*v, "/weights");
  if (const json* v = find(j, "input")) c.input = parse_input(*v, "/input");
  if (const json* v = find(j, "detector")) {
    reject_unknown_keys(
        *v, {"power_noise_sigma_db", "phase_noise_sigma_rad", "power_floor_dbm"},
        "/detector");
    if (const json* s = find(*v, "power_noise_sigma_db")) {
      c.detector.power_noise_sigma_db =
          get_number(*s, "/detector/power_noise_sigma_db");
      if (c.detector.power_noise_sigma_db < 0.0) {
        fail("/detector/power_noise_sigma_db", "must be >= 0");
      }
    }
    if (const json* s = find(*v, "phase_noise_sigma_rad")) {
      c.detector.phase_noise_sigma_rad =
          get_number(*s, "/detector/phase_noise_sigma_rad");
      if (c.detector.phase_noise_sigma_rad < 0.0) {
        fail("/detector/phase_noise_sigma_rad", "must be >= 0");
      }
    }
    if (const json* s = find(*v, "power_floor_dbm")) {
      c.detector.power_floor_dbm = get_number(*s, "/detector/power_floor_dbm");
    }
  }
  if (const json* v = find(j, "tuning")) {
    reject_unknown_keys(*v, {"phase_per_kelvin", "nominal_temperature_k"},
                        "/tuning");
    if (const json* s = find(*v, "phase_per_kelvin")) {
      c.tuning.phase_per_kelvin = get_number(*s, "/tuning/phase_per_kelvin");
      if (!(c.tuning.phase_per_kelvin > 0.0)) {
        fail("/tuning/phase_per_kelvin", "must be positive");
      }
    }
    if (const json* s = find(*v, "nominal_temperature_k")) {
      c.tuning.nominal_temperature =
          get_number(*s, "/tuning/nominal_temperature_k");
    }
  }
  if (const json* v = find(j, "crosstalk")) {
    reject_unknown_keys(*v, {"coupling_length_um", "pitch_um"}, "/crosstalk");
    if (const json* s = find(*v, "coupling_length_um")) {
      c.crosstalk_coupling_length_um =
          get_number(*s, "/crosstalk/coupling_length_um");
      if (!(c.crosstalk_coupling_length_um > 0.0)) {
        fail("/crosstalk/coupling_length_um", "must be positive");
      }
    }
    if (const json* s = find(*v, "pitch_um")) {
      c.layout_pitch_um = get_number(*s, "/crosstalk/pitch_um");
      if (!(c.layout_pitch_um > 0.0)) {
        fail("/crosstalk/pitch_um", "must be positive");
      }
    }
  }
  if (const json* v = find(j, "thresholds")) {
    reject_unknown_keys(*v, {"power_db", "phase_rad"}, "/thresholds");
    if (const json* s = find(*v, "power_db")) {
      c.thresholds.power_db = get_number(*s, "/thresholds/power_db");
      if (!(c.thresholds.power_db > 0.0)) {
        fail("/thresholds/power_db", "must be positive");
      }
    }
    if (const json* s = find(*v, "phase_rad")) {
      c.thresholds.phase_rad = get_number(*s, "/thresholds/phase_rad");
      if (!(c.thresholds.phase_rad > 0.0)) {
        fail("/thresholds/phase_rad", "must be positive");
      }
    }
  }
  if (const json* v = find(j, "probes")) c.probes = parse_probes(*v, "/probes");
  if (const json* v = find(j, "baseline")) {
    reject_unknown_keys(*v, {"repeats"}, "/baseline");
    if (const json* s = find(*v, "repeats")) {
      c.baseline_repeats = get_int(*s, "/baseline/repeats");
      if (c.baseline_repeats < 1) fail("/baseline/repeats", "must be >= 1");
    }
  }
  if (const json* v = find(j, "attacks")) {
    if (!v->is_array()) fail("/attacks", "expected an array");
    for (size_t i = 0; i < v->size(); ++i) {
      c.attacks.push_back(
          parse_attack((*v)[i], "/attacks/" + std::to_string(i)));
    }
  }
  if (const json* v = find(j, "inference")) {
    reject_unknown_keys(*v, {"dataset", "noise_sigmas", "trials"}, "/inference");
    if (const json* d = find(*v, "dataset")) {
      reject_unknown_keys(
          *d, {"samples_per_class", "spread", "base", "peak", "seed"},
          "/inference/dataset");
      if (const json* s = find(*d, "samples_per_class")) {
        c.inference.dataset.samples_per_class =
            get_int(*s, "/inference/dataset/samples_per_class");
        if (c.inference.dataset.samples_per_class < 1) {
          fail("/inference/dataset/samples_per_class", "must be >= 1");
        }
      }
      if (const json* s = find(*d, "spread")) {
        c.inference.dataset.spread = get_number(*s, "/inference/dataset/spread");
        if (!(c.inference.dataset.spread >= 0.0)) {
          fail("/inference/dataset/spread", "must be >= 0");
        }
      }
      if (const json* s = find(*d, "base")) {
        c.inference.dataset.base = get_number(*s, "/inference/dataset/base");
      }
      if (const json* s = find(*d, "peak")) {
        c.inference.dataset.peak = get_number(*s, "/inference/dataset/peak");
      }
      if (const json* s = find(*d, "seed")) {
        c.inference.dataset.seed = get_seed(*s, "/inference/dataset/seed");
      }
    }
    if (const json* s = find(*v, "noise_sigmas")) {
      if (!s->is_array()) fail("/inference/noise_sigmas", "expected an array");
      c.inference.noise_sigmas.clear();
      for (size_t i = 0; i < s->size(); ++i) {
        double sigma = get_number((*s)[i], "/inference/noise_sigmas/" +
                                               std::to_string(i));
        if (sigma < 0.0) {
          fail("/inference/noise_sigmas/" + std::to_string(i), "must be >= 0");
        }
        c.inference.noise_sigmas.push_back(sigma);
      }
    }
    if (const json* s = find(*v, "trials")) {
      c.inference.trials = get_int(*s, "/inference/trials");
      if (c.inference.trials < 1) fail("/inference/trials", "must be >= 1");
    }
  }

  // Shape checks that only need the port count.
  if (c.weights.kind == WeightSource::Kind::matrix &&
      (c.weights.matrix.rows() != c.ports ||
       c.weights.matrix.cols() != c.ports)) {
    fail("/weights/matrix", "matrix must be ports x ports");
  }
  if (c.input.kind == InputSpec::Kind::basis &&
      (c.input.port < 0 || c.input.port >= c.ports)) {
    fail("/input/port", "basis port out of range");
  }
  if (c.input.kind == InputSpec::Kind::explicit_amplitudes &&
      c.input.amplitudes.size() != c.ports) {
    fail("/input/amplitudes", "length must equal ports");
  }
  if (c.probes.kind == ProbeSpec::Kind::explicit_vectors) {
    for (size_t i = 0; i < c.probes.vectors.size(); ++i) {
      if (c.probes.vectors[i].size() != c.ports) {
        fail("/probes/vectors/" + std::to_string(i),
             "length must equal ports");
      }
    }
  }
  for (size_t i = 0; i < c.attacks.size(); ++i) {
    if (c.attacks[i].kind == attack::AttackKind::flooding) {
      for (int t : c.attacks[i].targets) {
        if (t < 0 || t >= c.ports) {
          fail("/attacks/" + std::to_string(i) + "/targets",
               "input port out of range");
        }
      }
    }
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const ScenarioConfig& c) {
  json weights{{"seed", c.weights.seed}};
  switch (c.weights.kind) {
    case WeightSource::Kind::haar: weights["source"] = "haar"; break;
    case WeightSource::Kind::matrix: weights["source"] = "matrix"; break;
    case WeightSource::Kind::trained: weights["source"] = "trained"; break;
  }
  if (c.weights.matrix.size() > 0) {
    weights["matrix"] = matrix_to_json(c.weights.matrix);
  }

  json input;
  switch (c.input.kind) {
    case InputSpec::Kind::uniform: input["kind"] = "uniform"; break;
    case InputSpec::Kind::basis: input["kind"] = "basis"; break;
    case InputSpec::Kind::explicit_amplitudes: input["kind"] = "explicit"; break;
  }
  input["port"] = c.input.port;
  if (c.input.amplitudes.size() > 0) {
    input["amplitudes"] = vector_to_json(c.input.amplitudes);
  }

  json probes;
  probes["kind"] = c.probes.kind == ProbeSpec::Kind::basis_plus_uniform
                       ? "basis_plus_uniform"
                       : "explicit";
  if (!c.probes.vectors.empty()) {
    json vecs = json::array();
    for (const auto& v : c.probes.vectors) vecs.push_back(vector_to_json(v));
    probes["vectors"] = vecs;
  }

  json attacks = json::array();
  for (const auto& a : c.attacks) {
    json aj{{"kind", attack::to_string(a.kind)},
            {"targets", a.targets},
            {"magnitude", a.magnitude}};
    if (!a.hijack_settings.empty()) {
      json phases = json::array();
      for (const auto& s : a.hijack_settings) {
        phases.push_back(json::array({s.theta, s.phi}));
      }
      aj["phases"] = phases;
    }
    json tj;
    switch (a.trigger.kind) {
      case attack::Trigger::Kind::always:
        tj["type"] = "always";
        break;
      case attack::Trigger::Kind::after_step:
        tj["type"] = "after_step";
        tj["step"] = a.trigger.step;
        break;
      case attack::Trigger::Kind::on_scenario_tag:
        tj["type"] = "on_scenario_tag";
        tj["tag"] = a.trigger.tag;
        break;
    }
    aj["trigger"] = tj;
    attacks.push_back(aj);
  }

  json j{
      {"schema_version", c.schema_version},
      {"scenario_id", c.scenario_id},
      {"ports", c.ports},
      {"seed", c.seed},
      {"steps", c.steps},
      {"tags", c.tags},
      {"input_power_mw", c.input_power_mw},
      {"weights", weights},
      {"input", input},
      {"detector",
       {{"power_noise_sigma_db", c.detector.power_noise_sigma_db},
        {"phase_noise_sigma_rad", c.detector.phase_noise_sigma_rad},
        {"power_floor_dbm", c.detector.power_floor_dbm}}},
      {"tuning",
       {{"phase_per_kelvin", c.tuning.phase_per_kelvin},
        {"nominal_temperature_k", c.tuning.nominal_temperature}}},
      {"crosstalk",
       {{"coupling_length_um", c.crosstalk_coupling_length_um},
        {"pitch_um", c.layout_pitch_um}}},
      {"thresholds",
       {{"power_db", c.thresholds.power_db},
        {"phase_rad", c.thresholds.phase_rad}}},
      {"probes", probes},
      {"baseline", {{"repeats", c.baseline_repeats}}},
      {"attacks", attacks},
      {"inference",
       {{"dataset",
         {{"samples_per_class", c.inference.dataset.samples_per_class},
          {"spread", c.inference.dataset.spread},
          {"base", c.inference.dataset.base},
          {"peak", c.inference.dataset.peak},
          {"seed", c.inference.dataset.seed}}},
        {"noise_sigmas", c.inference.noise_sigmas},
        {"trials", c.inference.trials}}},
  };
  return j.dump(2) + "\n";
}

}  // namespace spaasim::harness
