#include "riskfilter/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "riskfilter/errors.hpp"

namespace riskfilter {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ContractViolation("scenario config: " + path + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(path + "." + item.key(), "unknown key");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& need(const json& obj, const std::string& path, const char* key) {
  const json* j = find(obj, key);
  if (!j) fail(path + "." + key, "missing required key");
  return *j;
}

double as_num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double get_num(const json& obj, const std::string& path, const char* key) {
  return as_num(need(obj, path, key), path + "." + key);
}

double get_num_or(const json& obj, const std::string& path, const char* key, double fallback) {
  const json* j = find(obj, key);
  return j ? as_num(*j, path + "." + key) : fallback;
}

int get_int(const json& obj, const std::string& path, const char* key) {
  const json& j = need(obj, path, key);
  if (!j.is_number_integer()) fail(path + "." + key, "expected an integer");
  return j.get<int>();
}

int get_int_or(const json& obj, const std::string& path, const char* key, int fallback) {
  const json* j = find(obj, key);
  if (!j) return fallback;
  if (!j->is_number_integer()) fail(path + "." + key, "expected an integer");
  return j->get<int>();
}

std::uint64_t get_u64_or(const json& obj, const std::string& path, const char* key,
                         std::uint64_t fallback) {
  const json* j = find(obj, key);
  if (!j) return fallback;
  if (!j->is_number_unsigned() && !j->is_number_integer()) fail(path + "." + key, "expected an integer");
  return j->get<std::uint64_t>();
}

std::string get_str(const json& obj, const std::string& path, const char* key) {
  const json& j = need(obj, path, key);
  if (!j.is_string()) fail(path + "." + key, "expected a string");
  return j.get<std::string>();
}

bool get_bool_or(const json& obj, const std::string& path, const char* key, bool fallback) {
  const json* j = find(obj, key);
  if (!j) return fallback;
  if (!j->is_boolean()) fail(path + "." + key, "expected a boolean");
  return j->get<bool>();
}

Vec as_vec(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = as_num(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Vec get_vec(const json& obj, const std::string& path, const char* key) {
  return as_vec(need(obj, path, key), path + "." + key);
}

Eigen::Vector2d get_vec2(const json& obj, const std::string& path, const char* key) {
  Vec v = get_vec(obj, path, key);
  if (v.size() != 2) fail(path + "." + key, "expected exactly 2 numbers");
  return Eigen::Vector2d(v(0), v(1));
}

void parse_model(const json& j, const std::string& path, ScenarioConfig& cfg) {
  require_object(j, path);
  check_keys(j, path, {"type", "sigma"});
  const std::string type = get_str(j, path, "type");
  if (type == "integrator1d") {
    cfg.model = ModelKind::Integrator1D;
  } else if (type == "unicycle") {
    cfg.model = ModelKind::Unicycle;
  } else if (type == "omni") {
    cfg.model = ModelKind::Omni;
  } else {
    fail(path + ".type", "unknown model '" + type + "'");
  }
  if (find(j, "sigma")) cfg.sigma_diag = get_vec(j, path, "sigma");
}

void parse_observation(const json& j, const std::string& path, ScenarioConfig& cfg) {
  require_object(j, path);
  check_keys(j, path, {"type", "beacon", "noise_std", "rate_hz", "dropout_time"});
  const std::string type = get_str(j, path, "type");
  if (type != "range_beacon") fail(path + ".type", "unknown observation '" + type + "'");
  cfg.has_observation = true;
  cfg.beacon = get_vec2(j, path, "beacon");
  cfg.obs_noise_std = get_num(j, path, "noise_std");
  cfg.obs_rate_hz = get_num_or(j, path, "rate_hz", 1.0);
  cfg.dropout_time =
      get_num_or(j, path, "dropout_time", std::numeric_limits<double>::infinity());
}

void parse_barrier(const json& j, const std::string& path, ScenarioConfig& cfg) {
  require_object(j, path);
  const std::string type = get_str(j, path, "type");
  if (type == "halfspace") {
    check_keys(j, path, {"type", "normal", "offset"});
    cfg.barrier = BarrierKind::Halfspace;
    cfg.halfspace_normal = get_vec(j, path, "normal");
    cfg.halfspace_offset = get_num(j, path, "offset");
  } else if (type == "circular_stayout") {
    check_keys(j, path, {"type", "center", "radius"});
    cfg.barrier = BarrierKind::CircularStayOut;
    cfg.obstacle_center = get_vec2(j, path, "center");
    cfg.obstacle_radius = get_num(j, path, "radius");
  } else if (type == "lookahead_stayout") {
    check_keys(j, path, {"type", "center", "radius", "lookahead"});
    cfg.barrier = BarrierKind::LookaheadStayOut;
    cfg.obstacle_center = get_vec2(j, path, "center");
    cfg.obstacle_radius = get_num(j, path, "radius");
    cfg.lookahead = get_num_or(j, path, "lookahead", 0.2);
  } else {
    fail(path + ".type", "unknown barrier '" + type + "'");
  }
}

void parse_belief(const json& j, const std::string& path, ScenarioConfig& cfg) {
  require_object(j, path);
  check_keys(j, path, {"weights", "means", "stds"});
  const json& jw = need(j, path, "weights");
  const json& jm = need(j, path, "means");
  const json& js = need(j, path, "stds");
  if (!jw.is_array() || !jm.is_array() || !js.is_array())
    fail(path, "weights, means, stds must be arrays");
  if (jw.size() != jm.size() || jw.size() != js.size())
    fail(path, "weights, means, stds must have the same length");
  if (jw.empty()) fail(path + ".weights", "at least one mixture component required");
  for (std::size_t i = 0; i < jw.size(); ++i) {
    const std::string idx = "[" + std::to_string(i) + "]";
    cfg.initial_belief.weights.push_back(as_num(jw[i], path + ".weights" + idx));
    cfg.initial_belief.means.push_back(as_vec(jm[i], path + ".means" + idx));
    cfg.initial_belief.stds.push_back(as_vec(js[i], path + ".stds" + idx));
  }
}

void parse_risk(const json& j, const std::string& path, ScenarioConfig& cfg) {
  require_object(j, path);
  check_keys(j, path, {"alpha", "delta", "b_min"});
  cfg.alpha = get_num(j, path, "alpha");
  cfg.delta = get_num(j, path, "delta");
  const json& jb = need(j, path, "b_min");
  if (jb.is_number()) {
    cfg.b_min.policy = BMinSpec::Policy::Value;
    cfg.b_min.value = jb.get<double>();
  } else if (jb.is_object()) {
    check_keys(jb, path + ".b_min", {"policy"});
    const std::string policy = get_str(jb, path + ".b_min", "policy");
    if (policy != "workspace_scan")
      fail(path + ".b_min.policy", "unknown policy '" + policy + "'");
    cfg.b_min.policy = BMinSpec::Policy::WorkspaceScan;
  } else {
    fail(path + ".b_min", "expected a number or {\"policy\": ...}");
  }
}

void parse_workspace(const json& j, const std::string& path, ScenarioConfig& cfg) {
  require_object(j, path);
  check_keys(j, path, {"lower", "upper", "grid"});
  WorkspaceBox box;
  box.lower = get_vec(j, path, "lower");
  box.upper = get_vec(j, path, "upper");
  box.grid = get_int_or(j, path, "grid", 101);
  cfg.workspace = box;
}

void parse_reference(const json& j, const std::string& path, ScenarioConfig& cfg) {
  require_object(j, path);
  const std::string type = get_str(j, path, "type");
  if (type == "constant") {
    check_keys(j, path, {"type", "u"});
    cfg.reference.type = ReferenceSpec::Type::Constant;
    cfg.reference.constant_u = get_vec(j, path, "u");
  } else if (type == "goal") {
    check_keys(j, path, {"type", "goal", "gain"});
    cfg.reference.type = ReferenceSpec::Type::GoalProportional;
    cfg.reference.goal = get_vec2(j, path, "goal");
    cfg.reference.gain = get_num_or(j, path, "gain", 1.0);
  } else {
    fail(path + ".type", "unknown reference '" + type + "'");
  }
}

void parse_controller(const json& j, const std::string& path, ScenarioConfig& cfg) {
  require_object(j, path);
  check_keys(j, path,
             {"variant", "reference", "q_diag", "u_min", "u_max", "gamma_cbf", "eta"});
  const std::string variant = get_str(j, path, "variant");
  if (variant == "ours") {
    cfg.variant = ControllerVariant::Ours;
  } else if (variant == "mu_scbf") {
    cfg.variant = ControllerVariant::MuScbf;
  } else if (variant == "ml_scbf") {
    cfg.variant = ControllerVariant::MlScbf;
  } else if (variant == "be_scbf") {
    cfg.variant = ControllerVariant::BeScbf;
  } else if (variant == "none") {
    cfg.variant = ControllerVariant::None;
  } else {
    fail(path + ".variant", "unknown variant '" + variant + "'");
  }
  parse_reference(need(j, path, "reference"), path + ".reference", cfg);
  if (find(j, "q_diag")) cfg.q_diag = get_vec(j, path, "q_diag");
  cfg.u_min = get_vec(j, path, "u_min");
  cfg.u_max = get_vec(j, path, "u_max");
  cfg.gamma_cbf = get_num_or(j, path, "gamma_cbf", 1.0);
  cfg.eta = get_num_or(j, path, "eta", 0.05);
}

void parse_sim(const json& j, const std::string& path, ScenarioConfig& cfg) {
  require_object(j, path);
  check_keys(j, path,
             {"horizon", "control_period", "dt_sde", "particles", "reps", "seed", "kf_oracle"});
  cfg.horizon = get_num(j, path, "horizon");
  cfg.control_period = get_num_or(j, path, "control_period", 0.01);
  cfg.dt_sde = get_num_or(j, path, "dt_sde", 0.01);
  cfg.particles = get_int(j, path, "particles");
  cfg.reps = get_int_or(j, path, "reps", 1);
  cfg.seed = get_u64_or(j, path, "seed", 1);
  cfg.kf_oracle = get_bool_or(j, path, "kf_oracle", false);
}

int model_state_dim(ModelKind m) { return m == ModelKind::Integrator1D ? 1 : 3; }

int model_input_dim(ModelKind m) {
  switch (m) {
    case ModelKind::Integrator1D: return 1;
    case ModelKind::Unicycle: return 2;
    case ModelKind::Omni: return 3;
  }
  return 0;
}

bool near_integer_ratio(double num, double den) {
  const double r = num / den;
  return std::abs(r - std::round(r)) < 1e-9 && std::round(r) >= 1.0;
}

}  // namespace

const char* variant_name(ControllerVariant v) {
  switch (v) {
    case ControllerVariant::Ours: return "ours";
    case ControllerVariant::MuScbf: return "mu_scbf";
    case ControllerVariant::MlScbf: return "ml_scbf";
    case ControllerVariant::BeScbf: return "be_scbf";
    case ControllerVariant::None: return "none";
  }
  return "?";
}

ScenarioConfig load_scenario_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ContractViolation("scenario config: " + origin + ": " + e.what());
  }
  require_object(j, origin);
  check_keys(j, origin,
             {"name", "model", "observation", "barrier", "initial_belief", "true_initial",
              "risk", "workspace", "controller", "sim"});

  ScenarioConfig cfg;
  cfg.name = get_str(j, origin, "name");
  parse_model(need(j, origin, "model"), origin + ".model", cfg);
  if (const json* jo = find(j, "observation")) {
    if (!jo->is_null()) parse_observation(*jo, origin + ".observation", cfg);
  }
  parse_barrier(need(j, origin, "barrier"), origin + ".barrier", cfg);
  parse_belief(need(j, origin, "initial_belief"), origin + ".initial_belief", cfg);
  if (const json* jt = find(j, "true_initial")) {
    cfg.true_from_belief = false;
    cfg.true_initial = as_vec(*jt, origin + ".true_initial");
  }
  parse_risk(need(j, origin, "risk"), origin + ".risk", cfg);
  if (const json* jw = find(j, "workspace")) parse_workspace(*jw, origin + ".workspace", cfg);
  parse_controller(need(j, origin, "controller"), origin + ".controller", cfg);
  parse_sim(need(j, origin, "sim"), origin + ".sim", cfg);

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("scenario config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario_json(ss.str(), path);
}

void ScenarioConfig::validate() const {
  const int n_x = model_state_dim(model);
  const int n_u = model_input_dim(model);

  if (sigma_diag.size() != 0 && sigma_diag.size() != n_x)
    throw ContractViolation("scenario config: model.sigma must have " + std::to_string(n_x) +
                            " entries");
  if (sigma_diag.size() != 0 && (sigma_diag.array() < 0.0).any())
    throw ContractViolation("scenario config: model.sigma entries must be >= 0");

  if (has_observation) {
    if (n_x < 2) throw ContractViolation("scenario config: range_beacon needs a planar state");
    if (obs_noise_std <= 0.0)
      throw ContractViolation("scenario config: observation.noise_std must be > 0");
    if (obs_rate_hz <= 0.0)
      throw ContractViolation("scenario config: observation.rate_hz must be > 0");
    if (dropout_time < 0.0)
      throw ContractViolation("scenario config: observation.dropout_time must be >= 0");
  }

  switch (barrier) {
    case BarrierKind::Halfspace:
      if (halfspace_normal.size() == 0 || halfspace_normal.size() > n_x)
        throw ContractViolation("scenario config: barrier.normal length must be in [1, " +
                                std::to_string(n_x) + "]");
      if (halfspace_normal.norm() == 0.0)
        throw ContractViolation("scenario config: barrier.normal must be nonzero");
      break;
    case BarrierKind::CircularStayOut:
      if (n_x < 2)
        throw ContractViolation("scenario config: circular_stayout needs a planar state");
      if (obstacle_radius <= 0.0)
        throw ContractViolation("scenario config: barrier.radius must be > 0");
      break;
    case BarrierKind::LookaheadStayOut:
      if (n_x != 3)
        throw ContractViolation("scenario config: lookahead_stayout needs state [px, py, phi]");
      if (obstacle_radius <= 0.0)
        throw ContractViolation("scenario config: barrier.radius must be > 0");
      if (lookahead < 0.0)
        throw ContractViolation("scenario config: barrier.lookahead must be >= 0");
      break;
  }

  const auto& b0 = initial_belief;
  if (b0.weights.empty()) throw ContractViolation("scenario config: initial_belief is empty");
  double wsum = 0.0;
  for (std::size_t i = 0; i < b0.weights.size(); ++i) {
    if (b0.weights[i] <= 0.0)
      throw ContractViolation("scenario config: initial_belief.weights must be > 0");
    wsum += b0.weights[i];
    if (b0.means[i].size() != n_x || b0.stds[i].size() != n_x)
      throw ContractViolation("scenario config: initial_belief component " + std::to_string(i) +
                              " must have " + std::to_string(n_x) + " entries");
    if ((b0.stds[i].array() < 0.0).any())
      throw ContractViolation("scenario config: initial_belief.stds must be >= 0");
  }
  if (wsum <= 0.0) throw ContractViolation("scenario config: initial_belief weights sum to 0");

  if (!true_from_belief && true_initial.size() != n_x)
    throw ContractViolation("scenario config: true_initial must have " + std::to_string(n_x) +
                            " entries");

  RiskConfig risk;
  risk.alpha = alpha;
  risk.delta = delta;
  risk.b_min = b_min.policy == BMinSpec::Policy::Value ? b_min.value : -1.0;
  risk.validate();

  if (b_min.policy == BMinSpec::Policy::WorkspaceScan) {
    if (!workspace)
      throw ContractViolation("scenario config: b_min workspace_scan needs a workspace box");
  }
  if (workspace) {
    if (workspace->lower.size() != n_x || workspace->upper.size() != n_x)
      throw ContractViolation("scenario config: workspace bounds must have " +
                              std::to_string(n_x) + " entries");
    if ((workspace->lower.array() >= workspace->upper.array()).any())
      throw ContractViolation("scenario config: workspace.lower must be < workspace.upper");
    if (workspace->grid < 2)
      throw ContractViolation("scenario config: workspace.grid must be >= 2");
  }

  if (u_min.size() != n_u || u_max.size() != n_u)
    throw ContractViolation("scenario config: controller.u_min/u_max must have " +
                            std::to_string(n_u) + " entries");
  if ((u_min.array() > u_max.array()).any())
    throw ContractViolation("scenario config: controller.u_min must be <= u_max");
  if (q_diag.size() != 0 && q_diag.size() != n_u)
    throw ContractViolation("scenario config: controller.q_diag must have " +
                            std::to_string(n_u) + " entries");
  if (q_diag.size() != 0 && (q_diag.array() <= 0.0).any())
    throw ContractViolation("scenario config: controller.q_diag entries must be > 0");
  if (gamma_cbf <= 0.0)
    throw ContractViolation("scenario config: controller.gamma_cbf must be > 0");
  if (eta <= 0.0 || eta >= 1.0)
    throw ContractViolation("scenario config: controller.eta must be in (0, 1)");

  if (reference.type == ReferenceSpec::Type::Constant) {
    if (reference.constant_u.size() != n_u)
      throw ContractViolation("scenario config: controller.reference.u must have " +
                              std::to_string(n_u) + " entries");
  } else {
    if (model == ModelKind::Integrator1D)
      throw ContractViolation("scenario config: goal reference needs a planar model");
    if (reference.gain <= 0.0)
      throw ContractViolation("scenario config: controller.reference.gain must be > 0");
  }

  if (variant == ControllerVariant::BeScbf) {
    if (barrier == BarrierKind::Halfspace)
      throw ContractViolation("scenario config: be_scbf needs a stay-out barrier");
  }
  if (variant == ControllerVariant::MlScbf && !has_observation)
    throw ContractViolation("scenario config: ml_scbf needs an observation model");

  if (horizon <= 0.0) throw ContractViolation("scenario config: sim.horizon must be > 0");
  if (control_period <= 0.0 || dt_sde <= 0.0)
    throw ContractViolation("scenario config: sim periods must be > 0");
  if (!near_integer_ratio(control_period, dt_sde))
    throw ContractViolation(
        "scenario config: sim.control_period must be an integer multiple of sim.dt_sde");
  if (!near_integer_ratio(horizon, control_period))
    throw ContractViolation(
        "scenario config: sim.horizon must be an integer multiple of sim.control_period");
  if (has_observation && !near_integer_ratio(1.0 / obs_rate_hz, control_period))
    throw ContractViolation(
        "scenario config: the observation period must be an integer multiple of "
        "sim.control_period");
  if (particles < 1) throw ContractViolation("scenario config: sim.particles must be >= 1");
  if (reps < 1) throw ContractViolation("scenario config: sim.reps must be >= 1");

  if (kf_oracle) {
    if (model != ModelKind::Integrator1D || barrier != BarrierKind::Halfspace ||
        has_observation || initial_belief.weights.size() != 1)
      throw ContractViolation(
          "scenario config: sim.kf_oracle needs integrator1d, a halfspace barrier, no "
          "observation, and a single-component initial belief");
  }
}

std::unique_ptr<ProcessModel> ScenarioConfig::make_model() const {
  switch (model) {
    case ModelKind::Integrator1D:
      return std::make_unique<Integrator1D>(sigma_diag.size() ? sigma_diag(0) : 0.1);
    case ModelKind::Unicycle:
      return std::make_unique<UnicycleModel>(sigma_diag.size() ? sigma_diag
                                                               : UnicycleModel::default_sigma());
    case ModelKind::Omni:
      return std::make_unique<OmniModel>(sigma_diag.size() ? sigma_diag
                                                           : UnicycleModel::default_sigma());
  }
  throw ContractViolation("scenario config: unknown model kind");
}

std::unique_ptr<StateBarrier> ScenarioConfig::make_barrier() const {
  switch (barrier) {
    case BarrierKind::Halfspace:
      return std::make_unique<HalfspaceBarrier>(halfspace_normal, halfspace_offset);
    case BarrierKind::CircularStayOut:
      return std::make_unique<CircularStayOutBarrier>(obstacle_center, obstacle_radius);
    case BarrierKind::LookaheadStayOut:
      return std::make_unique<LookaheadUnicycleBarrier>(obstacle_center, obstacle_radius,
                                                        lookahead);
  }
  throw ContractViolation("scenario config: unknown barrier kind");
}

std::unique_ptr<ObservationModel> ScenarioConfig::make_observation() const {
  if (!has_observation) return nullptr;
  return std::make_unique<RangeBeaconObservation>(beacon, obs_noise_std, obs_rate_hz);
}

double scan_b_min(const StateBarrier& barrier, const WorkspaceBox& box) {
  const int n = static_cast<int>(box.lower.size());
  const int g = box.grid;
  Vec step(n);
  for (int d = 0; d < n; ++d) step(d) = (box.upper(d) - box.lower(d)) / (g - 1);

  double min_value = std::numeric_limits<double>::infinity();
  double max_grad = 0.0;
  std::vector<int> idx(n, 0);
  Vec x(n);
  while (true) {
    for (int d = 0; d < n; ++d) x(d) = box.lower(d) + step(d) * idx[d];
    min_value = std::min(min_value, barrier.value(x));
    max_grad = std::max(max_grad, barrier.gradient(x).norm());
    int d = 0;
    for (; d < n; ++d) {
      if (++idx[d] < g) break;
      idx[d] = 0;
    }
    if (d == n) break;
  }
  return min_value - max_grad * step.norm();
}

RiskConfig ScenarioConfig::resolve_risk() const {
  RiskConfig risk;
  risk.alpha = alpha;
  risk.delta = delta;
  if (b_min.policy == BMinSpec::Policy::Value) {
    risk.b_min = b_min.value;
  } else {
    if (!workspace)
      throw ContractViolation("scenario config: b_min workspace_scan needs a workspace box");
    risk.b_min = scan_b_min(*make_barrier(), *workspace);
  }
  risk.validate();
  return risk;
}

SafetyFilterConfig ScenarioConfig::make_filter_config(int input_dim) const {
  SafetyFilterConfig fc;
  if (q_diag.size() != 0) {
    fc.Q = Mat::Zero(input_dim, input_dim);
    fc.Q.diagonal() = q_diag;
  }
  fc.gamma_cbf = gamma_cbf;
  fc.box = BoxBounds{u_min, u_max};
  return fc;
}

// Shipped study scenarios. The JSON here is the single source of truth; the
// files under configs/ hold the same text and a test keeps them in sync.

const char* example1_json() {
  return R"json({
  "name": "example1",
  "model": { "type": "integrator1d", "sigma": [0.1] },
  "barrier": { "type": "halfspace", "normal": [1.0], "offset": 2.0 },
  "initial_belief": { "weights": [1.0], "means": [[1.58]], "stds": [[0.0]] },
  "risk": { "alpha": 0.2, "delta": 0.05, "b_min": -0.08 },
  "controller": {
    "variant": "ours",
    "reference": { "type": "constant", "u": [1.0] },
    "u_min": [-1.0],
    "u_max": [1.0],
    "gamma_cbf": 1.0
  },
  "sim": {
    "horizon": 0.5,
    "control_period": 0.01,
    "dt_sde": 0.01,
    "particles": 100,
    "reps": 200,
    "seed": 1,
    "kf_oracle": true
  }
})json";
}

const char* multimodal_json() {
  return R"json({
  "name": "multimodal",
  "model": { "type": "unicycle", "sigma": [0.03, 0.03, 0.02] },
  "observation": { "type": "range_beacon", "beacon": [4.0, 4.0], "noise_std": 0.3, "rate_hz": 1.0 },
  "barrier": { "type": "lookahead_stayout", "center": [2.32, 3.72], "radius": 0.5, "lookahead": 0.2 },
  "initial_belief": {
    "weights": [0.5, 0.5],
    "means": [[0.2, 1.6, 0.7853981633974483], [1.6, 0.2, 0.7853981633974483]],
    "stds": [[0.05, 0.05, 0.05], [0.05, 0.05, 0.05]]
  },
  "risk": { "alpha": 0.2, "delta": 0.05, "b_min": -0.42 },
  "controller": {
    "variant": "ours",
    "reference": { "type": "goal", "goal": [5.0, 4.6], "gain": 1.0 },
    "u_min": [0.0, -2.0],
    "u_max": [1.0, 2.0],
    "gamma_cbf": 1.0,
    "eta": 0.05
  },
  "sim": {
    "horizon": 7.0,
    "control_period": 0.01,
    "dt_sde": 0.01,
    "particles": 1000,
    "reps": 100,
    "seed": 1
  }
})json";
}

const char* dropout_json() {
  return R"json({
  "name": "dropout",
  "model": { "type": "omni", "sigma": [0.2, 0.2, 0.05] },
  "observation": { "type": "range_beacon", "beacon": [4.0, 4.0], "noise_std": 0.3, "rate_hz": 1.0, "dropout_time": 3.0 },
  "barrier": { "type": "circular_stayout", "center": [2.5, 2.5], "radius": 0.5 },
  "initial_belief": {
    "weights": [1.0],
    "means": [[0.5, 0.5, 0.0]],
    "stds": [[0.2, 0.2, 0.1]]
  },
  "risk": { "alpha": 0.2, "delta": 0.05, "b_min": { "policy": "workspace_scan" } },
  "workspace": { "lower": [-1.0, -1.0, -3.2], "upper": [5.0, 5.0, 3.2], "grid": 41 },
  "controller": {
    "variant": "ours",
    "reference": { "type": "goal", "goal": [4.5, 4.5], "gain": 1.0 },
    "u_min": [-1.0, -1.0, -2.0],
    "u_max": [1.0, 1.0, 2.0],
    "gamma_cbf": 1.0,
    "eta": 0.05
  },
  "sim": {
    "horizon": 8.0,
    "control_period": 0.01,
    "dt_sde": 0.01,
    "particles": 1000,
    "reps": 20,
    "seed": 1
  }
})json";
}

ScenarioConfig example1_default() { return load_scenario_json(example1_json(), "example1"); }

ScenarioConfig multimodal_default() { return load_scenario_json(multimodal_json(), "multimodal"); }

ScenarioConfig dropout_default() { return load_scenario_json(dropout_json(), "dropout"); }

}  // namespace riskfilter
