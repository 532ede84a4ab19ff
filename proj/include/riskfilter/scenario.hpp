#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "riskfilter/barrier.hpp"
#include "riskfilter/models.hpp"
#include "riskfilter/risk.hpp"
#include "riskfilter/safety_filter.hpp"

namespace riskfilter {

enum class ModelKind { Integrator1D, Unicycle, Omni };
enum class BarrierKind { Halfspace, CircularStayOut, LookaheadStayOut };
enum class ControllerVariant { Ours, MuScbf, MlScbf, BeScbf, None };

const char* variant_name(ControllerVariant v);

// Equally structured Gaussian mixture; one component = plain Gaussian. A zero
// std makes that coordinate deterministic.
struct InitialBeliefSpec {
  std::vector<double> weights;
  std::vector<Vec> means;
  std::vector<Vec> stds;
};

struct ReferenceSpec {
  enum class Type { Constant, GoalProportional } type = Type::Constant;
  Vec constant_u;
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  double gain = 1.0;
};

struct WorkspaceBox {
  Vec lower;
  Vec upper;
  int grid = 101;
};

struct BMinSpec {
  enum class Policy { Value, WorkspaceScan } policy = Policy::Value;
  double value = -1.0;
};

struct ScenarioConfig {
  std::string name;

  ModelKind model = ModelKind::Integrator1D;
  Vec sigma_diag;  // empty = model default

  bool has_observation = false;
  Eigen::Vector2d beacon = Eigen::Vector2d(4.0, 4.0);
  double obs_noise_std = 0.3;
  double obs_rate_hz = 1.0;
  double dropout_time = std::numeric_limits<double>::infinity();

  BarrierKind barrier = BarrierKind::Halfspace;
  Vec halfspace_normal;
  double halfspace_offset = 0.0;
  Eigen::Vector2d obstacle_center = Eigen::Vector2d::Zero();
  double obstacle_radius = 0.5;
  double lookahead = 0.2;

  InitialBeliefSpec initial_belief;
  bool true_from_belief = true;
  Vec true_initial;

  double alpha = 0.2;
  double delta = 0.05;
  BMinSpec b_min;
  std::optional<WorkspaceBox> workspace;

  ControllerVariant variant = ControllerVariant::Ours;
  ReferenceSpec reference;
  Vec q_diag;  // empty = identity
  Vec u_min;
  Vec u_max;
  double gamma_cbf = 1.0;
  double eta = 0.05;

  double horizon = 1.0;
  double control_period = 0.01;
  double dt_sde = 0.01;
  int particles = 100;
  int reps = 1;
  std::uint64_t seed = 1;
  bool kf_oracle = false;

  void validate() const;

  std::unique_ptr<ProcessModel> make_model() const;
  std::unique_ptr<StateBarrier> make_barrier() const;
  std::unique_ptr<ObservationModel> make_observation() const;  // null when none

  // Resolved RiskConfig: b_min either explicit or a padded grid scan of the
  // workspace box (padding keeps the scan on the sound side).
  RiskConfig resolve_risk() const;

  SafetyFilterConfig make_filter_config(int input_dim) const;
};

// Strict JSON loading: every key must be known, types must match, and errors
// carry the offending field path. The schema ships at docs/scenario.schema.json.
ScenarioConfig load_scenario_json(const std::string& text, const std::string& origin = "<inline>");
ScenarioConfig load_scenario_file(const std::string& path);

// Built-in study scenarios (also shipped verbatim under configs/).
const char* example1_json();
const char* multimodal_json();
const char* dropout_json();

ScenarioConfig example1_default();
ScenarioConfig multimodal_default();
ScenarioConfig dropout_default();

// Lowest grid value of the barrier over the workspace box minus a Lipschitz
// pad, so the result can only under-estimate the true infimum.
double scan_b_min(const StateBarrier& barrier, const WorkspaceBox& box);

}  // namespace riskfilter
