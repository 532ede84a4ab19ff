#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "riskfilter/scenario.hpp"

namespace riskfilter {

// One row per control step, evaluated on the belief the controller saw;
// u fields are the input applied over the following control period.
struct StepRecord {
  double t = 0.0;
  Vec x_true;
  double h_x_true = 0.0;
  double h_b = std::numeric_limits<double>::quiet_NaN();
  double cvar_hat = std::numeric_limits<double>::quiet_NaN();
  double cvar_true = std::numeric_limits<double>::quiet_NaN();
  double e_hat = std::numeric_limits<double>::quiet_NaN();
  double e_bar = std::numeric_limits<double>::quiet_NaN();
  Vec u_ref;
  Vec u_star;
  bool feasible = true;
  bool collision = false;
  bool jump_flag = false;
  double t_c = 0.0;  // seconds spent in the filter call
};

struct RunResult {
  std::string scenario;
  std::string variant;
  std::uint64_t seed = 0;
  int rep = 0;
  std::vector<StepRecord> records;

  bool aborted = false;
  std::string abort_reason;
  bool collided = false;
  int collision_steps = 0;
  int infeasible_steps = 0;
  int degenerate_updates = 0;
  int jump_violations = 0;  // belief barrier left the safe side across an update
  double min_h_b = std::numeric_limits<double>::infinity();
  double final_h_x = std::numeric_limits<double>::quiet_NaN();
  double final_h_b = std::numeric_limits<double>::quiet_NaN();
  double safe_fraction = 0.0;  // steps with h_x_true >= 0

  std::optional<BeliefState> final_belief;
};

struct RunOptions {
  bool keep_final_belief = false;
  // Per-step callback on the evolving belief (plots, extra diagnostics).
  std::function<void(const StepRecord&, const BeliefState&)> on_step;
};

// Simulate one repetition. rep folds into the seed, so repetitions are
// independent and any subset can be reproduced in isolation.
RunResult run_scenario(const ScenarioConfig& cfg, int rep, const RunOptions& options = {});

void write_steps_csv(const RunResult& run, std::ostream& out);
std::string run_summary_json(const RunResult& run);

// Mean / standard deviation / count accumulator (Welford).
struct Accumulator {
  void add(double v);
  double mean() const;
  double stddev() const;  // sample, n - 1
  long long n = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct ConvergenceRow {
  int particles = 0;
  long long steps = 0;
  int completed_reps = 0;
  int aborted_reps = 0;
  double mean_e_hat = 0.0, std_e_hat = 0.0, frac_e_hat_neg = 0.0;
  double mean_e_bar = 0.0, std_e_bar = 0.0, frac_e_bar_neg = 0.0;
  double mean_t_c = 0.0, std_t_c = 0.0;
};

struct ConvergenceStudy {
  std::string scenario;
  std::uint64_t seed = 0;
  int reps = 0;
  std::vector<ConvergenceRow> rows;
};

// Oracle-error convergence over particle counts (statistics pooled over all
// steps of all repetitions; requires a scenario with the closed-form oracle).
ConvergenceStudy convergence_study(const ScenarioConfig& cfg, const std::vector<int>& particle_counts,
                                   int reps, int threads);

struct ComparisonRow {
  std::string label;
  std::string variant;
  double alpha = 0.0;
  int reps = 0;
  int collided_runs = 0;
  int aborted_runs = 0;
  long long collision_steps = 0;
  long long infeasible_steps = 0;
  double mean_clearance = 0.0, std_clearance = 0.0;  // pooled h_x_true
  double min_clearance = 0.0;
  std::vector<double> safe_fractions;  // one per run
};

struct ComparisonStudy {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<ComparisonRow> rows;
};

struct ComparisonArm {
  std::string label;
  ControllerVariant variant = ControllerVariant::Ours;
  std::optional<double> alpha;  // override, else scenario alpha
};

// Controller comparison on one scenario: each arm runs the same repetitions
// (identical seeds, so every arm faces the same disturbances).
ComparisonStudy comparison_study(const ScenarioConfig& cfg, const std::vector<ComparisonArm>& arms,
                                 int reps, int threads);

std::vector<ComparisonArm> default_comparison_arms();

std::string to_json(const ConvergenceStudy& study);
std::string to_json(const ComparisonStudy& study);

struct BoundValidation {
  int n = 0;
  int trials = 0;
  int violations = 0;
  double rate = 0.0;
  double alpha = 0.0, delta = 0.0;
  double true_cvar = 0.0;
  double mean_bound = 0.0;
};

// Empirical failure rate of the concentration bound on standard normal
// samples clipped (by redraw) to stay above b_min; must come in below delta
// up to Monte Carlo noise.
BoundValidation validate_bound(double alpha, double delta, int n, int trials, std::uint64_t seed,
                               double b_min = -10.0);

std::string to_json(const BoundValidation& v);

struct BenchRow {
  int particles = 0;
  int iters = 0;
  double mean_s = 0.0;
  double std_s = 0.0;
  double max_s = 0.0;
};

// Wall-clock latency of the full filter call (belief barrier + constraint +
// QP) on a synthetic planar belief.
std::vector<BenchRow> bench_filter(const std::vector<int>& particle_counts, int iters,
                                   std::uint64_t seed);

std::string to_json(const std::vector<BenchRow>& rows);

// Worker count: explicit request > RISKFILTER_THREADS > hardware concurrency.
int resolve_threads(int requested = 0);

// Runs fn(0..n-1) on `threads` workers. Results must not depend on execution
// order; exceptions propagate to the caller.
void parallel_for_index(int n, int threads, const std::function<void(int)>& fn);

}  // namespace riskfilter
