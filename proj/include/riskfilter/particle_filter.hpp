#pragma once

#include <Eigen/Dense>
#include <optional>
#include <ostream>

#include "riskfilter/models.hpp"
#include "riskfilter/rng.hpp"

namespace riskfilter {

struct Particle {
  Vec x;
  double w;
};

// Weighted particle set approximating the state posterior. Particle order is
// stable; storage is one column per particle.
class BeliefState {
public:
  BeliefState(Mat states, Vec weights, double time);

  static BeliefState uniform(Mat states, double time);

  int size() const { return static_cast<int>(states_.cols()); }
  int state_dim() const { return static_cast<int>(states_.rows()); }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  const Mat& states() const { return states_; }
  const Vec& weights() const { return weights_; }
  bool uniform_weights() const { return uniform_weights_; }

  Particle particle(int i) const { return {states_.col(i), weights_(i)}; }

private:
  Mat states_;   // state_dim x N
  Vec weights_;  // N, normalized to sum 1
  double time_ = 0.0;
  bool uniform_weights_ = false;
};

struct PFConfig {
  double dt_sde = 0.01;       // Euler-Maruyama substep, seconds
  int threads = 1;            // propagation worker count (bit-identical to serial)
  double ess_threshold = 0.5; // diagnostic only: fraction of N considered healthy
};

// Advance one state by dt using Euler-Maruyama substeps of at most dt_sde
// (the final substep is truncated so the substeps sum to dt exactly).
Vec em_propagate_state(const ProcessModel& model, const Vec& x, const Vec& u, double dt,
                       double dt_sde, SplitMix64& g);

// Propagate every particle through the controlled SDE. Weights and order are
// preserved; time advances by dt. Throws PropagationDiverged on non-finite states.
BeliefState propagate(const BeliefState& belief, const Vec& u, double dt,
                      const ProcessModel& model, const PFConfig& cfg, RngStream& rng);

// Weight by observation likelihood and systematically resample back to uniform
// weights. Throws DegenerateUpdate when every likelihood is zero; callers
// decide whether to keep the prior belief.
BeliefState measurement_update(const BeliefState& belief, const Vec& z,
                               const ObservationModel& obs, RngStream& rng);

// Systematic (low-variance) resampling indices for normalized weights: one
// uniform offset, then a stride-1/N sweep over the cumulative weights.
std::vector<int> systematic_resample_indices(const Vec& weights, double offset01);

Vec mean_state(const BeliefState& belief);

// Particle with the highest likelihood for the given observation; ties break to
// the lowest index. Throws ContractViolation when no observation is available
// (callers should fall back to mean_state).
Particle most_likely_particle(const BeliefState& belief, const std::optional<Vec>& last_z,
                              const ObservationModel& obs);

double effective_sample_size(const BeliefState& belief);

// Snapshot with header row: t, i, x_0..x_{n-1}, w.
void belief_to_csv(const BeliefState& belief, std::ostream& out);

}  // namespace riskfilter
