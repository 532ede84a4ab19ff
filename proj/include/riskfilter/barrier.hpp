#pragma once

#include <Eigen/Dense>

#include "riskfilter/models.hpp"
#include "riskfilter/particle_filter.hpp"
#include "riskfilter/risk.hpp"

namespace riskfilter {

// Twice-differentiable state barrier; h(x) >= 0 is the safe set.
class StateBarrier {
public:
  virtual ~StateBarrier() = default;

  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Mat hessian(const Vec& x) const = 0;
};

// h = c - a.x (safe below the plane a.x = c).
class HalfspaceBarrier final : public StateBarrier {
public:
  HalfspaceBarrier(Vec a, double c);

  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;

private:
  Vec a_;
  double c_;
};

// Stay-out disc on the position block: h = ||p - center|| - radius. The
// gradient is zero at the center singularity (flagged via at_singularity).
class CircularStayOutBarrier final : public StateBarrier {
public:
  CircularStayOutBarrier(Eigen::Vector2d center, double radius);

  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;

  bool at_singularity(const Vec& x) const;

  const Eigen::Vector2d& center() const { return center_; }
  double radius() const { return radius_; }

private:
  Eigen::Vector2d center_;
  double radius_;
};

// Unicycle stay-out barrier evaluated at the lookahead point
// p_hat = p + d [cos phi, sin phi]; h = ||p_hat - center|| - (radius + d).
// The heading coupling makes the omega column of the constraint non-zero.
class LookaheadUnicycleBarrier final : public StateBarrier {
public:
  LookaheadUnicycleBarrier(Eigen::Vector2d center, double radius, double lookahead = 0.2);

  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;

  const Eigen::Vector2d& center() const { return center_; }
  double radius() const { return radius_; }
  double lookahead() const { return lookahead_; }

private:
  Eigen::Vector2d center_;
  double radius_;
  double lookahead_;
};

// Barrier evaluated at every particle, in particle order.
Vec barrier_values(const BeliefState& belief, const StateBarrier& barrier);

// The belief-level barrier h_b (CVaR lower bound over particle barrier values)
// together with everything the safety constraint needs. grads.col(i) is
// exactly gamma_i * grad h(x_i); the trace term is
// 0.5 * sum_i gamma_i tr[sigma(x_i)^T hess h(x_i) sigma(x_i)].
struct BeliefBarrierTerms {
  double h_b = 0.0;
  Vec values;   // per-particle h(x_i)
  Vec gamma;    // per-particle coefficient
  double gamma_b = 0.0;
  Mat grads;    // state_dim x N, column i = gamma_i * grad h(x_i)
  double trace_term = 0.0;
};

// Requires uniform weights (resample first). Throws SupportViolation when a
// particle's barrier value is below cfg.b_min.
BeliefBarrierTerms belief_barrier(const BeliefState& belief, const StateBarrier& barrier,
                                  const RiskConfig& cfg, const ProcessModel& model);

struct FdCheckResult {
  double max_rel_error = 0.0;
  bool tie_detected = false;
};

// Central-difference check of the belief-barrier gradient: perturbs every
// particle coordinate by +/- eps and recomputes h_b through a fresh sort.
// Reports a tie when any two particle barrier values are closer than 10*eps
// (the sort coefficients are only piecewise constant there).
FdCheckResult finite_difference_check(const BeliefState& belief, const StateBarrier& barrier,
                                      const RiskConfig& cfg, double eps = 1e-6);

}  // namespace riskfilter
