#pragma once

#include <Eigen/Dense>
#include <optional>

#include "riskfilter/barrier.hpp"
#include "riskfilter/models.hpp"
#include "riskfilter/particle_filter.hpp"
#include "riskfilter/risk.hpp"

namespace riskfilter {

using Row = Eigen::RowVectorXd;

struct BoxBounds {
  Vec lower;
  Vec upper;
};

// min (u - u_ref)^T Q (u - u_ref)  s.t.  a u >= c  (and optionally u in box).
struct QPProblem {
  Mat Q;
  Vec u_ref;
  Row a;
  double c = 0.0;
  std::optional<BoxBounds> box;
};

struct QPSolution {
  Vec u;
  bool feasible = true;
  bool active = false;      // linear constraint binds at the solution
  double slack_used = 0.0;  // unmet constraint amount when infeasible
  double objective = 0.0;
};

// Single linear constraint: closed form without bounds, exhaustive active-set
// enumeration with them (input dim <= 3 keeps that exact and cheap). An
// infeasible problem is reported, not thrown: u is the best-effort input
// maximizing a u inside the box.
QPSolution solve_qp(const QPProblem& qp);

// Linearized safety constraint a u >= c from the belief-barrier terms:
// a = sum_i grads_i^T g(x_i), c = -gamma_cbf h_b - sum_i grads_i^T f(x_i) - trace.
struct ConstraintTerms {
  Row a;
  double c = 0.0;
  double lf = 0.0;
  double trace = 0.0;
  double h_b = 0.0;
};

ConstraintTerms assemble_constraint(const BeliefBarrierTerms& terms, const BeliefState& belief,
                                    const ProcessModel& model, double gamma_cbf);

struct SafetyFilterConfig {
  Mat Q;  // empty = identity
  double gamma_cbf = 1.0;
  std::optional<BoxBounds> box;
};

struct SafetyFilterResult {
  Vec u_star;
  bool feasible = true;
  bool active = false;
  double slack_used = 0.0;
  ConstraintTerms constraint;
};

// Belief-level filter: belief barrier -> constraint -> QP.
SafetyFilterResult filter(const BeliefState& belief, const StateBarrier& barrier,
                          const RiskConfig& risk_cfg, const ProcessModel& model,
                          const Vec& u_ref, const SafetyFilterConfig& cfg);

// Same composition when the belief-barrier terms are already computed (lets the
// caller reuse the per-particle values for logging without a second sort).
SafetyFilterResult filter_with_terms(const BeliefBarrierTerms& terms, const BeliefState& belief,
                                     const ProcessModel& model, const Vec& u_ref,
                                     const SafetyFilterConfig& cfg);

// Deterministic SCBF on a single point estimate (the standard baseline building
// block; also what the belief filter reduces to for a one-particle belief with
// zero concentration correction).
SafetyFilterResult point_scbf(const Vec& x, const StateBarrier& barrier,
                              const ProcessModel& model, const Vec& u_ref,
                              const SafetyFilterConfig& cfg);

// SCBF on the weighted mean state.
SafetyFilterResult baseline_mu_scbf(const BeliefState& belief, const StateBarrier& barrier,
                                    const ProcessModel& model, const Vec& u_ref,
                                    const SafetyFilterConfig& cfg);

// SCBF on the highest-likelihood particle; falls back to the mean before the
// first observation.
SafetyFilterResult baseline_ml_scbf(const BeliefState& belief, const std::optional<Vec>& last_z,
                                    const ObservationModel& obs, const StateBarrier& barrier,
                                    const ProcessModel& model, const Vec& u_ref,
                                    const SafetyFilterConfig& cfg);

// Chebyshev concentration ball around the mean position: contains at least
// 1 - eta of the belief mass.
struct ChebyshevBall {
  Eigen::Vector2d center;
  double radius = 0.0;
  double eta = 0.0;
};

ChebyshevBall chebyshev_ball(const BeliefState& belief, double eta);

// SCBF on the mean with the stay-out radius inflated by the Chebyshev ball
// radius (recomputed every call).
SafetyFilterResult baseline_be_scbf(const BeliefState& belief,
                                    const CircularStayOutBarrier& barrier,
                                    const ProcessModel& model, const Vec& u_ref,
                                    const SafetyFilterConfig& cfg, double eta = 0.05);

Vec clamp_to_box(const Vec& u, const std::optional<BoxBounds>& box);

}  // namespace riskfilter
