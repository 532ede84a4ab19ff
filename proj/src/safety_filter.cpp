#include "riskfilter/safety_filter.hpp"

#include <cmath>
#include <limits>

#include "riskfilter/errors.hpp"

namespace riskfilter {

namespace {
constexpr double kFeasTol = 1e-9;

void validate_qp(const QPProblem& qp) {
  const auto m = qp.Q.rows();
  if (m == 0 || qp.Q.cols() != m) throw ContractViolation("solve_qp: Q must be square");
  if (qp.u_ref.size() != m || qp.a.size() != m) {
    throw ContractViolation("solve_qp: dimension mismatch between Q, u_ref, a");
  }
  if ((qp.Q - qp.Q.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, qp.Q.cwiseAbs().maxCoeff())) {
    throw ContractViolation("solve_qp: Q must be symmetric");
  }
  if (Eigen::LLT<Mat>(qp.Q).info() != Eigen::Success) {
    throw ContractViolation("solve_qp: Q must be positive definite");
  }
  if (qp.box) {
    if (qp.box->lower.size() != m || qp.box->upper.size() != m) {
      throw ContractViolation("solve_qp: box dimension mismatch");
    }
    if ((qp.box->lower.array() > qp.box->upper.array()).any()) {
      throw ContractViolation("solve_qp: box lower bound exceeds upper bound");
    }
  }
}

double objective_of(const QPProblem& qp, const Vec& u) {
  const Vec d = u - qp.u_ref;
  return d.dot(qp.Q * d);
}

bool in_box(const Vec& u, const BoxBounds& box, double tol) {
  return (u.array() >= box.lower.array() - tol).all() &&
         (u.array() <= box.upper.array() + tol).all();
}

double feas_scale(const QPProblem& qp) {
  return std::max(1.0, std::abs(qp.c));
}

QPSolution infeasible_result(const QPProblem& qp) {
  QPSolution out;
  out.feasible = false;
  out.active = false;
  const auto m = qp.u_ref.size();
  Vec u(m);
  if (qp.box) {
    // Best effort: maximize a u over the box, break ties toward u_ref.
    for (int i = 0; i < m; ++i) {
      if (qp.a(i) > 0.0) {
        u(i) = qp.box->upper(i);
      } else if (qp.a(i) < 0.0) {
        u(i) = qp.box->lower(i);
      } else {
        u(i) = std::clamp(qp.u_ref(i), qp.box->lower(i), qp.box->upper(i));
      }
    }
  } else {
    u = qp.u_ref;
  }
  out.u = u;
  out.slack_used = qp.c - qp.a.dot(u);
  out.objective = objective_of(qp, u);
  return out;
}

QPSolution solve_unconstrained_direction(const QPProblem& qp) {
  // No box. Feasible u_ref handled by the caller; project onto a u = c.
  QPSolution out;
  if (qp.a.squaredNorm() == 0.0) return infeasible_result(qp);
  const Eigen::LLT<Mat> llt(qp.Q);
  const Vec dir = llt.solve(qp.a.transpose());
  const double denom = qp.a.dot(dir);
  const double lambda = (qp.c - qp.a.dot(qp.u_ref)) / denom;
  out.u = qp.u_ref + lambda * dir;
  out.feasible = true;
  out.active = true;
  out.objective = objective_of(qp, out.u);
  return out;
}

QPSolution solve_box_enumeration(const QPProblem& qp) {
  const int m = static_cast<int>(qp.u_ref.size());
  const BoxBounds& box = *qp.box;
  const double scale = feas_scale(qp);

  QPSolution best;
  bool have_best = false;
  double best_obj = std::numeric_limits<double>::infinity();

  int combos = 1;
  for (int i = 0; i < m; ++i) combos *= 3;

  for (int code = 0; code < combos; ++code) {
    // Per-coordinate assignment: 0 free, 1 at lower, 2 at upper.
    std::vector<int> kind(m);
    int rem = code;
    std::vector<int> free_idx;
    Vec u = Vec::Zero(m);
    for (int i = 0; i < m; ++i) {
      kind[i] = rem % 3;
      rem /= 3;
      if (kind[i] == 0) {
        free_idx.push_back(i);
      } else {
        u(i) = (kind[i] == 1) ? box.lower(i) : box.upper(i);
      }
    }
    const int nf = static_cast<int>(free_idx.size());

    for (int lin_active = 0; lin_active <= 1; ++lin_active) {
      Vec cand = u;
      bool ok = true;
      if (nf == 0) {
        if (lin_active) continue;  // nothing left to enforce the equality with
      } else {
        Mat qff(nf, nf);
        Mat qfb = Mat::Zero(nf, m - nf);
        Vec rf(nf);
        Vec ub_fixed(m - nf);
        Vec rb(m - nf);
        {
          int bj = 0;
          for (int j = 0; j < m; ++j) {
            if (kind[j] != 0) {
              ub_fixed(bj) = u(j);
              rb(bj) = qp.u_ref(j);
              ++bj;
            }
          }
        }
        for (int r = 0; r < nf; ++r) {
          rf(r) = qp.u_ref(free_idx[r]);
          for (int cidx = 0; cidx < nf; ++cidx) qff(r, cidx) = qp.Q(free_idx[r], free_idx[cidx]);
          int bj = 0;
          for (int j = 0; j < m; ++j) {
            if (kind[j] != 0) qfb(r, bj++) = qp.Q(free_idx[r], j);
          }
        }

        if (!lin_active) {
          const Vec uf = rf - qff.llt().solve(qfb * (ub_fixed - rb));
          for (int r = 0; r < nf; ++r) cand(free_idx[r]) = uf(r);
        } else {
          Row af(nf);
          for (int r = 0; r < nf; ++r) af(r) = qp.a(free_idx[r]);
          if (af.squaredNorm() == 0.0) continue;
          double cb = qp.c;
          for (int j = 0; j < m; ++j) {
            if (kind[j] != 0) cb -= qp.a(j) * u(j);
          }
          Mat kkt = Mat::Zero(nf + 1, nf + 1);
          kkt.topLeftCorner(nf, nf) = 2.0 * qff;
          kkt.topRightCorner(nf, 1) = -af.transpose();
          kkt.bottomLeftCorner(1, nf) = af;
          Vec rhs(nf + 1);
          rhs.head(nf) = 2.0 * (qff * rf - qfb * (ub_fixed - rb));
          rhs(nf) = cb;
          Eigen::FullPivLU<Mat> lu(kkt);
          if (!lu.isInvertible()) continue;
          const Vec sol = lu.solve(rhs);
          for (int r = 0; r < nf; ++r) cand(free_idx[r]) = sol(r);
        }
      }

      if (!in_box(cand, box, kFeasTol)) ok = false;
      if (ok && !lin_active && qp.a.dot(cand) < qp.c - kFeasTol * scale) ok = false;
      if (!ok) continue;

      const double obj = objective_of(qp, cand);
      if (obj < best_obj - 1e-15) {
        best_obj = obj;
        best.u = cand;
        best.active = lin_active != 0;
        have_best = true;
      }
    }
  }

  if (!have_best) return infeasible_result(qp);
  best.feasible = true;
  best.objective = best_obj;
  // Clamp any kFeasTol-sized excursions so callers always get an in-box input.
  for (int i = 0; i < m; ++i) best.u(i) = std::clamp(best.u(i), box.lower(i), box.upper(i));
  if (!best.active) {
    best.active = std::abs(qp.a.dot(best.u) - qp.c) <= kFeasTol * scale;
  }
  return best;
}
}  // namespace

Vec clamp_to_box(const Vec& u, const std::optional<BoxBounds>& box) {
  if (!box) return u;
  return u.cwiseMax(box->lower).cwiseMin(box->upper);
}

QPSolution solve_qp(const QPProblem& qp) {
  validate_qp(qp);
  const double scale = feas_scale(qp);

  // Feasible reference: zero deviation is globally optimal for any Q.
  const bool ref_in_box = !qp.box || in_box(qp.u_ref, *qp.box, 0.0);
  if (ref_in_box && qp.a.dot(qp.u_ref) >= qp.c) {
    QPSolution out;
    out.u = qp.u_ref;
    out.feasible = true;
    out.active = std::abs(qp.a.dot(qp.u_ref) - qp.c) <= kFeasTol * scale;
    out.objective = 0.0;
    return out;
  }

  if (!qp.box) return solve_unconstrained_direction(qp);
  return solve_box_enumeration(qp);
}

ConstraintTerms assemble_constraint(const BeliefBarrierTerms& terms, const BeliefState& belief,
                                    const ProcessModel& model, double gamma_cbf) {
  if (gamma_cbf <= 0.0) throw ContractViolation("assemble_constraint: gamma_cbf must be > 0");
  ConstraintTerms out;
  out.a = Row::Zero(model.input_dim());
  out.lf = 0.0;
  for (int i = 0; i < belief.size(); ++i) {
    if (terms.gamma(i) == 0.0) continue;
    const Vec x = belief.states().col(i);
    const Vec gcol = terms.grads.col(i);
    out.a += gcol.transpose() * model.input_matrix(x);
    out.lf += gcol.dot(model.drift(x));
  }
  out.trace = terms.trace_term;
  out.h_b = terms.h_b;
  out.c = -gamma_cbf * terms.h_b - out.lf - out.trace;
  return out;
}

namespace {
SafetyFilterResult solve_with_constraint(const ConstraintTerms& ct, const Vec& u_ref,
                                         const SafetyFilterConfig& cfg, int input_dim) {
  QPProblem qp;
  qp.Q = cfg.Q.size() == 0 ? Mat::Identity(input_dim, input_dim) : cfg.Q;
  qp.u_ref = u_ref;
  qp.a = ct.a;
  qp.c = ct.c;
  qp.box = cfg.box;
  const QPSolution sol = solve_qp(qp);
  SafetyFilterResult out;
  out.u_star = sol.u;
  out.feasible = sol.feasible;
  out.active = sol.active;
  out.slack_used = sol.slack_used;
  out.constraint = ct;
  return out;
}
}  // namespace

SafetyFilterResult filter_with_terms(const BeliefBarrierTerms& terms, const BeliefState& belief,
                                     const ProcessModel& model, const Vec& u_ref,
                                     const SafetyFilterConfig& cfg) {
  const ConstraintTerms ct = assemble_constraint(terms, belief, model, cfg.gamma_cbf);
  return solve_with_constraint(ct, u_ref, cfg, model.input_dim());
}

SafetyFilterResult filter(const BeliefState& belief, const StateBarrier& barrier,
                          const RiskConfig& risk_cfg, const ProcessModel& model,
                          const Vec& u_ref, const SafetyFilterConfig& cfg) {
  const BeliefBarrierTerms terms = belief_barrier(belief, barrier, risk_cfg, model);
  return filter_with_terms(terms, belief, model, u_ref, cfg);
}

SafetyFilterResult point_scbf(const Vec& x, const StateBarrier& barrier,
                              const ProcessModel& model, const Vec& u_ref,
                              const SafetyFilterConfig& cfg) {
  if (cfg.gamma_cbf <= 0.0) throw ContractViolation("point_scbf: gamma_cbf must be > 0");
  ConstraintTerms ct;
  const Vec grad = barrier.gradient(x);
  ct.a = grad.transpose() * model.input_matrix(x);
  ct.lf = grad.dot(model.drift(x));
  const Mat hess = barrier.hessian(x);
  const Vec sdiag = model.diffusion_diag(x);
  double tr = 0.0;
  for (int k = 0; k < sdiag.size(); ++k) tr += sdiag(k) * sdiag(k) * hess(k, k);
  ct.trace = 0.5 * tr;
  ct.h_b = barrier.value(x);
  ct.c = -cfg.gamma_cbf * ct.h_b - ct.lf - ct.trace;
  return solve_with_constraint(ct, u_ref, cfg, model.input_dim());
}

SafetyFilterResult baseline_mu_scbf(const BeliefState& belief, const StateBarrier& barrier,
                                    const ProcessModel& model, const Vec& u_ref,
                                    const SafetyFilterConfig& cfg) {
  return point_scbf(mean_state(belief), barrier, model, u_ref, cfg);
}

SafetyFilterResult baseline_ml_scbf(const BeliefState& belief, const std::optional<Vec>& last_z,
                                    const ObservationModel& obs, const StateBarrier& barrier,
                                    const ProcessModel& model, const Vec& u_ref,
                                    const SafetyFilterConfig& cfg) {
  const Vec x = last_z.has_value() ? most_likely_particle(belief, last_z, obs).x
                                   : mean_state(belief);
  return point_scbf(x, barrier, model, u_ref, cfg);
}

ChebyshevBall chebyshev_ball(const BeliefState& belief, double eta) {
  if (!(eta > 0.0) || eta >= 1.0) throw ContractViolation("chebyshev_ball: eta must be in (0,1)");
  if (belief.state_dim() < 2) throw ContractViolation("chebyshev_ball: no position block");
  ChebyshevBall ball;
  ball.eta = eta;
  const Mat& xs = belief.states();
  const Vec& w = belief.weights();
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int i = 0; i < belief.size(); ++i) mean += w(i) * xs.col(i).head<2>();
  double tr = 0.0;
  for (int i = 0; i < belief.size(); ++i) {
    tr += w(i) * (xs.col(i).head<2>() - mean).squaredNorm();
  }
  ball.center = mean;
  ball.radius = std::sqrt(tr / eta);
  return ball;
}

SafetyFilterResult baseline_be_scbf(const BeliefState& belief,
                                    const CircularStayOutBarrier& barrier,
                                    const ProcessModel& model, const Vec& u_ref,
                                    const SafetyFilterConfig& cfg, double eta) {
  const ChebyshevBall ball = chebyshev_ball(belief, eta);
  const CircularStayOutBarrier inflated(barrier.center(), barrier.radius() + ball.radius);
  return point_scbf(mean_state(belief), inflated, model, u_ref, cfg);
}

}  // namespace riskfilter
