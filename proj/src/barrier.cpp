#include "riskfilter/barrier.hpp"

#include <algorithm>
#include <cmath>

#include "riskfilter/errors.hpp"

namespace riskfilter {

namespace {
constexpr double kCenterTol = 1e-12;

void check_min_dim(const Vec& x, int n, const char* who) {
  if (x.size() < n) {
    throw ContractViolation(std::string(who) + ": state dimension " +
                            std::to_string(x.size()) + " < " + std::to_string(n));
  }
}
}  // namespace

HalfspaceBarrier::HalfspaceBarrier(Vec a, double c) : a_(std::move(a)), c_(c) {
  if (a_.size() == 0 || a_.norm() == 0.0) {
    throw ContractViolation("HalfspaceBarrier: normal must be non-zero");
  }
}

double HalfspaceBarrier::value(const Vec& x) const {
  check_min_dim(x, static_cast<int>(a_.size()), "HalfspaceBarrier");
  return c_ - a_.dot(x.head(a_.size()));
}

Vec HalfspaceBarrier::gradient(const Vec& x) const {
  check_min_dim(x, static_cast<int>(a_.size()), "HalfspaceBarrier");
  Vec g = Vec::Zero(x.size());
  g.head(a_.size()) = -a_;
  return g;
}

Mat HalfspaceBarrier::hessian(const Vec& x) const {
  return Mat::Zero(x.size(), x.size());
}

CircularStayOutBarrier::CircularStayOutBarrier(Eigen::Vector2d center, double radius)
    : center_(std::move(center)), radius_(radius) {
  if (radius_ <= 0.0) throw ContractViolation("CircularStayOutBarrier: radius <= 0");
}

double CircularStayOutBarrier::value(const Vec& x) const {
  check_min_dim(x, 2, "CircularStayOutBarrier");
  return (x.head<2>() - center_).norm() - radius_;
}

bool CircularStayOutBarrier::at_singularity(const Vec& x) const {
  check_min_dim(x, 2, "CircularStayOutBarrier");
  return (x.head<2>() - center_).norm() <= kCenterTol;
}

Vec CircularStayOutBarrier::gradient(const Vec& x) const {
  check_min_dim(x, 2, "CircularStayOutBarrier");
  Vec g = Vec::Zero(x.size());
  const Eigen::Vector2d r = x.head<2>() - center_;
  const double rho = r.norm();
  if (rho <= kCenterTol) return g;  // singular at the center; caller can check at_singularity
  g.head<2>() = r / rho;
  return g;
}

Mat CircularStayOutBarrier::hessian(const Vec& x) const {
  check_min_dim(x, 2, "CircularStayOutBarrier");
  Mat h = Mat::Zero(x.size(), x.size());
  const Eigen::Vector2d r = x.head<2>() - center_;
  const double rho = r.norm();
  if (rho <= kCenterTol) return h;
  const Eigen::Vector2d q = r / rho;
  h.topLeftCorner<2, 2>() = (Eigen::Matrix2d::Identity() - q * q.transpose()) / rho;
  return h;
}

LookaheadUnicycleBarrier::LookaheadUnicycleBarrier(Eigen::Vector2d center, double radius,
                                                   double lookahead)
    : center_(std::move(center)), radius_(radius), lookahead_(lookahead) {
  if (radius_ <= 0.0) throw ContractViolation("LookaheadUnicycleBarrier: radius <= 0");
  if (lookahead_ <= 0.0) throw ContractViolation("LookaheadUnicycleBarrier: lookahead <= 0");
}

double LookaheadUnicycleBarrier::value(const Vec& x) const {
  check_min_dim(x, 3, "LookaheadUnicycleBarrier");
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  const Eigen::Vector2d phat(x(0) + lookahead_ * c, x(1) + lookahead_ * s);
  return (phat - center_).norm() - (radius_ + lookahead_);
}

Vec LookaheadUnicycleBarrier::gradient(const Vec& x) const {
  check_min_dim(x, 3, "LookaheadUnicycleBarrier");
  Vec g = Vec::Zero(x.size());
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  const Eigen::Vector2d r(x(0) + lookahead_ * c - center_(0),
                          x(1) + lookahead_ * s - center_(1));
  const double rho = r.norm();
  if (rho <= kCenterTol) return g;
  const Eigen::Vector2d q = r / rho;
  g(0) = q(0);
  g(1) = q(1);
  g(2) = q.dot(Eigen::Vector2d(-lookahead_ * s, lookahead_ * c));
  return g;
}

Mat LookaheadUnicycleBarrier::hessian(const Vec& x) const {
  check_min_dim(x, 3, "LookaheadUnicycleBarrier");
  Mat h = Mat::Zero(x.size(), x.size());
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  const Eigen::Vector2d r(x(0) + lookahead_ * c - center_(0),
                          x(1) + lookahead_ * s - center_(1));
  const double rho = r.norm();
  if (rho <= kCenterTol) return h;
  const Eigen::Vector2d q = r / rho;

  // r(x) has Jacobian J = [I, d*(-s, c)]; h = ||r|| gives
  // hess = J^T (I - qq^T) J / rho plus the curvature of r itself in phi.
  Eigen::Matrix<double, 2, 3> J;
  J << 1.0, 0.0, -lookahead_ * s,
       0.0, 1.0, lookahead_ * c;
  const Eigen::Matrix2d P = Eigen::Matrix2d::Identity() - q * q.transpose();
  Eigen::Matrix3d hh = J.transpose() * P * J / rho;
  hh(2, 2) += q.dot(Eigen::Vector2d(-lookahead_ * c, -lookahead_ * s));
  h.topLeftCorner<3, 3>() = hh;
  return h;
}

Vec barrier_values(const BeliefState& belief, const StateBarrier& barrier) {
  Vec vals(belief.size());
  for (int i = 0; i < belief.size(); ++i) vals(i) = barrier.value(belief.states().col(i));
  return vals;
}

BeliefBarrierTerms belief_barrier(const BeliefState& belief, const StateBarrier& barrier,
                                  const RiskConfig& cfg, const ProcessModel& model) {
  if (!belief.uniform_weights()) {
    throw ContractViolation(
        "belief_barrier: weights must be uniform; run a resampling update first");
  }
  BeliefBarrierTerms out;
  out.values = barrier_values(belief, barrier);
  const CvarBoundCoefficients co = cvar_lower_bound_coefficients(out.values, cfg);
  out.h_b = co.value;
  out.gamma = co.gamma;
  out.gamma_b = co.gamma_b;

  const int n = belief.size();
  out.grads = Mat::Zero(belief.state_dim(), n);
  double tr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double gi = out.gamma(i);
    if (gi == 0.0) continue;  // zero coefficient contributes nothing
    const Vec x = belief.states().col(i);
    out.grads.col(i) = gi * barrier.gradient(x);
    const Mat hess = barrier.hessian(x);
    const Vec sdiag = model.diffusion_diag(x);
    double q = 0.0;
    for (int k = 0; k < sdiag.size(); ++k) q += sdiag(k) * sdiag(k) * hess(k, k);
    tr += gi * q;
  }
  out.trace_term = 0.5 * tr;
  return out;
}

FdCheckResult finite_difference_check(const BeliefState& belief, const StateBarrier& barrier,
                                      const RiskConfig& cfg, double eps) {
  FdCheckResult res;
  const Vec vals = barrier_values(belief, barrier);

  // Sort coefficients are frozen between ties; refuse configurations where a
  // perturbation could cross ranks.
  Vec sorted = vals;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  for (int i = 1; i < sorted.size(); ++i) {
    if (sorted(i) - sorted(i - 1) < 10.0 * eps) {
      res.tie_detected = true;
      return res;
    }
  }

  const CvarBoundCoefficients co = cvar_lower_bound_coefficients(vals, cfg);
  const int n = belief.size();
  const int d = belief.state_dim();
  Mat states = belief.states();
  for (int i = 0; i < n; ++i) {
    const Vec analytic = co.gamma(i) * barrier.gradient(states.col(i));
    for (int k = 0; k < d; ++k) {
      const double orig = states(k, i);
      states(k, i) = orig + eps;
      Vec vp = vals;
      vp(i) = barrier.value(states.col(i));
      const double hp = cvar_lower_bound(vp, cfg);
      states(k, i) = orig - eps;
      vp(i) = barrier.value(states.col(i));
      const double hm = cvar_lower_bound(vp, cfg);
      states(k, i) = orig;

      const double fd = (hp - hm) / (2.0 * eps);
      const double denom = std::max(std::abs(fd), std::abs(analytic(k)));
      if (denom < 1e-12) continue;
      res.max_rel_error = std::max(res.max_rel_error, std::abs(fd - analytic(k)) / denom);
    }
  }
  return res;
}

}  // namespace riskfilter
