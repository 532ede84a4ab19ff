#pragma once

#include <Eigen/Dense>
#include <vector>

namespace riskfilter {

using Vec = Eigen::VectorXd;

// Risk level, confidence, and the a.s. support lower bound for barrier samples.
struct RiskConfig {
  double alpha = 0.2;   // tail mass, (0, 1]
  double delta = 0.05;  // bound failure probability, (0, 0.5]
  double b_min = -1.0;  // Pr[sample >= b_min] = 1 by assumption

  void validate() const;
};

// Samples sorted descending with the permutation back to original indices.
// Ties keep original order.
struct SortedTail {
  Vec values;
  std::vector<int> perm;  // values(k) == samples(perm[k])
};

SortedTail sorted_tail(const Vec& samples);

// Lower-tail value-at-risk: smallest sample t with count(samples <= t)/N >= alpha.
double empirical_var(const Vec& samples, double alpha);

// Mean of the samples at or below the empirical VaR.
double empirical_cvar(const Vec& samples, double alpha);

// Concentration term kappa = sqrt(ln(1/delta) / (2N)).
double concentration_kappa(int n, double delta);

// One coefficient per sample plus the mass assigned to b_min. The bound equals
// gamma . samples + gamma_b * b_min; coefficients are a convex combination.
struct CvarBoundCoefficients {
  Vec gamma;
  double gamma_b = 0.0;
  double value = 0.0;
  double kappa = 0.0;
};

// Distribution-free high-confidence lower bound on CVaR_alpha from equally
// weighted samples; holds with probability >= 1 - delta. Throws
// SupportViolation if any sample is below cfg.b_min.
double cvar_lower_bound(const Vec& samples, const RiskConfig& cfg);

CvarBoundCoefficients cvar_lower_bound_coefficients(const Vec& samples, const RiskConfig& cfg);

// Closed-form lower-tail CVaR of a normal distribution; alpha = 1 gives mu, and
// sigma = 0 degenerates to mu.
double gaussian_cvar(double mu, double sigma, double alpha);

namespace detail {
// Same bound with kappa supplied directly (test hook: kappa = 0 removes the
// concentration correction entirely).
CvarBoundCoefficients cvar_bound_with_kappa(const Vec& samples, double alpha, double kappa,
                                            double b_min);
}  // namespace detail

}  // namespace riskfilter
