#include "riskfilter/risk.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>

#include "riskfilter/errors.hpp"

namespace riskfilter {

namespace {
void check_samples(const Vec& samples) {
  if (samples.size() == 0) throw ContractViolation("risk: empty sample set");
  if (!samples.allFinite()) throw ContractViolation("risk: non-finite sample");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) throw ContractViolation("risk: alpha must be in (0, 1]");
}
}  // namespace

void RiskConfig::validate() const {
  check_alpha(alpha);
  if (!(delta > 0.0) || delta > 0.5) throw ContractViolation("risk: delta must be in (0, 0.5]");
  if (!std::isfinite(b_min)) throw ContractViolation("risk: b_min must be finite");
}

SortedTail sorted_tail(const Vec& samples) {
  check_samples(samples);
  const int n = static_cast<int>(samples.size());
  SortedTail out;
  out.perm.resize(n);
  std::iota(out.perm.begin(), out.perm.end(), 0);
  std::stable_sort(out.perm.begin(), out.perm.end(),
                   [&](int a, int b) { return samples(a) > samples(b); });
  out.values.resize(n);
  for (int k = 0; k < n; ++k) out.values(k) = samples(out.perm[k]);
  return out;
}

double empirical_var(const Vec& samples, double alpha) {
  check_samples(samples);
  check_alpha(alpha);
  const int n = static_cast<int>(samples.size());
  std::vector<double> s(samples.data(), samples.data() + n);
  std::sort(s.begin(), s.end());
  // Smallest index k (1-based) with k/N >= alpha; epsilon guards e.g. 0.4*5.
  int k = static_cast<int>(std::ceil(alpha * n - 1e-9));
  k = std::clamp(k, 1, n);
  return s[k - 1];
}

double empirical_cvar(const Vec& samples, double alpha) {
  const double var = empirical_var(samples, alpha);
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < samples.size(); ++i) {
    if (samples(i) <= var) {
      sum += samples(i);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

double concentration_kappa(int n, double delta) {
  if (n <= 0) throw ContractViolation("risk: need at least one sample");
  return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

namespace detail {
CvarBoundCoefficients cvar_bound_with_kappa(const Vec& samples, double alpha, double kappa,
                                            double b_min) {
  check_samples(samples);
  check_alpha(alpha);
  const int n = static_cast<int>(samples.size());
  const double lo = samples.minCoeff();
  if (lo < b_min) {
    int idx = 0;
    samples.minCoeff(&idx);
    throw SupportViolation("cvar_lower_bound: sample " + std::to_string(idx) + " = " +
                               std::to_string(lo) + " below support bound b_min = " +
                               std::to_string(b_min),
                           idx, lo, b_min);
  }

  const SortedTail tail = sorted_tail(samples);
  CvarBoundCoefficients out;
  out.kappa = kappa;
  out.gamma = Vec::Zero(n);

  // Telescoped form of the order-statistic bound: rank i (descending) carries
  // (w_i - w_{i-1})/alpha with w_i = max(0, i/N - kappa - (1 - alpha)).
  double w_prev = 0.0;
  double acc = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double w =
        std::max(0.0, static_cast<double>(i) / n - kappa - (1.0 - alpha));
    const double gi = (w - w_prev) / alpha;
    out.gamma(tail.perm[i - 1]) = gi;
    acc += gi * tail.values(i - 1);
    w_prev = w;
  }
  out.gamma_b = 1.0 - w_prev / alpha;
  out.value = acc + out.gamma_b * b_min;
  return out;
}
}  // namespace detail

CvarBoundCoefficients cvar_lower_bound_coefficients(const Vec& samples, const RiskConfig& cfg) {
  cfg.validate();
  return detail::cvar_bound_with_kappa(
      samples, cfg.alpha, concentration_kappa(static_cast<int>(samples.size()), cfg.delta),
      cfg.b_min);
}

double cvar_lower_bound(const Vec& samples, const RiskConfig& cfg) {
  return cvar_lower_bound_coefficients(samples, cfg).value;
}

double gaussian_cvar(double mu, double sigma, double alpha) {
  check_alpha(alpha);
  if (sigma < 0.0) throw ContractViolation("gaussian_cvar: sigma < 0");
  if (sigma == 0.0 || alpha == 1.0) return mu;
  boost::math::normal_distribution<double> std_normal;
  const double q = boost::math::quantile(std_normal, alpha);
  return mu - sigma * boost::math::pdf(std_normal, q) / alpha;
}

}  // namespace riskfilter
