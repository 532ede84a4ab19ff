#include "riskfilter/models.hpp"

#include <cmath>

#include "riskfilter/errors.hpp"

namespace riskfilter {

namespace {
void check_dim(const Vec& x, int n, const char* who) {
  if (x.size() != n) {
    throw ContractViolation(std::string(who) + ": state has size " +
                            std::to_string(x.size()) + ", expected " + std::to_string(n));
  }
}
}  // namespace

Vec Integrator1D::drift(const Vec& x) const {
  check_dim(x, 1, "Integrator1D");
  return Vec::Zero(1);
}

Mat Integrator1D::input_matrix(const Vec& x) const {
  check_dim(x, 1, "Integrator1D");
  return Mat::Identity(1, 1);
}

Vec Integrator1D::diffusion_diag(const Vec& x) const {
  check_dim(x, 1, "Integrator1D");
  return Vec::Constant(1, sigma_);
}

UnicycleModel::UnicycleModel(Vec sigma_diag) : sigma_diag_(std::move(sigma_diag)) {
  if (sigma_diag_.size() != 3) {
    throw ContractViolation("UnicycleModel: sigma_diag must have size 3");
  }
}

Vec UnicycleModel::default_sigma() {
  Vec s(3);
  s << 0.3, 0.3, 0.1;
  return s;
}

Vec UnicycleModel::drift(const Vec& x) const {
  check_dim(x, 3, "UnicycleModel");
  return Vec::Zero(3);
}

Mat UnicycleModel::input_matrix(const Vec& x) const {
  check_dim(x, 3, "UnicycleModel");
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  Mat g(3, 2);
  g << c, 0.0,
       s, 0.0,
       0.0, 1.0;
  return g;
}

Vec UnicycleModel::diffusion_diag(const Vec& x) const {
  check_dim(x, 3, "UnicycleModel");
  return sigma_diag_;
}

OmniModel::OmniModel(Vec sigma_diag) : sigma_diag_(std::move(sigma_diag)) {
  if (sigma_diag_.size() != 3) {
    throw ContractViolation("OmniModel: sigma_diag must have size 3");
  }
}

Vec OmniModel::drift(const Vec& x) const {
  check_dim(x, 3, "OmniModel");
  return Vec::Zero(3);
}

Mat OmniModel::input_matrix(const Vec& x) const {
  check_dim(x, 3, "OmniModel");
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  Mat g(3, 3);
  g << c, -s, 0.0,
       s,  c, 0.0,
       0.0, 0.0, 1.0;
  return g;
}

Vec OmniModel::diffusion_diag(const Vec& x) const {
  check_dim(x, 3, "OmniModel");
  return sigma_diag_;
}

RangeBeaconObservation::RangeBeaconObservation(Eigen::Vector2d beacon, double noise_std,
                                               double rate_hz)
    : beacon_(std::move(beacon)), noise_std_(noise_std), rate_hz_(rate_hz) {
  if (noise_std_ < 0.0) throw ContractViolation("RangeBeaconObservation: noise_std < 0");
  if (rate_hz_ <= 0.0) throw ContractViolation("RangeBeaconObservation: rate_hz <= 0");
}

Vec RangeBeaconObservation::predict(const Vec& x) const {
  if (x.size() < 2) throw ContractViolation("RangeBeaconObservation: state has no position block");
  return Vec::Constant(1, (x.head<2>() - beacon_).norm());
}

double RangeBeaconObservation::likelihood(const Vec& z, const Vec& x) const {
  if (z.size() != 1) throw ContractViolation("RangeBeaconObservation: observation must be scalar");
  if (noise_std_ <= 0.0) {
    throw ContractViolation("RangeBeaconObservation: likelihood undefined for noise_std == 0");
  }
  const double innov = z(0) - predict(x)(0);
  const double u = innov / noise_std_;
  return std::exp(-0.5 * u * u) / (noise_std_ * std::sqrt(2.0 * M_PI));
}

Vec RangeBeaconObservation::sample(const Vec& x, SplitMix64& g) const {
  // Written as predict + std * n01 so a zero-noise model degrades gracefully.
  return Vec::Constant(1, predict(x)(0) + noise_std_ * normal01(g));
}

}  // namespace riskfilter
