#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "riskfilter/rng.hpp"

namespace riskfilter {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Control-affine SDE: dx = (f(x) + g(x) u) dt + sigma(x) dW.
class ProcessModel {
public:
  virtual ~ProcessModel() = default;

  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual int noise_dim() const = 0;
  virtual std::string name() const = 0;

  virtual Vec drift(const Vec& x) const = 0;
  virtual Mat input_matrix(const Vec& x) const = 0;
  // Diagonal diffusion; returns the diagonal entries (length noise_dim()).
  virtual Vec diffusion_diag(const Vec& x) const = 0;

  Mat diffusion(const Vec& x) const {
    Mat s = Mat::Zero(state_dim(), noise_dim());
    s.diagonal() = diffusion_diag(x);
    return s;
  }
};

// Discrete-time observation z = observe(x) + noise at a fixed rate.
class ObservationModel {
public:
  virtual ~ObservationModel() = default;

  virtual int obs_dim() const = 0;
  virtual double rate_hz() const = 0;
  virtual std::string name() const = 0;

  virtual Vec predict(const Vec& x) const = 0;
  virtual double likelihood(const Vec& z, const Vec& x) const = 0;
  virtual Vec sample(const Vec& x, SplitMix64& g) const = 0;
};

// dx = u dt + sigma dW, scalar. Default sigma matches the quadrotor-altitude example.
class Integrator1D final : public ProcessModel {
public:
  explicit Integrator1D(double sigma = 0.1) : sigma_(sigma) {}

  int state_dim() const override { return 1; }
  int input_dim() const override { return 1; }
  int noise_dim() const override { return 1; }
  std::string name() const override { return "integrator1d"; }

  Vec drift(const Vec& x) const override;
  Mat input_matrix(const Vec& x) const override;
  Vec diffusion_diag(const Vec& x) const override;

private:
  double sigma_;
};

// Unicycle: state [px, py, phi], input [v, omega].
class UnicycleModel final : public ProcessModel {
public:
  explicit UnicycleModel(Vec sigma_diag = default_sigma());

  static Vec default_sigma();

  int state_dim() const override { return 3; }
  int input_dim() const override { return 2; }
  int noise_dim() const override { return 3; }
  std::string name() const override { return "unicycle"; }

  Vec drift(const Vec& x) const override;
  Mat input_matrix(const Vec& x) const override;
  Vec diffusion_diag(const Vec& x) const override;

private:
  Vec sigma_diag_;
};

// Omni-directional base: state [px, py, phi], input [vx, vy, omega] in the body
// frame; g(x) rotates the planar velocity into the world frame.
class OmniModel final : public ProcessModel {
public:
  explicit OmniModel(Vec sigma_diag = UnicycleModel::default_sigma());

  int state_dim() const override { return 3; }
  int input_dim() const override { return 3; }
  int noise_dim() const override { return 3; }
  std::string name() const override { return "omni"; }

  Vec drift(const Vec& x) const override;
  Mat input_matrix(const Vec& x) const override;
  Vec diffusion_diag(const Vec& x) const override;

private:
  Vec sigma_diag_;
};

// Range to a fixed beacon with additive Gaussian noise.
class RangeBeaconObservation final : public ObservationModel {
public:
  RangeBeaconObservation(Eigen::Vector2d beacon = Eigen::Vector2d(4.0, 4.0),
                         double noise_std = 0.3, double rate_hz = 1.0);

  int obs_dim() const override { return 1; }
  double rate_hz() const override { return rate_hz_; }
  std::string name() const override { return "range_beacon"; }

  Vec predict(const Vec& x) const override;
  double likelihood(const Vec& z, const Vec& x) const override;
  Vec sample(const Vec& x, SplitMix64& g) const override;

  const Eigen::Vector2d& beacon() const { return beacon_; }
  double noise_std() const { return noise_std_; }

private:
  Eigen::Vector2d beacon_;
  double noise_std_;
  double rate_hz_;
};

}  // namespace riskfilter
