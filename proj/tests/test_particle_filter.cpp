#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "riskfilter/errors.hpp"
#include "riskfilter/particle_filter.hpp"

using namespace riskfilter;

namespace {

Vec scalar(double v) {
  Vec x(1);
  x(0) = v;
  return x;
}

BeliefState gaussian_cloud(int n, double mu, double sd, std::uint64_t seed, double t = 0.0) {
  SplitMix64 g(seed);
  Mat states(1, n);
  for (int i = 0; i < n; ++i) states(0, i) = mu + sd * normal01(g);
  return BeliefState::uniform(states, t);
}

// Blows up immediately: drift overflow forces non-finite states.
class ExplodingModel final : public ProcessModel {
public:
  int state_dim() const override { return 1; }
  int input_dim() const override { return 1; }
  int noise_dim() const override { return 1; }
  std::string name() const override { return "exploding"; }
  Vec drift(const Vec&) const override {
    return scalar(std::numeric_limits<double>::infinity());
  }
  Mat input_matrix(const Vec&) const override { return Mat::Identity(1, 1); }
  Vec diffusion_diag(const Vec&) const override { return scalar(1.0); }
};

}  // namespace

TEST_CASE("belief state normalizes weights and tracks uniformity") {
  Mat states(1, 4);
  states << 1.0, 2.0, 3.0, 4.0;
  Vec w(4);
  w << 2.0, 2.0, 2.0, 2.0;
  BeliefState b(states, w, 0.5);
  CHECK(b.size() == 4);
  CHECK(b.state_dim() == 1);
  CHECK(b.weights()(0) == doctest::Approx(0.25));
  CHECK(b.uniform_weights());
  CHECK(b.time() == 0.5);

  Vec skew(4);
  skew << 1.0, 1.0, 1.0, 5.0;
  BeliefState s(states, skew, 0.0);
  CHECK_FALSE(s.uniform_weights());
  CHECK(s.weights().sum() == doctest::Approx(1.0));
}

TEST_CASE("noise-free propagation is an exact shift") {
  Integrator1D quiet(0.0);
  PFConfig cfg;
  cfg.dt_sde = 0.01;
  RngStream rng(5);

  BeliefState b = gaussian_cloud(50, 1.0, 0.2, 9);
  const Mat before = b.states();
  // dt is not a multiple of dt_sde: the last substep must be truncated
  BeliefState after = propagate(b, scalar(2.0), 0.025, quiet, cfg, rng);
  for (int i = 0; i < after.size(); ++i)
    CHECK(after.states()(0, i) == doctest::Approx(before(0, i) + 2.0 * 0.025).epsilon(1e-12));
  CHECK(after.time() == doctest::Approx(0.025));
}

TEST_CASE("brownian motion accumulates the right variance") {
  Integrator1D m(0.5);
  PFConfig cfg;
  cfg.dt_sde = 0.01;
  RngStream rng(6);

  const int n = 20000;
  BeliefState b = gaussian_cloud(n, 0.0, 0.0, 10);
  b = propagate(b, scalar(0.0), 1.0, m, cfg, rng);

  double mean = 0.0, var = 0.0;
  for (int i = 0; i < n; ++i) mean += b.states()(0, i);
  mean /= n;
  for (int i = 0; i < n; ++i) var += std::pow(b.states()(0, i) - mean, 2);
  var /= n - 1;
  // Var[x_T] = sigma^2 T = 0.25
  CHECK(mean == doctest::Approx(0.0).epsilon(0.02));
  CHECK(var == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("parallel propagation is bit-identical to serial") {
  UnicycleModel m;
  Mat states(3, 257);
  SplitMix64 g(12);
  for (int i = 0; i < 257; ++i)
    for (int r = 0; r < 3; ++r) states(r, i) = normal01(g);
  BeliefState b = BeliefState::uniform(states, 0.0);

  Vec u(2);
  u << 0.7, 0.3;

  PFConfig serial;
  serial.threads = 1;
  RngStream rng1(33);
  BeliefState out1 = propagate(b, u, 0.05, m, serial, rng1);

  PFConfig wide;
  wide.threads = 4;
  RngStream rng2(33);
  BeliefState out2 = propagate(b, u, 0.05, m, wide, rng2);

  CHECK((out1.states() - out2.states()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("propagation reports diverged particles") {
  ExplodingModel boom;
  PFConfig cfg;
  RngStream rng(7);
  BeliefState b = gaussian_cloud(3, 0.0, 0.1, 11);
  CHECK_THROWS_AS(propagate(b, scalar(0.0), 0.02, boom, cfg, rng), PropagationDiverged);
}

TEST_CASE("systematic resampling is identity on uniform weights") {
  Vec w = Vec::Constant(8, 1.0 / 8.0);
  for (double off : {0.0, 0.3, 0.97}) {
    const auto idx = systematic_resample_indices(w, off);
    REQUIRE(idx.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(idx[i] == i);
  }
}

TEST_CASE("systematic resampling frozen small case") {
  Vec w(3);
  w << 0.5, 0.25, 0.25;
  // positions (i + 0.1)/3 = 0.0333, 0.3667, 0.7 against cdf 0.5, 0.75, 1.0
  const auto idx = systematic_resample_indices(w, 0.1);
  REQUIRE(idx.size() == 3);
  CHECK(idx[0] == 0);
  CHECK(idx[1] == 0);
  CHECK(idx[2] == 1);
}

TEST_CASE("systematic resampling counts are proportional to weights") {
  const int n = 100;
  Vec w = Vec::Constant(n, 0.25 / (n - 1));
  w(17) = 0.75;
  const auto idx = systematic_resample_indices(w, 0.4);
  int hits = 0;
  for (int i : idx) hits += (i == 17);
  // expected n * 0.75 = 75 draws, systematic keeps it within one
  CHECK(hits >= 74);
  CHECK(hits <= 76);
}

TEST_CASE("measurement update concentrates on likely particles") {
  RangeBeaconObservation obs(Eigen::Vector2d(0.0, 0.0), 0.5, 1.0);
  // two clusters at range 1 and range 3; observe range 1
  const int n = 400;
  Mat states(3, n);
  for (int i = 0; i < n; ++i) {
    const double r = (i < n / 2) ? 1.0 : 3.0;
    states.col(i) << r, 0.0, 0.0;
  }
  BeliefState b = BeliefState::uniform(states, 0.0);
  Vec z(1);
  z << 1.0;
  RngStream rng(44);
  BeliefState post = measurement_update(b, z, obs, rng);

  CHECK(post.size() == n);
  CHECK(post.uniform_weights());
  int near = 0;
  for (int i = 0; i < n; ++i) near += (post.states()(0, i) < 2.0);
  // likelihood ratio exp(-0.5*(2/0.5)^2) makes the far cluster vanish
  CHECK(near > 395);
}

TEST_CASE("degenerate updates are reported, not silently absorbed") {
  RangeBeaconObservation obs(Eigen::Vector2d(0.0, 0.0), 0.01, 1.0);
  Mat states(3, 5);
  for (int i = 0; i < 5; ++i) states.col(i) << 1.0, 0.0, 0.0;
  BeliefState b = BeliefState::uniform(states, 0.0);
  Vec z(1);
  z << 500.0;  // impossible range for sigma 0.01
  RngStream rng(45);
  CHECK_THROWS_AS(measurement_update(b, z, obs, rng), DegenerateUpdate);
}

TEST_CASE("mean state and effective sample size") {
  Mat states(2, 2);
  states << 1.0, 3.0, 2.0, 6.0;
  Vec w(2);
  w << 0.75, 0.25;
  BeliefState b(states, w, 0.0);
  const Vec mu = mean_state(b);
  CHECK(mu(0) == doctest::Approx(1.5));
  CHECK(mu(1) == doctest::Approx(3.0));
  // ess = 1/sum(w^2) = 1/(0.5625+0.0625) = 1.6
  CHECK(effective_sample_size(b) == doctest::Approx(1.6));

  BeliefState u = BeliefState::uniform(states, 0.0);
  CHECK(effective_sample_size(u) == doctest::Approx(2.0));
}

TEST_CASE("most likely particle needs an observation") {
  RangeBeaconObservation obs(Eigen::Vector2d(0.0, 0.0), 0.5, 1.0);
  Mat states(3, 3);
  states.col(0) << 1.0, 0.0, 0.0;
  states.col(1) << 2.0, 0.0, 0.0;
  states.col(2) << 3.0, 0.0, 0.0;
  BeliefState b = BeliefState::uniform(states, 0.0);

  Vec z(1);
  z << 2.1;
  const Particle p = most_likely_particle(b, z, obs);
  CHECK(p.x(0) == doctest::Approx(2.0));

  CHECK_THROWS_AS(most_likely_particle(b, std::nullopt, obs), ContractViolation);
}

TEST_CASE("particle filter tracks the kalman posterior for linear dynamics") {
  // dx = u dt + sigma dW with u = 0.8: posterior stays Gaussian with
  // mean mu0 + u t and variance sigma0^2 + sigma^2 t.
  Integrator1D m(0.3);
  PFConfig cfg;
  cfg.dt_sde = 0.01;
  RngStream rng(77);

  const int n = 20000;
  BeliefState b = gaussian_cloud(n, 1.0, 0.5, 13);
  const Vec u = scalar(0.8);
  for (int k = 0; k < 10; ++k) b = propagate(b, u, 0.1, m, cfg, rng);

  const double mu = mean_state(b)(0);
  double var = 0.0;
  for (int i = 0; i < n; ++i) var += std::pow(b.states()(0, i) - mu, 2);
  var /= n - 1;

  CHECK(mu == doctest::Approx(1.0 + 0.8).epsilon(0.01));
  CHECK(var == doctest::Approx(0.25 + 0.09).epsilon(0.05));
  CHECK(b.time() == doctest::Approx(1.0));
}

TEST_CASE("belief csv snapshot is deterministic and well formed") {
  BeliefState b = gaussian_cloud(4, 0.5, 0.1, 14, 1.25);
  std::ostringstream s1, s2;
  belief_to_csv(b, s1);
  belief_to_csv(b, s2);
  CHECK(s1.str() == s2.str());

  std::istringstream in(s1.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,i,x_0,w");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
    CHECK(line.rfind("1.25,", 0) == 0);
  }
  CHECK(rows == 4);
}
