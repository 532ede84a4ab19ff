#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "riskfilter/errors.hpp"
#include "riskfilter/models.hpp"
#include "riskfilter/rng.hpp"

using namespace riskfilter;

namespace {

Vec make_state(std::initializer_list<double> v) {
  Vec x(static_cast<int>(v.size()));
  int i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

}  // namespace

TEST_CASE("integrator1d is a driftless controlled scalar") {
  Integrator1D m;
  CHECK(m.state_dim() == 1);
  CHECK(m.input_dim() == 1);
  CHECK(m.noise_dim() == 1);

  const Vec x = make_state({1.7});
  CHECK(m.drift(x)(0) == 0.0);
  CHECK(m.input_matrix(x)(0, 0) == 1.0);
  CHECK(m.diffusion_diag(x)(0) == doctest::Approx(0.1));

  Integrator1D wide(0.5);
  CHECK(wide.diffusion_diag(x)(0) == doctest::Approx(0.5));
}

TEST_CASE("unicycle input matrix follows the heading") {
  UnicycleModel m;
  CHECK(m.state_dim() == 3);
  CHECK(m.input_dim() == 2);

  const Vec sd = UnicycleModel::default_sigma();
  CHECK(sd.size() == 3);
  CHECK(sd(0) == doctest::Approx(0.3));
  CHECK(sd(1) == doctest::Approx(0.3));
  CHECK(sd(2) == doctest::Approx(0.1));

  SplitMix64 g(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double phi = (uniform01(g) - 0.5) * 8.0;
    const Vec x = make_state({uniform01(g), uniform01(g), phi});
    CHECK(m.drift(x).norm() == 0.0);
    const Mat gm = m.input_matrix(x);
    REQUIRE(gm.rows() == 3);
    REQUIRE(gm.cols() == 2);
    CHECK(gm(0, 0) == doctest::Approx(std::cos(phi)));
    CHECK(gm(1, 0) == doctest::Approx(std::sin(phi)));
    CHECK(gm(2, 0) == 0.0);
    CHECK(gm(0, 1) == 0.0);
    CHECK(gm(1, 1) == 0.0);
    CHECK(gm(2, 1) == 1.0);
    // forward column is unit speed regardless of heading
    CHECK(gm.col(0).norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("omni input matrix rotates body velocities into the world frame") {
  OmniModel m;
  CHECK(m.input_dim() == 3);

  SplitMix64 g(4);
  for (int trial = 0; trial < 20; ++trial) {
    const double phi = (uniform01(g) - 0.5) * 8.0;
    const Vec x = make_state({0.0, 0.0, phi});
    const Mat gm = m.input_matrix(x);
    const Mat r = gm.topLeftCorner(2, 2);
    CHECK((r.transpose() * r - Mat::Identity(2, 2)).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r(0, 0) == doctest::Approx(std::cos(phi)));
    CHECK(r(1, 0) == doctest::Approx(std::sin(phi)));
    CHECK(gm(2, 2) == 1.0);
    CHECK(gm(2, 0) == 0.0);
    CHECK(gm(2, 1) == 0.0);
  }
}

TEST_CASE("range beacon observation predicts the distance") {
  RangeBeaconObservation obs(Eigen::Vector2d(3.0, 4.0), 0.3, 1.0);
  CHECK(obs.obs_dim() == 1);
  CHECK(obs.rate_hz() == doctest::Approx(1.0));

  const Vec origin = make_state({0.0, 0.0, 0.5});
  CHECK(obs.predict(origin)(0) == doctest::Approx(5.0));

  // heading must not matter
  const Vec turned = make_state({0.0, 0.0, -2.0});
  CHECK(obs.predict(turned)(0) == doctest::Approx(5.0));
}

TEST_CASE("range beacon likelihood is the Gaussian density of the residual") {
  const double sigma = 0.3;
  RangeBeaconObservation obs(Eigen::Vector2d(0.0, 0.0), sigma, 2.0);
  const Vec x = make_state({1.0, 0.0, 0.0});
  Vec z(1);

  z(0) = 1.0;  // zero residual: peak density 1/(sigma sqrt(2 pi))
  CHECK(obs.likelihood(z, x) == doctest::Approx(1.0 / (sigma * std::sqrt(2.0 * M_PI))));

  z(0) = 1.0 + sigma;  // one-sigma residual
  CHECK(obs.likelihood(z, x) ==
        doctest::Approx(std::exp(-0.5) / (sigma * std::sqrt(2.0 * M_PI))));

  z(0) = 50.0;
  CHECK(obs.likelihood(z, x) < 1e-300);
}

TEST_CASE("range beacon samples center on the prediction") {
  RangeBeaconObservation obs(Eigen::Vector2d(0.0, 0.0), 0.3, 1.0);
  const Vec x = make_state({2.0, 0.0, 0.0});

  SplitMix64 g1(77), g2(77);
  const Vec a = obs.sample(x, g1);
  const Vec b = obs.sample(x, g2);
  CHECK(a(0) == b(0));

  SplitMix64 g(8);
  double sum = 0.0, sum2 = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double z = obs.sample(x, g)(0);
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(mean == doctest::Approx(2.0).epsilon(0.01));
  CHECK(sd == doctest::Approx(0.3).epsilon(0.05));
}
