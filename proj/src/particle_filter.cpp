#include "riskfilter/particle_filter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>
#include <vector>

#include "riskfilter/errors.hpp"

namespace riskfilter {

namespace {
constexpr double kUniformTol = 1e-12;

bool weights_uniform(const Vec& w) {
  const double u = 1.0 / static_cast<double>(w.size());
  return (w.array() - u).abs().maxCoeff() <= kUniformTol;
}
}  // namespace

BeliefState::BeliefState(Mat states, Vec weights, double time)
    : states_(std::move(states)), weights_(std::move(weights)), time_(time) {
  if (states_.cols() == 0) throw ContractViolation("BeliefState: empty particle set");
  if (weights_.size() != states_.cols()) {
    throw ContractViolation("BeliefState: weight count does not match particle count");
  }
  if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
    throw ContractViolation("BeliefState: weights must be finite and non-negative");
  }
  const double sum = weights_.sum();
  if (sum <= 0.0) throw ContractViolation("BeliefState: weights sum to zero");
  weights_ /= sum;
  uniform_weights_ = weights_uniform(weights_);
}

BeliefState BeliefState::uniform(Mat states, double time) {
  const auto n = states.cols();
  return BeliefState(std::move(states), Vec::Constant(n, 1.0 / static_cast<double>(n)), time);
}

Vec em_propagate_state(const ProcessModel& model, const Vec& x, const Vec& u, double dt,
                       double dt_sde, SplitMix64& g) {
  if (dt < 0.0 || dt_sde <= 0.0) throw ContractViolation("em_propagate_state: bad time step");
  const int nsub = std::max(1, static_cast<int>(std::ceil(dt / dt_sde - 1e-9)));
  const int q = model.noise_dim();
  Vec xi = x;
  double remaining = dt;
  for (int k = 0; k < nsub; ++k) {
    const double h = (k + 1 == nsub) ? remaining : dt_sde;
    remaining -= h;
    const double sq = std::sqrt(h);
    Vec step = (model.drift(xi) + model.input_matrix(xi) * u) * h;
    const Vec sdiag = model.diffusion_diag(xi);
    for (int j = 0; j < q; ++j) step(j) += sdiag(j) * sq * normal01(g);
    xi += step;
  }
  return xi;
}

BeliefState propagate(const BeliefState& belief, const Vec& u, double dt,
                      const ProcessModel& model, const PFConfig& cfg, RngStream& rng) {
  if (belief.state_dim() != model.state_dim()) {
    throw ContractViolation("propagate: belief/model state dimension mismatch");
  }
  if (u.size() != model.input_dim()) {
    throw ContractViolation("propagate: input dimension mismatch");
  }
  const int n = belief.size();
  Mat next(belief.state_dim(), n);
  std::atomic<int> diverged{-1};

  auto worker = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      SplitMix64 g = rng.substream(static_cast<std::uint64_t>(i));
      Vec xi = em_propagate_state(model, belief.states().col(i), u, dt, cfg.dt_sde, g);
      if (!xi.allFinite()) {
        diverged.store(i);  // any diverged index is good enough to report
        return;
      }
      next.col(i) = xi;
    }
  };

  const int nthreads = std::clamp(cfg.threads, 1, std::max(1, n));
  if (nthreads == 1) {
    worker(0, n);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  rng.bump_epoch();

  const int bad = diverged.load();
  if (bad >= 0) {
    throw PropagationDiverged("propagate: non-finite state for particle " +
                              std::to_string(bad), bad);
  }
  return BeliefState(std::move(next), belief.weights(), belief.time() + dt);
}

std::vector<int> systematic_resample_indices(const Vec& weights, double offset01) {
  const int n = static_cast<int>(weights.size());
  if (offset01 < 0.0 || offset01 >= 1.0) {
    throw ContractViolation("systematic_resample_indices: offset must be in [0,1)");
  }
  std::vector<int> idx(n);
  double cum = weights(0);
  int j = 0;
  for (int k = 0; k < n; ++k) {
    const double pos = (static_cast<double>(k) + offset01) / static_cast<double>(n);
    // advance past exhausted bins; >= so a position exactly on a cumulative
    // boundary selects the next particle (zero-weight prefixes are never drawn)
    while (pos >= cum && j + 1 < n) cum += weights(++j);
    idx[k] = j;
  }
  return idx;
}

BeliefState measurement_update(const BeliefState& belief, const Vec& z,
                               const ObservationModel& obs, RngStream& rng) {
  const int n = belief.size();
  Vec w(n);
  for (int i = 0; i < n; ++i) {
    w(i) = belief.weights()(i) * obs.likelihood(z, belief.states().col(i));
  }
  const double sum = w.sum();
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw DegenerateUpdate("measurement_update: all likelihoods vanished");
  }
  w /= sum;

  const auto idx = systematic_resample_indices(w, uniform01(rng.sequential()));
  Mat next(belief.state_dim(), n);
  for (int k = 0; k < n; ++k) next.col(k) = belief.states().col(idx[k]);
  return BeliefState::uniform(std::move(next), belief.time());
}

Vec mean_state(const BeliefState& belief) { return belief.states() * belief.weights(); }

Particle most_likely_particle(const BeliefState& belief, const std::optional<Vec>& last_z,
                              const ObservationModel& obs) {
  if (!last_z.has_value()) {
    throw ContractViolation(
        "most_likely_particle: no observation yet; fall back to mean_state");
  }
  int best = 0;
  double best_l = -1.0;
  for (int i = 0; i < belief.size(); ++i) {
    const double l = obs.likelihood(*last_z, belief.states().col(i));
    if (l > best_l) {
      best_l = l;
      best = i;
    }
  }
  return belief.particle(best);
}

double effective_sample_size(const BeliefState& belief) {
  return 1.0 / belief.weights().squaredNorm();
}

void belief_to_csv(const BeliefState& belief, std::ostream& out) {
  char buf[64];
  out << "t,i";
  for (int d = 0; d < belief.state_dim(); ++d) out << ",x_" << d;
  out << ",w\n";
  for (int i = 0; i < belief.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", belief.time());
    out << buf << ',' << i;
    for (int d = 0; d < belief.state_dim(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", belief.states()(d, i));
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", belief.weights()(i));
    out << ',' << buf << '\n';
  }
}

}  // namespace riskfilter
