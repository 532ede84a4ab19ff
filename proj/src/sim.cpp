#include "riskfilter/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "riskfilter/errors.hpp"
#include "riskfilter/particle_filter.hpp"
#include "riskfilter/safety_filter.hpp"

namespace riskfilter {
namespace {

using nlohmann::json;

double wrap_angle(double a) { return std::remainder(a, 2.0 * M_PI); }

Vec sample_mixture(const InitialBeliefSpec& spec, SplitMix64& g) {
  double total = 0.0;
  for (double w : spec.weights) total += w;
  const double pick = uniform01(g) * total;
  std::size_t comp = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.weights.size(); ++i) {
    acc += spec.weights[i];
    if (pick <= acc) {
      comp = i;
      break;
    }
    comp = i;  // numerical slack: fall through to the last component
  }
  const Vec& mean = spec.means[comp];
  const Vec& std_dev = spec.stds[comp];
  Vec x(mean.size());
  for (Eigen::Index d = 0; d < mean.size(); ++d) x(d) = mean(d) + std_dev(d) * normal01(g);
  return x;
}

Vec reference_input(const ScenarioConfig& cfg, const BeliefState& belief) {
  if (cfg.reference.type == ReferenceSpec::Type::Constant) return cfg.reference.constant_u;
  const Vec m = mean_state(belief);
  const double dx = cfg.reference.goal(0) - m(0);
  const double dy = cfg.reference.goal(1) - m(1);
  const double gain = cfg.reference.gain;
  if (cfg.model == ModelKind::Unicycle) {
    Vec u(2);
    u(0) = gain * std::hypot(dx, dy);
    u(1) = gain * wrap_angle(std::atan2(dy, dx) - m(2));
    return u;
  }
  // omni: proportional planar velocity in the body frame, no heading preference
  const double c = std::cos(m(2));
  const double s = std::sin(m(2));
  Vec u(3);
  u(0) = gain * (c * dx + s * dy);
  u(1) = gain * (-s * dx + c * dy);
  u(2) = 0.0;
  return u;
}

// Exact Gaussian posterior for the scalar integrator with a halfspace barrier:
// the pushforward of N(mu, var) through h(x) = c - a x stays Gaussian, so the
// true CVaR has a closed form to compare the particle estimates against.
struct KfOracle {
  double mu = 0.0;
  double var = 0.0;
  double a = 1.0;
  double c = 0.0;
  double sigma_w = 0.0;

  double cvar(double alpha) const {
    return gaussian_cvar(c - a * mu, std::abs(a) * std::sqrt(std::max(0.0, var)), alpha);
  }
  void advance(double u, double dt) {
    mu += u * dt;
    var += sigma_w * sigma_w * dt;
  }
};

std::optional<BeliefBarrierTerms> soft_terms(const BeliefState& belief, const StateBarrier& barrier,
                                             const RiskConfig& risk, const ProcessModel& model) {
  try {
    return belief_barrier(belief, barrier, risk, model);
  } catch (const SupportViolation&) {
    return std::nullopt;
  }
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

json num_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, int rep, const RunOptions& options) {
  cfg.validate();
  const auto model = cfg.make_model();
  const auto barrier = cfg.make_barrier();
  const auto obs = cfg.make_observation();
  const RiskConfig risk = cfg.resolve_risk();
  const SafetyFilterConfig fcfg = cfg.make_filter_config(model->input_dim());
  // Stay-out disk for the Chebyshev-ball baseline, which inflates a circular
  // barrier even when the task barrier adds a lookahead.
  const CircularStayOutBarrier be_disk(cfg.obstacle_center, cfg.obstacle_radius);
  // Collision and clearance are measured against the plain obstacle geometry;
  // the lookahead barrier is a control device whose padding would overcount.
  const std::unique_ptr<StateBarrier> metric_barrier =
      cfg.barrier == BarrierKind::LookaheadStayOut
          ? std::make_unique<CircularStayOutBarrier>(cfg.obstacle_center, cfg.obstacle_radius)
          : nullptr;
  const StateBarrier& metric = metric_barrier ? *metric_barrier : *barrier;

  PFConfig pf;
  pf.dt_sde = cfg.dt_sde;

  RngStream rng_truth(mix64(mix64(cfg.seed, 0x74727574ull), static_cast<std::uint64_t>(rep)));
  RngStream rng_pf(mix64(mix64(cfg.seed, 0x62656c66ull), static_cast<std::uint64_t>(rep)));

  Vec x_true = cfg.true_from_belief ? sample_mixture(cfg.initial_belief, rng_truth.sequential())
                                    : cfg.true_initial;
  Mat states(model->state_dim(), cfg.particles);
  for (int i = 0; i < cfg.particles; ++i)
    states.col(i) = sample_mixture(cfg.initial_belief, rng_pf.sequential());
  BeliefState belief = BeliefState::uniform(std::move(states), 0.0);

  std::optional<KfOracle> kf;
  if (cfg.kf_oracle) {
    KfOracle o;
    o.mu = cfg.initial_belief.means[0](0);
    o.var = cfg.initial_belief.stds[0](0) * cfg.initial_belief.stds[0](0);
    o.a = cfg.halfspace_normal(0);
    o.c = cfg.halfspace_offset;
    o.sigma_w = cfg.sigma_diag.size() ? cfg.sigma_diag(0) : 0.1;
    kf = o;
  }

  const int steps = static_cast<int>(std::llround(cfg.horizon / cfg.control_period));
  const int meas_every =
      obs ? static_cast<int>(std::llround(1.0 / (cfg.obs_rate_hz * cfg.control_period))) : 0;

  RunResult out;
  out.scenario = cfg.name;
  out.variant = variant_name(cfg.variant);
  out.seed = cfg.seed;
  out.rep = rep;
  out.records.reserve(steps);

  std::optional<Vec> last_z;
  int safe_steps = 0;

  for (int k = 0; k < steps; ++k) {
    const double t = k * cfg.control_period;
    StepRecord rec;
    rec.t = t;

    try {
      double pre_update_h_b = nan();
      if (obs && k > 0 && k % meas_every == 0 && t < cfg.dropout_time - 1e-9) {
        if (auto terms = soft_terms(belief, *barrier, risk, *model)) pre_update_h_b = terms->h_b;
        const Vec z = obs->sample(x_true, rng_truth.sequential());
        try {
          belief = measurement_update(belief, z, *obs, rng_pf);
        } catch (const DegenerateUpdate&) {
          ++out.degenerate_updates;
          rec.jump_flag = true;  // kept the prior; flag the anomaly in the trace
        }
        last_z = z;
      }

      const Vec u_ref = reference_input(cfg, belief);
      SafetyFilterResult res;
      double h_b_now = nan();
      double cvar_hat = nan();
      const auto t0 = std::chrono::steady_clock::now();
      switch (cfg.variant) {
        case ControllerVariant::Ours: {
          const BeliefBarrierTerms terms = belief_barrier(belief, *barrier, risk, *model);
          res = filter_with_terms(terms, belief, *model, u_ref, fcfg);
          h_b_now = terms.h_b;
          cvar_hat = empirical_cvar(terms.values, risk.alpha);
          break;
        }
        case ControllerVariant::MuScbf:
          res = baseline_mu_scbf(belief, *barrier, *model, u_ref, fcfg);
          break;
        case ControllerVariant::MlScbf:
          res = baseline_ml_scbf(belief, last_z, *obs, *barrier, *model, u_ref, fcfg);
          break;
        case ControllerVariant::BeScbf:
          res = baseline_be_scbf(belief, be_disk, *model, u_ref, fcfg, cfg.eta);
          break;
        case ControllerVariant::None:
          res.u_star = clamp_to_box(u_ref, fcfg.box);
          res.feasible = true;
          break;
      }
      rec.t_c = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      if (cfg.variant != ControllerVariant::Ours) {
        if (auto terms = soft_terms(belief, *barrier, risk, *model)) {
          h_b_now = terms->h_b;
          cvar_hat = empirical_cvar(terms->values, risk.alpha);
        }
      }
      if (std::isfinite(pre_update_h_b) && std::isfinite(h_b_now) && pre_update_h_b >= 0.0 &&
          h_b_now < 0.0) {
        ++out.jump_violations;
        rec.jump_flag = true;
      }

      rec.x_true = x_true;
      rec.h_x_true = metric.value(x_true);
      rec.collision = rec.h_x_true < 0.0;
      rec.h_b = h_b_now;
      rec.cvar_hat = cvar_hat;
      if (kf) {
        rec.cvar_true = kf->cvar(risk.alpha);
        rec.e_hat = rec.cvar_true - rec.cvar_hat;
        rec.e_bar = rec.cvar_true - rec.h_b;
      }
      rec.u_ref = u_ref;
      rec.u_star = res.u_star;
      rec.feasible = res.feasible;

      if (!res.feasible) ++out.infeasible_steps;
      if (rec.collision) {
        out.collided = true;
        ++out.collision_steps;
      } else {
        ++safe_steps;
      }
      if (std::isfinite(rec.h_b)) out.min_h_b = std::min(out.min_h_b, rec.h_b);

      out.records.push_back(rec);
      if (options.on_step) options.on_step(rec, belief);

      x_true = em_propagate_state(*model, x_true, res.u_star, cfg.control_period, cfg.dt_sde,
                                  rng_truth.sequential());
      belief = propagate(belief, res.u_star, cfg.control_period, *model, pf, rng_pf);
      if (kf) kf->advance(res.u_star(0), cfg.control_period);
    } catch (const SupportViolation& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      break;
    } catch (const PropagationDiverged& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      break;
    }
  }

  if (!out.aborted) {
    out.final_h_x = metric.value(x_true);
    if (out.final_h_x < 0.0) out.collided = true;
    if (auto terms = soft_terms(belief, *barrier, risk, *model)) {
      out.final_h_b = terms->h_b;
      out.min_h_b = std::min(out.min_h_b, out.final_h_b);
    }
  }
  out.safe_fraction = out.records.empty() ? 0.0 : double(safe_steps) / double(out.records.size());
  if (options.keep_final_belief) out.final_belief = belief;
  return out;
}

void write_steps_csv(const RunResult& run, std::ostream& out) {
  if (run.records.empty()) return;
  const auto& first = run.records.front();
  out << "t";
  for (Eigen::Index i = 0; i < first.x_true.size(); ++i) out << ",x" << i;
  out << ",h_x_true,h_b,cvar_hat,cvar_true,e_hat,e_bar";
  for (Eigen::Index i = 0; i < first.u_ref.size(); ++i) out << ",u_ref" << i;
  for (Eigen::Index i = 0; i < first.u_star.size(); ++i) out << ",u" << i;
  out << ",feasible,collision,jump_flag,t_c_s\n";

  char buf[32];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    out << ',' << buf;
  };
  for (const auto& r : run.records) {
    std::snprintf(buf, sizeof(buf), "%.10g", r.t);
    out << buf;
    for (Eigen::Index i = 0; i < r.x_true.size(); ++i) put(r.x_true(i));
    put(r.h_x_true);
    put(r.h_b);
    put(r.cvar_hat);
    put(r.cvar_true);
    put(r.e_hat);
    put(r.e_bar);
    for (Eigen::Index i = 0; i < r.u_ref.size(); ++i) put(r.u_ref(i));
    for (Eigen::Index i = 0; i < r.u_star.size(); ++i) put(r.u_star(i));
    out << ',' << (r.feasible ? 1 : 0) << ',' << (r.collision ? 1 : 0) << ','
        << (r.jump_flag ? 1 : 0);
    put(r.t_c);
    out << '\n';
  }
}

std::string run_summary_json(const RunResult& run) {
  json j;
  j["scenario"] = run.scenario;
  j["variant"] = run.variant;
  j["seed"] = run.seed;
  j["rep"] = run.rep;
  j["steps"] = run.records.size();
  j["aborted"] = run.aborted;
  j["abort_reason"] = run.abort_reason;
  j["collided"] = run.collided;
  j["collision_steps"] = run.collision_steps;
  j["infeasible_steps"] = run.infeasible_steps;
  j["degenerate_updates"] = run.degenerate_updates;
  j["jump_violations"] = run.jump_violations;
  j["min_h_b"] = num_or_null(run.min_h_b);
  j["final_h_x"] = num_or_null(run.final_h_x);
  j["final_h_b"] = num_or_null(run.final_h_b);
  j["safe_fraction"] = run.safe_fraction;
  return j.dump(2);
}

void Accumulator::add(double v) {
  ++n;
  const double d = v - mean_;
  mean_ += d / double(n);
  m2_ += d * (v - mean_);
}

double Accumulator::mean() const { return n ? mean_ : nan(); }

double Accumulator::stddev() const { return n > 1 ? std::sqrt(m2_ / double(n - 1)) : 0.0; }

ConvergenceStudy convergence_study(const ScenarioConfig& cfg,
                                   const std::vector<int>& particle_counts, int reps,
                                   int threads) {
  ConvergenceStudy study;
  study.scenario = cfg.name;
  study.seed = cfg.seed;
  study.reps = reps;

  for (int n_particles : particle_counts) {
    std::vector<RunResult> runs(reps);
    parallel_for_index(reps, threads, [&](int r) {
      ScenarioConfig c = cfg;
      c.particles = n_particles;
      c.reps = reps;
      runs[r] = run_scenario(c, r);
    });

    ConvergenceRow row;
    row.particles = n_particles;
    Accumulator e_hat, e_bar, t_c;
    long long neg_hat = 0;
    long long neg_bar = 0;
    for (const auto& run : runs) {
      if (run.aborted) {
        ++row.aborted_reps;
        continue;
      }
      ++row.completed_reps;
      for (const auto& rec : run.records) {
        if (std::isfinite(rec.e_hat)) {
          e_hat.add(rec.e_hat);
          if (rec.e_hat < 0.0) ++neg_hat;
        }
        if (std::isfinite(rec.e_bar)) {
          e_bar.add(rec.e_bar);
          if (rec.e_bar < 0.0) ++neg_bar;
        }
        t_c.add(rec.t_c);
        ++row.steps;
      }
    }
    row.mean_e_hat = e_hat.mean();
    row.std_e_hat = e_hat.stddev();
    row.frac_e_hat_neg = e_hat.n ? double(neg_hat) / double(e_hat.n) : nan();
    row.mean_e_bar = e_bar.mean();
    row.std_e_bar = e_bar.stddev();
    row.frac_e_bar_neg = e_bar.n ? double(neg_bar) / double(e_bar.n) : nan();
    row.mean_t_c = t_c.mean();
    row.std_t_c = t_c.stddev();
    study.rows.push_back(row);
  }
  return study;
}

std::vector<ComparisonArm> default_comparison_arms() {
  return {
      {"mu_scbf", ControllerVariant::MuScbf, std::nullopt},
      {"ml_scbf", ControllerVariant::MlScbf, std::nullopt},
      {"be_scbf", ControllerVariant::BeScbf, std::nullopt},
      {"ours_a0.20", ControllerVariant::Ours, 0.20},
      {"ours_a0.05", ControllerVariant::Ours, 0.05},
  };
}

ComparisonStudy comparison_study(const ScenarioConfig& cfg, const std::vector<ComparisonArm>& arms,
                                 int reps, int threads) {
  ComparisonStudy study;
  study.scenario = cfg.name;
  study.seed = cfg.seed;

  for (const auto& arm : arms) {
    ScenarioConfig base = cfg;
    base.variant = arm.variant;
    if (arm.alpha) base.alpha = *arm.alpha;
    base.reps = reps;

    std::vector<RunResult> runs(reps);
    parallel_for_index(reps, threads, [&](int r) { runs[r] = run_scenario(base, r); });

    ComparisonRow row;
    row.label = arm.label;
    row.variant = variant_name(arm.variant);
    row.alpha = base.alpha;
    row.reps = reps;
    Accumulator clearance;
    double min_clear = std::numeric_limits<double>::infinity();
    for (const auto& run : runs) {
      if (run.aborted) ++row.aborted_runs;
      if (run.collided) ++row.collided_runs;
      row.collision_steps += run.collision_steps;
      row.infeasible_steps += run.infeasible_steps;
      for (const auto& rec : run.records) {
        clearance.add(rec.h_x_true);
        min_clear = std::min(min_clear, rec.h_x_true);
      }
      row.safe_fractions.push_back(run.safe_fraction);
    }
    row.mean_clearance = clearance.mean();
    row.std_clearance = clearance.stddev();
    row.min_clearance = min_clear;
    study.rows.push_back(row);
  }
  return study;
}

std::string to_json(const ConvergenceStudy& study) {
  json j;
  j["scenario"] = study.scenario;
  j["seed"] = study.seed;
  j["reps"] = study.reps;
  j["rows"] = json::array();
  for (const auto& r : study.rows) {
    json row;
    row["particles"] = r.particles;
    row["steps"] = r.steps;
    row["completed_reps"] = r.completed_reps;
    row["aborted_reps"] = r.aborted_reps;
    row["e_hat"] = {{"mean", num_or_null(r.mean_e_hat)},
                    {"std", num_or_null(r.std_e_hat)},
                    {"frac_negative", num_or_null(r.frac_e_hat_neg)}};
    row["e_bar"] = {{"mean", num_or_null(r.mean_e_bar)},
                    {"std", num_or_null(r.std_e_bar)},
                    {"frac_negative", num_or_null(r.frac_e_bar_neg)}};
    row["t_c"] = {{"mean_s", num_or_null(r.mean_t_c)}, {"std_s", num_or_null(r.std_t_c)}};
    j["rows"].push_back(row);
  }
  return j.dump(2);
}

std::string to_json(const ComparisonStudy& study) {
  json j;
  j["scenario"] = study.scenario;
  j["seed"] = study.seed;
  j["rows"] = json::array();
  for (const auto& r : study.rows) {
    json row;
    row["label"] = r.label;
    row["variant"] = r.variant;
    row["alpha"] = r.alpha;
    row["reps"] = r.reps;
    row["collided_runs"] = r.collided_runs;
    row["aborted_runs"] = r.aborted_runs;
    row["collision_steps"] = r.collision_steps;
    row["infeasible_steps"] = r.infeasible_steps;
    row["clearance"] = {{"mean", num_or_null(r.mean_clearance)},
                        {"std", num_or_null(r.std_clearance)},
                        {"min", num_or_null(r.min_clearance)}};
    row["safe_fractions"] = r.safe_fractions;
    j["rows"].push_back(row);
  }
  return j.dump(2);
}

BoundValidation validate_bound(double alpha, double delta, int n, int trials, std::uint64_t seed,
                               double b_min) {
  RiskConfig cfg;
  cfg.alpha = alpha;
  cfg.delta = delta;
  cfg.b_min = b_min;
  cfg.validate();
  if (n < 1 || trials < 1)
    throw ContractViolation("validate_bound: n and trials must be positive");

  BoundValidation v;
  v.n = n;
  v.trials = trials;
  v.alpha = alpha;
  v.delta = delta;
  v.true_cvar = gaussian_cvar(0.0, 1.0, alpha);

  RngStream rng(seed);
  Accumulator bounds;
  for (int trial = 0; trial < trials; ++trial) {
    Vec samples(n);
    for (int i = 0; i < n; ++i) {
      double x = normal01(rng.sequential());
      while (x < b_min) x = normal01(rng.sequential());
      samples(i) = x;
    }
    const double bound = cvar_lower_bound(samples, cfg);
    bounds.add(bound);
    if (bound > v.true_cvar) ++v.violations;
  }
  v.rate = double(v.violations) / double(trials);
  v.mean_bound = bounds.mean();
  return v;
}

std::string to_json(const BoundValidation& v) {
  json j;
  j["alpha"] = v.alpha;
  j["delta"] = v.delta;
  j["n"] = v.n;
  j["trials"] = v.trials;
  j["violations"] = v.violations;
  j["rate"] = v.rate;
  j["true_cvar"] = v.true_cvar;
  j["mean_bound"] = v.mean_bound;
  return j.dump(2);
}

std::vector<BenchRow> bench_filter(const std::vector<int>& particle_counts, int iters,
                                   std::uint64_t seed) {
  if (iters < 1) throw ContractViolation("bench_filter: iters must be positive");
  const UnicycleModel model;
  const LookaheadUnicycleBarrier barrier(Eigen::Vector2d(2.5, 2.5), 0.5, 0.2);
  RiskConfig risk;
  risk.alpha = 0.2;
  risk.delta = 0.05;
  risk.b_min = -0.55;
  SafetyFilterConfig fcfg;
  fcfg.box = BoxBounds{Vec::Zero(2), (Vec(2) << 1.0, 2.0).finished()};
  fcfg.box->lower(1) = -2.0;
  Vec u_ref(2);
  u_ref << 1.0, 0.2;

  std::vector<BenchRow> rows;
  for (int n : particle_counts) {
    RngStream rng(mix64(seed, static_cast<std::uint64_t>(n)));
    Mat states(3, n);
    for (int i = 0; i < n; ++i) {
      states(0, i) = 1.2 + 0.4 * normal01(rng.sequential());
      states(1, i) = 1.2 + 0.4 * normal01(rng.sequential());
      states(2, i) = M_PI / 4.0 + 0.2 * normal01(rng.sequential());
    }
    const BeliefState belief = BeliefState::uniform(std::move(states), 0.0);

    for (int w = 0; w < 3; ++w) (void)filter(belief, barrier, risk, model, u_ref, fcfg);

    BenchRow row;
    row.particles = n;
    row.iters = iters;
    Accumulator acc;
    double worst = 0.0;
    for (int it = 0; it < iters; ++it) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto res = filter(belief, barrier, risk, model, u_ref, fcfg);
      const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!std::isfinite(res.u_star.sum())) throw PropagationDiverged("bench produced NaN", -1);
      acc.add(dt);
      worst = std::max(worst, dt);
    }
    row.mean_s = acc.mean();
    row.std_s = acc.stddev();
    row.max_s = worst;
    rows.push_back(row);
  }
  return rows;
}

std::string to_json(const std::vector<BenchRow>& rows) {
  json j = json::array();
  for (const auto& r : rows) {
    j.push_back({{"particles", r.particles},
                 {"iters", r.iters},
                 {"mean_s", r.mean_s},
                 {"std_s", r.std_s},
                 {"max_s", r.max_s}});
  }
  return j.dump(2);
}

int resolve_threads(int requested) {
  if (requested > 0) return std::min(requested, 256);
  if (const char* env = std::getenv("RISKFILTER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 256)
      throw ContractViolation(std::string("RISKFILTER_THREADS must be an integer in [1, 256], got '") +
                              env + "'");
    return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hc, 1u, 16u));
}

void parallel_for_index(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace riskfilter
