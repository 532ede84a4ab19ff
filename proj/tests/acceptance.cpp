// Acceptance suite: every release gate in one binary. Each criterion prints a
// single [PASS]/[FAIL] line; the exit code is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "riskfilter/barrier.hpp"
#include "riskfilter/errors.hpp"
#include "riskfilter/rng.hpp"
#include "riskfilter/safety_filter.hpp"
#include "riskfilter/scenario.hpp"
#include "riskfilter/sim.hpp"

using namespace riskfilter;

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<int>(v.size()));
  int i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

const ComparisonRow& row(const ComparisonStudy& s, const std::string& label) {
  for (const auto& r : s.rows) {
    if (r.label == label) return r;
  }
  throw ContractViolation("comparison study is missing arm '" + label + "'");
}

double objective_of(const QPProblem& qp, const Vec& u) {
  const Vec d = u - qp.u_ref;
  return d.dot(qp.Q * d);
}

// KKT stationarity / dual-feasibility residual with least-squares multipliers
// over the active set; small only at a true optimum of the convex QP.
double kkt_residual(const QPProblem& qp, const Vec& u, double tol = 1e-7) {
  const int m = static_cast<int>(u.size());
  const Vec grad = 2.0 * qp.Q * (u - qp.u_ref);
  std::vector<Vec> normals;
  if (qp.a.dot(u) <= qp.c + tol) normals.push_back(qp.a.transpose());
  if (qp.box) {
    for (int d = 0; d < m; ++d) {
      if (u(d) <= qp.box->lower(d) + tol) {
        Vec e = Vec::Zero(m);
        e(d) = 1.0;
        normals.push_back(e);
      }
      if (u(d) >= qp.box->upper(d) - tol) {
        Vec e = Vec::Zero(m);
        e(d) = -1.0;
        normals.push_back(e);
      }
    }
  }
  if (normals.empty()) return grad.norm();
  Mat n(m, static_cast<int>(normals.size()));
  for (std::size_t k = 0; k < normals.size(); ++k) n.col(static_cast<int>(k)) = normals[k];
  const Vec lambda = n.colPivHouseholderQr().solve(grad);
  double res = (n * lambda - grad).norm();
  for (int k = 0; k < lambda.size(); ++k) res = std::max(res, std::max(0.0, -lambda(k)));
  return res;
}

double grid_best_objective(const QPProblem& qp, int points_per_dim) {
  const int m = static_cast<int>(qp.u_ref.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> digit(m, 0);
  while (true) {
    Vec u(m);
    for (int d = 0; d < m; ++d) {
      const double t = static_cast<double>(digit[d]) / (points_per_dim - 1);
      u(d) = qp.box->lower(d) + t * (qp.box->upper(d) - qp.box->lower(d));
    }
    if (qp.a.dot(u) >= qp.c) best = std::min(best, objective_of(qp, u));
    int d = 0;
    while (d < m && ++digit[d] == points_per_dim) digit[d++] = 0;
    if (d == m) break;
  }
  return best;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int idx, bool ok, const std::string& detail) {
    std::printf("[%s] %2d. %s\n", ok ? "PASS" : "FAIL", idx, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  };
  const int threads = resolve_threads();

  // ---- criteria 1-3: estimator statistics against the closed-form oracle ----
  const auto conv_t0 = std::chrono::steady_clock::now();
  const ConvergenceStudy conv =
      convergence_study(example1_default(), {100, 1000, 5000}, 200, threads);
  const double conv_elapsed = seconds_since(conv_t0);
  const ConvergenceRow& r100 = conv.rows[0];
  const ConvergenceRow& r1000 = conv.rows[1];
  const ConvergenceRow& r5000 = conv.rows[2];

  double worst_bar_overshoot = 0.0;
  int conv_aborted = 0;
  for (const auto& r : conv.rows) {
    worst_bar_overshoot = std::max(worst_bar_overshoot, r.frac_e_bar_neg);
    conv_aborted += r.aborted_reps;
  }
  report(1, worst_bar_overshoot <= 0.01 && conv_aborted == 0 && conv_elapsed < 300.0,
         fmt("lower bound never overshoots the true tail risk: worst per-N overshoot "
             "fraction %.4f (limit 0.01), %d aborted runs, study %.0f s (limit 300)",
             worst_bar_overshoot, conv_aborted, conv_elapsed));

  const bool c2 = r100.frac_e_hat_neg >= 0.90;
  report(2, c2,
         fmt("plain tail-average estimate overshoots the truth at N=100 in fraction %.3f "
             "of steps (required >= 0.900)",
             r100.frac_e_hat_neg));
  if (!c2) {
    std::printf("       note: the lower-tail average is nearly unbiased with per-step scatter,"
                " so it lands above the truth in only about half the steps at any N; a >= 90%%"
                " one-sided rate is unattainable for this per-step statistic.\n");
  }

  report(3,
         r100.mean_e_bar > r1000.mean_e_bar && r1000.mean_e_bar > r5000.mean_e_bar &&
             r100.mean_e_bar >= 0.09 && r100.mean_e_bar <= 0.27,
         fmt("bound gap shrinks with more particles: %.4f > %.4f > %.4f, N=100 value in "
             "[0.09, 0.27]",
             r100.mean_e_bar, r1000.mean_e_bar, r5000.mean_e_bar));

  // ---- criteria 4-5: controller comparison on the multimodal scenario ----
  const ComparisonStudy comp =
      comparison_study(multimodal_default(), default_comparison_arms(), 100, threads);
  const ComparisonRow& mu = row(comp, "mu_scbf");
  const ComparisonRow& ml = row(comp, "ml_scbf");
  const ComparisonRow& be = row(comp, "be_scbf");
  const ComparisonRow& o20 = row(comp, "ours_a0.20");
  const ComparisonRow& o05 = row(comp, "ours_a0.05");

  report(4,
         mu.collided_runs >= 20 && ml.collided_runs >= 20 && be.collided_runs <= 1 &&
             o05.collided_runs <= 1 && be.mean_clearance > o05.mean_clearance &&
             o05.mean_clearance > o20.mean_clearance,
         fmt("point-estimate baselines collide, risk-aware variants do not: collided runs "
             "mu=%d ml=%d (need >= 20) be=%d ours05=%d (need <= 1); mean clearance "
             "%.2f > %.2f > %.2f (be > ours05 > ours20)",
             mu.collided_runs, ml.collided_runs, be.collided_runs, o05.collided_runs,
             be.mean_clearance, o05.mean_clearance, o20.mean_clearance));

  int runs_above = 0;
  for (double f : o20.safe_fractions) runs_above += (f >= 0.8);
  report(5, runs_above >= 95 && static_cast<int>(o20.safe_fractions.size()) == 100,
         fmt("true state stays safe in at least 1-alpha of steps: fraction >= 0.8 in %d "
             "of %zu runs (need >= 95 of 100)",
             runs_above, o20.safe_fractions.size()));

  // ---- criterion 6: statistical coverage of the concentration bound ----
  const BoundValidation bv = validate_bound(0.2, 0.05, 100, 2000, 1);
  report(6, bv.rate <= 0.07,
         fmt("bound exceeds the true value in %.4f of 2000 standalone trials (limit 0.07 "
             "at delta=0.05)",
             bv.rate));

  // ---- criterion 7: analytic belief-barrier gradients vs finite differences ----
  {
    const UnicycleModel fd_model;
    RiskConfig fd_risk;
    fd_risk.alpha = 0.2;
    fd_risk.delta = 0.05;
    fd_risk.b_min = -10.0;

    const HalfspaceBarrier half(vec({1.0, 0.5, 0.0}), 4.0);
    const CircularStayOutBarrier circ(Eigen::Vector2d(2.0, 0.0), 0.5);
    const LookaheadUnicycleBarrier look(Eigen::Vector2d(2.0, 0.0), 0.5, 0.2);
    const StateBarrier* barriers[3] = {&half, &circ, &look};

    double worst_fd = 0.0;
    bool fd_ok = true;
    SplitMix64 g(2024);
    for (const StateBarrier* barrier : barriers) {
      int done = 0;
      int attempts = 0;
      while (done < 100 && ++attempts < 10000) {
        const double cx = 6.0 * uniform01(g) - 3.0;
        const double cy = 6.0 * uniform01(g) - 3.0;
        Mat states(3, 60);
        for (int i = 0; i < 60; ++i) {
          states(0, i) = cx + 0.5 * normal01(g);
          states(1, i) = cy + 0.5 * normal01(g);
          states(2, i) = 0.8 * normal01(g);
        }
        const BeliefState belief = BeliefState::uniform(std::move(states), 0.0);
        const FdCheckResult res = finite_difference_check(belief, *barrier, fd_risk);
        if (res.tie_detected) continue;  // regenerate: coefficients are not smooth at ties
        worst_fd = std::max(worst_fd, res.max_rel_error);
        ++done;
      }
      fd_ok = fd_ok && done == 100;
    }
    report(7, fd_ok && worst_fd < 1e-4,
           fmt("gradient matches central differences on 100 tie-free beliefs per barrier "
               "type: worst relative error %.2e (limit 1e-4)",
               worst_fd));
  }

  // ---- criterion 8: QP solver against grid search and KKT certificates ----
  {
    SplitMix64 g(55);
    int bad = 0;
    int evaluated = 0;
    double worst_kkt = 0.0;
    while (evaluated < 1000) {
      const int m = 1 + static_cast<int>(uniform01(g) * 3.0);
      QPProblem qp;
      Vec qd(m);
      for (int d = 0; d < m; ++d) qd(d) = 0.2 + 3.0 * uniform01(g);
      qp.Q = qd.asDiagonal();
      qp.u_ref = Vec(m);
      qp.a = Row(m);
      for (int d = 0; d < m; ++d) {
        qp.u_ref(d) = 2.0 * normal01(g);
        qp.a(d) = normal01(g);
      }
      if (qp.a.norm() < 1e-3) continue;
      qp.c = normal01(g);
      Vec lo(m), hi(m);
      for (int d = 0; d < m; ++d) {
        const double a1 = 3.0 * normal01(g), b1 = 3.0 * normal01(g);
        lo(d) = std::min(a1, b1) - 0.1;
        hi(d) = std::max(a1, b1) + 0.1;
      }
      qp.box = BoxBounds{lo, hi};
      ++evaluated;

      const QPSolution sol = solve_qp(qp);
      if (!sol.feasible) {
        for (int d = 0; d < m; ++d) {
          const double corner = qp.a(d) >= 0.0 ? hi(d) : lo(d);
          if (std::abs(sol.u(d) - corner) > 1e-9) ++bad;
        }
        continue;
      }
      bool this_ok = qp.a.dot(sol.u) >= qp.c - 1e-9;
      for (int d = 0; d < m; ++d) {
        this_ok = this_ok && sol.u(d) >= lo(d) - 1e-9 && sol.u(d) <= hi(d) + 1e-9;
      }
      const double res = kkt_residual(qp, sol.u);
      worst_kkt = std::max(worst_kkt, res);
      this_ok = this_ok && res < 1e-8;
      const double grid = grid_best_objective(qp, m == 3 ? 41 : 101);
      if (std::isfinite(grid)) this_ok = this_ok && sol.objective <= grid + 1e-6 * (1.0 + grid);
      if (!this_ok) ++bad;
    }
    report(8, bad == 0,
           fmt("1000 random boxed QPs: %d failures against grid search (1e-6) and KKT "
               "certificates (worst residual %.2e, limit 1e-8)",
               bad, worst_kkt));
  }

  // ---- criterion 9: filter latency at the largest particle count ----
  const auto bench = bench_filter({5000}, 200, 1);
  report(9, bench[0].mean_s < 0.010,
         fmt("full filter call at N=5000: %.2f ms mean over %d iterations (limit 10 ms)",
             bench[0].mean_s * 1e3, bench[0].iters));

  // ---- criterion 10: closed-loop forward invariance and reproducibility ----
  {
    const ScenarioConfig e1 = example1_default();
    const double eps_int = 10.0 * e1.dt_sde;  // discretization slack on h_b >= 0
    double min_h_b = std::numeric_limits<double>::infinity();
    long long jumps = 0;
    int aborted = 0;
    bool all_finite = true;
    for (int rep = 0; rep < 50; ++rep) {
      const RunResult run = run_scenario(e1, rep);
      if (run.aborted) {
        ++aborted;
        continue;
      }
      jumps += run.jump_violations;
      for (const auto& rec : run.records) {
        if (!std::isfinite(rec.h_b)) all_finite = false;
        min_h_b = std::min(min_h_b, rec.h_b);
      }
    }

    const RunResult d1 = run_scenario(e1, 7);
    const RunResult d2 = run_scenario(e1, 7);
    bool deterministic = d1.records.size() == d2.records.size();
    for (std::size_t k = 0; deterministic && k < d1.records.size(); ++k) {
      deterministic = d1.records[k].x_true == d2.records[k].x_true &&
                      d1.records[k].u_star == d2.records[k].u_star &&
                      d1.records[k].h_b == d2.records[k].h_b;
    }

    report(10,
           aborted == 0 && all_finite && min_h_b >= -eps_int && jumps == 0 && deterministic,
           fmt("closed loop keeps h_b above -%.2f across 50 seeds (min %.4f), %d aborted, "
               "%lld update jumps (need 0), repeat run bitwise identical: %s",
               eps_int, min_h_b, aborted, jumps, deterministic ? "yes" : "no"));
  }

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures;
}
