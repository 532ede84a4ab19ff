#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "riskfilter/errors.hpp"
#include "riskfilter/scenario.hpp"
#include "riskfilter/sim.hpp"

namespace {

using namespace riskfilter;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;

ScenarioConfig load_config(const std::string& config_path, const std::string& preset) {
  if (!config_path.empty() && !preset.empty())
    throw ContractViolation("give either --config or --preset, not both");
  if (!config_path.empty()) return load_scenario_file(config_path);
  if (preset == "example1") return example1_default();
  if (preset == "multimodal") return multimodal_default();
  if (preset == "dropout") return dropout_default();
  throw ContractViolation("unknown preset '" + preset +
                          "' (expected example1, multimodal, or dropout)");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ContractViolation("cannot write '" + path.string() + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text << std::endl;
  } else {
    write_text(out_path, text);
    std::cout << "wrote " << out_path << std::endl;
  }
}

bool check(bool ok, const std::string& what) {
  std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << std::endl;
  return ok;
}

int cmd_simulate(const ScenarioConfig& cfg, int reps, int threads, const std::string& out_dir,
                 bool dump_belief) {
  std::vector<RunResult> runs(reps);
  parallel_for_index(reps, threads, [&](int r) {
    RunOptions opt;
    opt.keep_final_belief = dump_belief && r == 0;
    runs[r] = run_scenario(cfg, r, opt);
  });

  json summary = json::array();
  for (const auto& run : runs) summary.push_back(json::parse(run_summary_json(run)));

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (const auto& run : runs) {
      std::ostringstream csv;
      write_steps_csv(run, csv);
      write_text(std::filesystem::path(out_dir) / ("steps_rep" + std::to_string(run.rep) + ".csv"),
                 csv.str());
    }
    if (dump_belief && runs[0].final_belief) {
      std::ostringstream csv;
      belief_to_csv(*runs[0].final_belief, csv);
      write_text(std::filesystem::path(out_dir) / "final_belief_rep0.csv", csv.str());
    }
    write_text(std::filesystem::path(out_dir) / "summary.json", summary.dump(2));
    std::cout << "wrote " << out_dir << " (" << reps << " reps)" << std::endl;
  } else {
    std::cout << summary.dump(2) << std::endl;
  }

  int collided = 0;
  int aborted = 0;
  for (const auto& run : runs) {
    collided += run.collided ? 1 : 0;
    aborted += run.aborted ? 1 : 0;
  }
  std::cout << "reps=" << reps << " collided=" << collided << " aborted=" << aborted << std::endl;
  return kExitOk;
}

int cmd_table1(const ScenarioConfig& cfg, const std::vector<int>& particles, int reps, int threads,
               const std::string& out_path, bool do_check) {
  const ConvergenceStudy study = convergence_study(cfg, particles, reps, threads);
  emit(out_path, to_json(study));

  if (!do_check) return kExitOk;
  bool ok = true;
  for (const auto& row : study.rows) {
    ok &= check(row.frac_e_bar_neg <= 0.01,
                "N=" + std::to_string(row.particles) +
                    ": bound stays below the true risk in >= 99% of steps (frac_negative=" +
                    std::to_string(row.frac_e_bar_neg) + ")");
  }
  for (std::size_t i = 1; i < study.rows.size(); ++i) {
    ok &= check(study.rows[i].mean_e_bar < study.rows[i - 1].mean_e_bar,
                "mean bound gap shrinks from N=" + std::to_string(study.rows[i - 1].particles) +
                    " to N=" + std::to_string(study.rows[i].particles));
  }
  if (!study.rows.empty() && study.rows.front().particles == 100) {
    const double m = study.rows.front().mean_e_bar;
    ok &= check(m >= 0.09 && m <= 0.27,
                "mean bound gap at N=100 in [0.09, 0.27] (got " + std::to_string(m) + ")");
  }
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_table2(const ScenarioConfig& cfg, int reps, int threads, const std::string& out_path,
               bool do_check) {
  const ComparisonStudy study = comparison_study(cfg, default_comparison_arms(), reps, threads);
  emit(out_path, to_json(study));

  if (!do_check) return kExitOk;
  const auto row = [&](const std::string& label) -> const ComparisonRow& {
    for (const auto& r : study.rows)
      if (r.label == label) return r;
    throw ContractViolation("missing comparison arm '" + label + "'");
  };
  const auto& mu = row("mu_scbf");
  const auto& ml = row("ml_scbf");
  const auto& be = row("be_scbf");
  const auto& ours20 = row("ours_a0.20");
  const auto& ours05 = row("ours_a0.05");

  bool ok = true;
  ok &= check(mu.collided_runs >= reps / 5,
              "mean-only baseline collides often (" + std::to_string(mu.collided_runs) + "/" +
                  std::to_string(reps) + ")");
  ok &= check(ml.collided_runs >= reps / 5,
              "most-likely baseline collides often (" + std::to_string(ml.collided_runs) + "/" +
                  std::to_string(reps) + ")");
  ok &= check(be.collided_runs <= std::max(1, reps / 100),
              "Chebyshev-ball baseline stays safe (" + std::to_string(be.collided_runs) + "/" +
                  std::to_string(reps) + ")");
  ok &= check(ours05.collided_runs <= std::max(1, reps / 100),
              "belief filter at alpha=0.05 stays safe (" + std::to_string(ours05.collided_runs) +
                  "/" + std::to_string(reps) + ")");
  ok &= check(be.mean_clearance > ours05.mean_clearance,
              "ball baseline is more conservative than alpha=0.05");
  ok &= check(ours05.mean_clearance > ours20.mean_clearance,
              "alpha=0.05 is more conservative than alpha=0.20");
  int good_runs = 0;
  for (double f : ours20.safe_fractions)
    if (f >= 0.8) ++good_runs;
  ok &= check(good_runs * 100 >= reps * 95,
              "alpha=0.20 keeps >= 80% of steps safe in >= 95% of runs (" +
                  std::to_string(good_runs) + "/" + std::to_string(reps) + ")");
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"belief-space safety filter: simulation studies and diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string out_path;
  int reps = 0;
  int threads = 0;
  std::uint64_t seed = 0;
  bool have_seed = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "scenario JSON file");
    sub->add_option("--preset", preset, "built-in scenario (example1, multimodal, dropout)");
    sub->add_option("--reps", reps, "repetitions (default: from the scenario)");
    sub->add_option("--threads", threads, "worker threads (default: RISKFILTER_THREADS or cores)");
    sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      have_seed = true;
    });
    sub->add_option("--out", out_path, "output path (default: stdout)");
  };

  auto* sim = app.add_subcommand("simulate", "run a scenario and write per-step logs");
  add_common(sim);
  int sim_particles = 0;
  bool dump_belief = false;
  sim->add_option("--particles", sim_particles, "particle count override");
  sim->add_flag("--dump-belief", dump_belief, "also write the final belief of rep 0 as CSV");

  auto* t1 = app.add_subcommand("table1", "oracle-error convergence study over particle counts");
  add_common(t1);
  std::vector<int> t1_particles{100, 1000, 5000};
  bool t1_check = false;
  t1->add_option("--particles", t1_particles, "particle counts")->delimiter(',');
  t1->add_flag("--check", t1_check, "apply the study's acceptance thresholds");

  auto* t2 = app.add_subcommand("table2", "controller comparison on one scenario");
  add_common(t2);
  bool t2_check = false;
  t2->add_flag("--check", t2_check, "apply the study's acceptance thresholds");

  auto* vb = app.add_subcommand("validate-bound", "Monte Carlo failure rate of the risk bound");
  double vb_alpha = 0.2, vb_delta = 0.05, vb_max_rate = 0.07;
  int vb_n = 100, vb_trials = 2000;
  std::uint64_t vb_seed = 7;
  std::string vb_out;
  bool vb_check = false;
  vb->add_option("--alpha", vb_alpha, "tail level");
  vb->add_option("--delta", vb_delta, "bound failure probability");
  vb->add_option("--n", vb_n, "samples per trial");
  vb->add_option("--trials", vb_trials, "Monte Carlo trials");
  vb->add_option("--seed", vb_seed, "seed");
  vb->add_option("--max-rate", vb_max_rate, "checked ceiling on the observed failure rate");
  vb->add_option("--out", vb_out, "output path (default: stdout)");
  vb->add_flag("--check", vb_check, "fail if the observed rate exceeds --max-rate");

  auto* bench = app.add_subcommand("bench", "filter latency over particle counts");
  std::vector<int> bench_particles{100, 1000, 5000};
  int bench_iters = 50;
  std::uint64_t bench_seed = 11;
  double bench_max_ms = 0.0;
  std::string bench_out;
  bench->add_option("--particles", bench_particles, "particle counts")->delimiter(',');
  bench->add_option("--iters", bench_iters, "timed iterations per count");
  bench->add_option("--seed", bench_seed, "seed");
  bench->add_option("--max-ms", bench_max_ms, "fail if any mean latency exceeds this (0 = off)");
  bench->add_option("--out", bench_out, "output path (default: stdout)");

  auto* pr = app.add_subcommand("preset-json", "print a built-in scenario as JSON");
  std::string pr_name = "example1";
  pr->add_option("--name", pr_name, "example1, multimodal, or dropout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pr) {
      if (pr_name == "example1") std::cout << example1_json() << std::endl;
      else if (pr_name == "multimodal") std::cout << multimodal_json() << std::endl;
      else if (pr_name == "dropout") std::cout << dropout_json() << std::endl;
      else throw ContractViolation("unknown preset '" + pr_name + "'");
      return kExitOk;
    }
    if (*vb) {
      const BoundValidation v = validate_bound(vb_alpha, vb_delta, vb_n, vb_trials, vb_seed);
      emit(vb_out, to_json(v));
      if (vb_check)
        return check(v.rate <= vb_max_rate,
                     "bound failure rate " + std::to_string(v.rate) + " <= " +
                         std::to_string(vb_max_rate))
                   ? kExitOk
                   : kExitCheckFailed;
      return kExitOk;
    }
    if (*bench) {
      const auto rows = bench_filter(bench_particles, bench_iters, bench_seed);
      emit(bench_out, to_json(rows));
      if (bench_max_ms > 0.0) {
        bool ok = true;
        for (const auto& r : rows)
          ok &= check(r.mean_s * 1e3 <= bench_max_ms,
                      "N=" + std::to_string(r.particles) + " mean " +
                          std::to_string(r.mean_s * 1e3) + " ms <= " +
                          std::to_string(bench_max_ms) + " ms");
        return ok ? kExitOk : kExitCheckFailed;
      }
      return kExitOk;
    }

    if (config_path.empty() && preset.empty()) {
      if (*t1) preset = "example1";
      else if (*t2) preset = "multimodal";
      else throw ContractViolation("give --config or --preset");
    }
    ScenarioConfig cfg = load_config(config_path, preset);
    if (have_seed) cfg.seed = seed;
    const int n_reps = reps > 0 ? reps : cfg.reps;
    const int n_threads = resolve_threads(threads);

    if (*sim) {
      if (sim_particles > 0) cfg.particles = sim_particles;
      return cmd_simulate(cfg, n_reps, n_threads, out_path, dump_belief);
    }
    if (*t1) return cmd_table1(cfg, t1_particles, n_reps, n_threads, out_path, t1_check);
    if (*t2) return cmd_table2(cfg, n_reps, n_threads, out_path, t2_check);
    throw ContractViolation("no subcommand handled");
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitConfigError;
  }
}
