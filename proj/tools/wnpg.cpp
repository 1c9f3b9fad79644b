// wnpg: batch front end for training, sweeps, deployment, theory reports
// and the invariant suite.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wnpg/wnpg.hpp"

namespace fs = std::filesystem;
using namespace wnpg;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool force = false;
  std::size_t workers = default_workers();
};

ExperimentConfig load_config(const Common& c) {
  std::vector<std::string> overrides = c.overrides;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  return parse_config(c.config, overrides);
}

void prepare_out_dir(const std::string& dir, const std::vector<std::string>& artifacts, bool force) {
  fs::create_directories(dir);
  if (force) return;
  for (const auto& a : artifacts) {
    if (fs::exists(fs::path(dir) / a)) {
      throw Error(dir + ": already contains " + a + " (use --force to overwrite)");
    }
  }
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

int cmd_train(const Common& c) {
  const ExperimentConfig cfg = load_config(c);
  prepare_out_dir(c.out, {"record.csv", "theta_final.f64", "config.json", "curves.svg"}, c.force);
  const RunRecord rec = run(cfg, c.workers);
  write_file(join(c.out, "record.csv"), record_csv(rec));
  write_file(join(c.out, "theta_final.f64"), encode_f64(rec.theta_final.theta));
  write_file(join(c.out, "config.json"), config_to_json(cfg).dump(2) + "\n");
  write_file(join(c.out, "curves.svg"),
             curves_svg(rec, std::string(to_string(cfg.algo)) + " on " + env_name(cfg.env)));
  const auto& last = rec.rows.back();
  std::printf("status=%s k=%zu J_hat=%s J_det=%s\n", std::string(to_string(rec.status)).c_str(), last.k,
              fmt_num(last.J_hat).c_str(), last.J_det ? fmt_num(*last.J_det).c_str() : "");
  if (rec.flagged()) {
    std::fprintf(stderr, "wnpg train: run flagged: %s\n", rec.status_detail.c_str());
    return 2;
  }
  return 0;
}

int cmd_sweep(const Common& c) {
  const ExperimentConfig cfg = load_config(c);
  require(!cfg.sigma_sq_values.empty(), "sigma_sq_values: required for sweep");
  prepare_out_dir(c.out, {"sweep.csv", "sweep.svg"}, c.force);
  const SweepResult sweep = variance_sweep(cfg, c.workers);
  write_file(join(c.out, "sweep.csv"), sweep_csv(sweep));
  write_file(join(c.out, "sweep.svg"), sweep_svg(sweep, std::string(to_string(cfg.algo)) + " exploration sweep"));
  bool flagged = false;
  for (const auto& r : sweep.rows) flagged = flagged || r.status != "ok";
  for (const auto& a : sweep.aggregates) {
    std::printf("sigma_sq=%s runs_ok=%zu J_det=%s +- %s J_hat=%s +- %s\n", fmt_num(a.sigma_sq).c_str(), a.runs_ok,
                fmt_short(a.J_det_mean).c_str(), fmt_short(a.J_det_halfwidth).c_str(),
                fmt_short(a.J_hat_mean).c_str(), fmt_short(a.J_hat_halfwidth).c_str());
  }
  return flagged ? 2 : 0;
}

int cmd_deploy(const Common& c, const std::string& theta_path, std::size_t episodes) {
  const ExperimentConfig cfg = load_config(c);
  const PolicyParams params(cfg.arch(), decode_f64(read_file(theta_path)));
  const DeployResult r = deploy_deterministic(params, cfg.env, episodes, cfg.seed, c.workers);
  std::printf("mean,std_error,episodes\n%s,%s,%zu\n", fmt_num(r.mean).c_str(), fmt_num(r.std_error).c_str(),
              r.episodes);
  if (r.single_episode) std::printf("note: single episode, std_error reported as 0\n");
  return 0;
}

int cmd_probe(const Common& c, const std::vector<std::size_t>& ns, std::size_t reps) {
  const ExperimentConfig cfg = load_config(c);
  prepare_out_dir(c.out, {"variance.csv"}, c.force);
  ProbeConfig probe{cfg.env, cfg.algo, initial_policy_params(cfg), cfg.noise(), cfg.seed, c.workers};
  const auto rows = variance_scaling_probe(probe, ns, reps);
  write_file(join(c.out, "variance.csv"), variance_csv(rows, cfg.sigma, cfg.algo, env_name(cfg.env)));
  std::printf("log-log slope=%s\n", fmt_short(log_log_slope(rows)).c_str());
  return 0;
}

int cmd_theory(const std::string& path, bool table2) {
  const ConstantsFile f = constants_from_json(read_json_file(path));
  const RegularityConstants& rc = f.rc;
  const RateQuery& q = f.query;
  if (table2) {
    std::printf("algo,sigma_mode,smoothness,sigma,nk,core,log_factor,exp_eps,exp_inv_one_minus_gamma,exp_d,exp_sigma\n");
    for (const RateCell& cell : rate_table(rc, q)) {
      std::printf("%s,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s\n", cell.algo.c_str(),
                  cell.sigma_mode == SigmaMode::fixed ? "fixed" : "adaptive", cell.smoothness ? "with" : "without",
                  fmt_num(cell.sigma).c_str(), fmt_num(cell.nk).c_str(), fmt_num(cell.core).c_str(),
                  fmt_num(cell.log_factor).c_str(), fmt_short(cell.exp_eps).c_str(), fmt_short(cell.exp_H).c_str(),
                  fmt_short(cell.exp_d).c_str(), fmt_short(cell.exp_sigma).c_str());
    }
    return 0;
  }
  const auto lip = lipschitz_constants(rc);
  const auto lip_t1 = lipschitz_constants(rc, Rendering::table1);
  const double l2 = smoothness_L2(rc);
  std::printf("constants (lemma rendering; table1 rendering in brackets)\n");
  std::printf("  L      = %s [%s]\n", fmt_short(lip.L).c_str(), fmt_short(lip_t1.L).c_str());
  std::printf("  L_J    = %s [%s]\n", fmt_short(lip.L_J).c_str(), fmt_short(lip_t1.L_J).c_str());
  std::printf("  L2     = %s [%s]\n", fmt_short(l2).c_str(), fmt_short(smoothness_L2(rc, Rendering::table1)).c_str());
  for (Exploration e : {Exploration::pb, Exploration::ab}) {
    const auto sm = objective_smoothness(rc, e, q.sigma);
    const double v = variance_bounds(rc, e, q.sigma);
    const double d = static_cast<double>(e == Exploration::pb ? rc.d_theta : rc.d_action);
    const double L_dag = e == Exploration::pb ? lip.L_J : lip.L;
    const auto gap = deployment_gap_bound(L_dag, d, q.sigma);
    std::printf("%s exploration at sigma=%s\n", std::string(to_string(e)).c_str(), fmt_short(q.sigma).c_str());
    std::printf("  L2_dagger = %s (branch %s)\n", fmt_short(sm.value).c_str(),
                std::string(to_string(sm.branch)).c_str());
    std::printf("  V         = %s [%s]\n", fmt_short(v).c_str(),
                fmt_short(variance_bounds(rc, e, q.sigma, Rendering::table1)).c_str());
    std::printf("  deployment gap: uniform %s, suboptimality %s, floor %s\n", fmt_short(gap.uniform).c_str(),
                fmt_short(gap.suboptimality).c_str(), fmt_short(gap.tightness_floor).c_str());
    if (L_dag > 0.0) {
      std::printf("  sigma_adaptive(eps=%s) = %s\n", fmt_short(q.epsilon).c_str(),
                  fmt_short(sigma_adaptive(q.epsilon, L_dag, d)).c_str());
    }
    const WgdParams wgd{q.alpha, q.beta, e == Exploration::pb ? ObjectiveTag::parameter_based
                                                              : ObjectiveTag::action_based};
    if (sm.value > 0.0 && v > 0.0) {
      const double gap0 = std::max(0.0, q.j_gap - q.beta);
      std::printf("  NK(eps=%s) = %s\n", fmt_short(q.epsilon).c_str(),
                  fmt_short(sample_complexity(wgd, sm.value, v, q.epsilon, q.j_gap)).c_str());
      std::printf("  zeta constant = %s, zeta(eps) = %s (N=%s)\n",
                  fmt_short(theory_constant_step(q.alpha, sm.value, v, f.n, gap0)).c_str(),
                  fmt_short(theory_epsilon_step(q.alpha, sm.value, v, f.n, q.epsilon)).c_str(),
                  fmt_short(f.n).c_str());
    }
  }
  return 0;
}

int cmd_check(const std::string& filter, bool corrupt) {
  CheckOptions opt{filter, corrupt};
  bool all_pass = true;
  std::size_t count = 0;
  run_checks(opt, [&](const CheckResult& r) {
    ++count;
    all_pass = all_pass && r.pass;
    std::printf("[%s] %s/%s  %s  (%.2fs)\n", r.pass ? "PASS" : "FAIL", r.group.c_str(), r.name.c_str(),
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
  });
  if (count == 0) {
    std::printf("no checks match filter '%s'\n", filter.c_str());
    return 1;
  }
  return all_pass ? 0 : 1;
}

void add_common(CLI::App* sub, Common& c, bool needs_out) {
  sub->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  if (needs_out) sub->add_option("--out", c.out, "output directory")->required();
  sub->add_option("--set", c.overrides, "override a config value: path=value (repeatable)");
  sub->add_option("--seed", c.seed, "master seed (overrides the config)");
  sub->add_option("--workers", c.workers, "worker threads (default: WNPG_WORKERS or hardware)")
      ->check(CLI::PositiveNumber);
  if (needs_out) sub->add_flag("--force", c.force, "overwrite existing artifacts");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"white-noise policy gradients: training, deployment and theory"};
  app.require_subcommand(1);

  Common train_opts, sweep_opts, deploy_opts, probe_opts;
  auto* train = app.add_subcommand("train", "run PGPE or GPOMDP and write the run artifacts");
  add_common(train, train_opts, true);

  auto* sweep = app.add_subcommand("sweep", "train across sigma_sq_values x repeat_seeds");
  add_common(sweep, sweep_opts, true);

  std::string theta_path;
  std::size_t episodes = 100;
  auto* deploy = app.add_subcommand("deploy", "evaluate a stored parameter vector with the noise off");
  add_common(deploy, deploy_opts, false);
  deploy->add_option("--theta", theta_path, "raw little-endian float64 parameters")
      ->required()
      ->check(CLI::ExistingFile);
  deploy->add_option("--episodes", episodes, "episodes to average")->check(CLI::PositiveNumber);

  std::vector<std::size_t> probe_ns = {10, 40, 160};
  std::size_t probe_reps = 200;
  auto* probe = app.add_subcommand("probe", "empirical estimator variance against batch size");
  add_common(probe, probe_opts, true);
  probe->add_option("--n", probe_ns, "batch sizes")->delimiter(',');
  probe->add_option("--reps", probe_reps, "repetitions per batch size (>= 100)");

  std::string constants_path;
  bool table2 = false;
  auto* theory = app.add_subcommand("theory", "constants, bounds and rate table from regularity constants");
  theory->add_option("--constants", constants_path, "regularity constants (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  theory->add_flag("--table2", table2, "emit the rate table as CSV");

  std::string filter;
  bool corrupt = false;
  auto* check = app.add_subcommand("check", "run the fast invariant suite");
  check->add_option("--filter", filter, "run only checks whose group or name contains this");
  check->add_flag("--corrupt-gpomdp-score", corrupt, "flip the GPOMDP score sign (test hook)")->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(train_opts);
    if (*sweep) return cmd_sweep(sweep_opts);
    if (*deploy) return cmd_deploy(deploy_opts, theta_path, episodes);
    if (*probe) return cmd_probe(probe_opts, probe_ns, probe_reps);
    if (*theory) return cmd_theory(constants_path, table2);
    if (*check) return cmd_check(filter, corrupt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wnpg: error: %s\n", e.what());
    return 1;
  }
  return 1;
}
