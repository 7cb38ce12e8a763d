// noise-odyssey CLI: seeded experiment runs, sweeps, diagnostics, and report
// rendering for the trajectory-search library.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "odyssey/odyssey.hpp"

namespace {

using namespace odyssey;

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
}

void write_lipschitz_csv(const LipschitzCurve& curve, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << "sigma_t,grad_norm_mean,grad_norm_std,samples\n";
  for (const auto& p : curve.points)
    f << detail::format_double(p.sigma_t) << "," << detail::format_double(p.grad_norm_mean) << ","
      << detail::format_double(p.grad_norm_std) << "," << p.samples << "\n";
}

void write_kbar_csv(const KbarReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << "sigma_t,kbar,trials\n";
  for (const auto& p : report.per_sigma)
    f << detail::format_double(p.sigma_t) << "," << detail::format_double(p.kbar) << ","
      << p.trials << "\n";
}

void write_regret_csv(const RegretCurve& curve, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << "M,simple_regret_mean,simple_regret_std,fitted_slope\n";
  for (const auto& p : curve.points)
    f << p.m << "," << detail::format_double(p.simple_regret_mean) << ","
      << detail::format_double(p.simple_regret_std) << ","
      << detail::format_double(curve.fitted_slope) << "\n";
}

int run_cli(int argc, char** argv) {
  CLI::App app{"test-time noise-trajectory search over an analytic diffusion testbed"};
  app.require_subcommand(1);

  // run
  std::string run_config;
  int run_repeats = 1;
  std::string run_output;
  std::vector<std::string> run_sets;
  auto* run_cmd = app.add_subcommand("run", "execute one experiment config");
  run_cmd->add_option("--config", run_config, "exp-v1 config file")->required();
  run_cmd->add_option("--repeats", run_repeats, "repetitions per (context, image)");
  run_cmd->add_option("--output", run_output, "output CSV (default <output_dir>/results.csv)");
  run_cmd->add_option("--set", run_sets, "override a config field as key=value (repeatable)");
  std::string run_reward;
  run_cmd->add_option("--reward", run_reward, "reward spec name[:k=v,...] (overrides the config)");

  // sweep
  std::string sweep_config;
  std::vector<std::string> sweep_grids, sweep_sets;
  int sweep_repeats = 0;
  std::string sweep_output;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cartesian sweep over config fields");
  sweep_cmd->add_option("--config", sweep_config, "exp-v1 config file")->required();
  sweep_cmd->add_option("--grid", sweep_grids, "axis as key=v1,v2,... (repeatable)")->required();
  sweep_cmd->add_option("--repeats", sweep_repeats, "repetitions per cell");
  sweep_cmd->add_option("--output", sweep_output, "output CSV (default <output_dir>/sweep.csv)");
  sweep_cmd->add_option("--set", sweep_sets, "override a config field as key=value (repeatable)");
  std::string sweep_reward;
  sweep_cmd->add_option("--reward", sweep_reward, "reward spec name[:k=v,...] (overrides the config)");

  // diagnose
  std::string diag_kind, diag_config;
  int diag_seeds = 0;
  std::vector<std::string> diag_sets;
  auto* diag_cmd = app.add_subcommand("diagnose", "reward-sensitivity / kbar / regret instruments");
  diag_cmd->add_option("kind", diag_kind, "lipschitz|kbar|regret")->required();
  diag_cmd->add_option("--config", diag_config, "exp-v1 config file")->required();
  diag_cmd->add_option("--seeds", diag_seeds, "seeds (lipschitz/kbar) or trials (regret)");
  diag_cmd->add_option("--set", diag_sets, "override a config field as key=value (repeatable)");

  // report
  std::string rep_kind, rep_in, rep_out, rep_x;
  auto* rep_cmd = app.add_subcommand("report", "render a CSV into a self-contained SVG");
  rep_cmd->add_option("--kind", rep_kind, "table|reward_vs_param|lipschitz_curve|regret_loglog")
      ->required();
  rep_cmd->add_option("--in", rep_in, "input rows CSV")->required();
  rep_cmd->add_option("--out", rep_out, "output SVG path")->required();
  rep_cmd->add_option("--x", rep_x, "x-axis column for reward_vs_param");

  // make-model
  std::string mm_name = "benchmark8", mm_out;
  auto* mm_cmd = app.add_subcommand("make-model", "write a builtin mixture as a gmm-v1 file");
  mm_cmd->add_option("name", mm_name, "builtin model name (default benchmark8)");
  mm_cmd->add_option("--out", mm_out, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are configuration errors
  }

  if (run_cmd->parsed()) {
    ExperimentConfig cfg = load_config(run_config);
    apply_overrides(cfg, run_sets);
    if (!run_reward.empty()) apply_config_value(cfg, "reward", run_reward);
    if (run_repeats > 1) cfg.repeats = run_repeats;
    cfg.validate();
    std::string out = run_output.empty() ? join_path(cfg.output_dir, "results.csv") : run_output;
    auto rows = run_to_csv(cfg, out);
    std::size_t failed = 0;
    for (const auto& r : rows)
      if (!std::isfinite(r.final_reward)) ++failed;
    std::printf("wrote %zu rows (%zu failed) to %s\n", rows.size(), failed, out.c_str());
    if (!rows.empty())
      std::printf("nfe per image: measured %lld step invocations (%lld raw denoiser calls); "
                  "table formula %lld\n",
                  static_cast<long long>(rows.front().nfe_paper_unit),
                  static_cast<long long>(rows.front().nfe_raw),
                  static_cast<long long>(paper_formula_nfe(cfg.method, cfg.search, cfg.steps)));
    return 0;
  }

  if (sweep_cmd->parsed()) {
    ExperimentConfig cfg = load_config(sweep_config);
    apply_overrides(cfg, sweep_sets);
    if (!sweep_reward.empty()) apply_config_value(cfg, "reward", sweep_reward);
    if (sweep_repeats > 1) cfg.repeats = sweep_repeats;
    SweepGrid grid;
    for (const auto& g : sweep_grids) {
      auto eq = g.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ConfigError("--grid expects key=v1,v2,..., got '" + g + "'");
      grid.emplace_back(g.substr(0, eq), detail::split(g.substr(eq + 1), ','));
    }
    std::string out = sweep_output.empty() ? join_path(cfg.output_dir, "sweep.csv") : sweep_output;
    run_sweep(cfg, grid, out);
    std::printf("sweep finished: %s\n", out.c_str());
    return 0;
  }

  if (diag_cmd->parsed()) {
    ExperimentConfig cfg = load_config(diag_config);
    apply_overrides(cfg, diag_sets);
    ExperimentEnv env = build_env(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    if (diag_kind == "lipschitz") {
      int seeds = diag_seeds > 0 ? diag_seeds : 20;
      LipschitzCurve curve = lipschitz_sweep(*env.model, *env.reward, seeds, env.schedule, cfg.seed);
      std::string out = join_path(cfg.output_dir, "lipschitz.csv");
      write_lipschitz_csv(curve, out);
      std::printf("wrote %s\n", out.c_str());
    } else if (diag_kind == "kbar") {
      int seeds = diag_seeds > 0 ? diag_seeds : 30;
      KbarReport report = kbar_sweep(*env.model, env.schedule, cfg.search, *env.reward, seeds,
                                     cfg.seed);
      std::string out = join_path(cfg.output_dir, "kbar.csv");
      write_kbar_csv(report, out);
      std::printf("wrote %s\n", out.c_str());
    } else if (diag_kind == "regret") {
      RegretConfig rc;
      rc.seed = cfg.seed;
      if (diag_seeds > 0) rc.trials = diag_seeds;
      rc.grid = default_regret_grid();
      RegretCurve curve = regret_experiment(rc);
      std::string out = join_path(cfg.output_dir, "regret.csv");
      write_regret_csv(curve, out);
      std::printf("wrote %s (slope %.3f)\n", out.c_str(), curve.fitted_slope);
    } else {
      throw ConfigError("unknown diagnose kind '" + diag_kind + "' (lipschitz|kbar|regret)");
    }
    return 0;
  }

  if (rep_cmd->parsed()) {
    CsvTable table = load_csv(rep_in);
    emit_report(parse_report_kind(rep_kind), table, rep_out, rep_x);
    std::printf("wrote %s\n", rep_out.c_str());
    return 0;
  }

  if (mm_cmd->parsed()) {
    GmmModel model = make_builtin_model(mm_name);
    save_gmm(model, mm_out);
    std::printf("wrote %s\n", mm_out.c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const odyssey::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
