// Command-line front end: train/evaluate experiments, render SVG learning
// curves, probe a checkpoint's value bias, and run the tabular chain study.
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rac/config.hpp"
#include "rac/eval.hpp"
#include "rac/metrics.hpp"
#include "rac/plot.hpp"
#include "rac/runner.hpp"
#include "rac/tabular.hpp"

namespace fs = std::filesystem;
using namespace rac;

namespace {

int cmd_run(const std::string& config_path, int seeds_override,
            const std::string& out_override) {
  RunConfig cfg = load_config(config_path);
  if (seeds_override > 0) cfg.seeds = seeds_override;
  if (!out_override.empty()) cfg.out_dir = out_override;
  RunOutcome out = run_experiment(cfg);
  for (const SeedOutcome& s : out.seeds) {
    std::cout << "seed " << s.index << " [" << (s.ok ? "ok" : "FAILED") << "]"
              << (s.error.empty() ? "" : " " + s.error) << "\n";
  }
  std::cout << (out.ok ? "run complete: " : "run INCOMPLETE: ")
            << out.dir.string() << "\n";
  return out.ok ? 0 : 1;
}

std::vector<CsvTable> seed_tables(const fs::path& run_dir,
                                  const std::string& file) {
  std::vector<CsvTable> tables;
  for (const std::string& p :
       expand_glob((run_dir / "seed_*" / file).string()))
    tables.push_back(read_csv(p));
  return tables;
}

int cmd_plot(const std::vector<std::string>& patterns,
             const std::string& out_dir) {
  std::vector<fs::path> run_dirs;
  for (const std::string& pat : patterns)
    for (const std::string& p : expand_glob(pat))
      if (fs::is_directory(p)) run_dirs.emplace_back(p);
  if (run_dirs.empty()) {
    std::cerr << "plot: no run directories match\n";
    return 1;
  }
  fs::create_directories(out_dir);

  auto emit = [&](const std::string& name, const std::string& ylabel,
                  const std::vector<PlotSeries>& series) {
    if (series.empty()) return;
    fs::path path = fs::path(out_dir) / (name + ".svg");
    write_band_chart(path.string(), name, "environment step", ylabel, series);
    std::cout << "wrote " << path.string() << "\n";
  };

  std::vector<PlotSeries> score, bias;
  const char* train_metrics[] = {"episode_return", "critic_loss",
                                 "actor_loss",     "temp_loss",
                                 "alpha_mean",     "target_q_mean"};
  std::vector<std::vector<PlotSeries>> train(std::size(train_metrics));
  for (const fs::path& dir : run_dirs) {
    const std::string label = dir.filename().string();
    if (auto t = seed_tables(dir, "eval.csv"); !t.empty()) {
      PlotSeries s = aggregate_column(label, t, "score");
      if (!s.x.empty()) score.push_back(std::move(s));
    }
    if (auto t = seed_tables(dir, "bias.csv"); !t.empty()) {
      PlotSeries s = aggregate_column(label, t, "bias_mean");
      if (!s.x.empty()) bias.push_back(std::move(s));
    }
    if (auto t = seed_tables(dir, "train.csv"); !t.empty()) {
      for (std::size_t i = 0; i < std::size(train_metrics); ++i) {
        PlotSeries s = aggregate_metric(label, t, train_metrics[i]);
        if (!s.x.empty()) train[i].push_back(std::move(s));
      }
    }
  }
  emit("score", "evaluation return", score);
  emit("bias", "normalized value bias", bias);
  for (std::size_t i = 0; i < std::size(train_metrics); ++i)
    emit(train_metrics[i], train_metrics[i], train[i]);
  return 0;
}

int cmd_bias(const std::string& checkpoint, const std::string& env_name,
             std::string config_path, double beta, std::uint64_t seed) {
  if (config_path.empty()) {
    // Run layout puts config.ini two levels above seed_*/checkpoint.bin.
    for (fs::path p : {fs::path(checkpoint).parent_path() / "config.ini",
                       fs::path(checkpoint).parent_path().parent_path() /
                           "config.ini"}) {
      if (fs::exists(p)) {
        config_path = p.string();
        break;
      }
    }
    if (config_path.empty()) {
      std::cerr << "bias: no config.ini near the checkpoint; pass --config\n";
      return 1;
    }
  }
  RunConfig cfg = load_config(config_path);
  auto proto = make_env(env_name.empty() ? cfg.env : env_name);
  RacAgent agent(cfg.agent, proto->obs_dim(), proto->act_dim(), 0);
  agent.load_checkpoint(checkpoint);

  Rng eval_rng = Rng::child(seed, "cli-eval");
  Rng bias_rng = Rng::child(seed, "cli-bias");
  double beta_star = beta;
  if (!(beta > 0.0)) {
    EvalProtocol protocol;
    protocol.episodes = cfg.eval_episodes;
    protocol.grid_size = cfg.eval_grid;
    protocol.grid_edge = cfg.eval_grid_edge;
    EvalResult er = evaluate(agent, *proto, protocol, eval_rng);
    beta_star = er.beta_star;
    std::cout << "eval score " << csv_double(er.score) << " at conditioner "
              << csv_double(beta_star) << "\n";
  }
  BiasConfig bias_cfg;
  bias_cfg.collect_pairs = cfg.bias_collect;
  bias_cfg.target_pairs = cfg.bias_pairs;
  bias_cfg.rollouts = cfg.bias_rollouts;
  bias_cfg.max_steps = cfg.bias_max_steps;
  bias_cfg.gamma = cfg.agent.gamma;
  BiasReport rep = estimate_bias(agent, *proto, beta_star, bias_cfg, bias_rng);
  std::cout << (rep.degenerate ? "raw value bias " : "normalized value bias ")
            << csv_double(rep.mean) << " +- " << csv_double(rep.std) << " over "
            << rep.pairs << " pairs\n";
  return 0;
}

int cmd_mdp_study(const std::string& agents_csv, int seeds, long steps,
                  long checkpoint_every, std::uint64_t base_seed,
                  std::string out_dir) {
  if (out_dir.empty()) {
    const char* root = std::getenv("RAC_OUT_ROOT");
    out_dir = ((root && *root) ? fs::path(root) : fs::path("runs")) /
              "mdp-study";
  }
  fs::create_directories(out_dir);
  std::vector<TabularAgentSpec> specs;
  std::stringstream ss(agents_csv);
  std::string name;
  while (std::getline(ss, name, ','))
    if (!name.empty()) specs.push_back(parse_tabular_agent(name));
  if (specs.empty()) {
    std::cerr << "mdp-study: no agents given\n";
    return 1;
  }
  TabularConfig cfg;
  for (const TabularAgentSpec& spec : specs) {
    TabularStudyResult res =
        run_tabular_study(spec, cfg, steps, checkpoint_every, seeds, base_seed);
    fs::path path = fs::path(out_dir) / (spec.label() + ".csv");
    CsvLog log(path.string(),
               "step,seed,optimal_visit_freq,low_value_ratio,q_bias");
    for (std::size_t s = 0; s < res.per_seed.size(); ++s)
      for (const TabularMetricsRow& row : res.per_seed[s].rows)
        log.row({std::to_string(row.step), std::to_string(s),
                 csv_double(row.optimal_visit_freq),
                 csv_double(row.low_value_ratio), csv_double(row.q_bias)});
    log.flush();
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncertainty-punished actor-critic laboratory"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "train an experiment from a config");
  std::string run_config, run_out;
  int run_seeds = 0;
  run->add_option("config", run_config, "config file")->required();
  run->add_option("--seeds", run_seeds, "override the seed count");
  run->add_option("--out", run_out, "override the output root");

  auto* plot = app.add_subcommand("plot", "render SVG curves from run dirs");
  std::vector<std::string> plot_globs;
  std::string plot_out = "plots";
  plot->add_option("runs", plot_globs, "run directory glob(s)")->required();
  plot->add_option("--out", plot_out, "output directory for SVGs");

  auto* bias = app.add_subcommand("bias", "value-bias probe on a checkpoint");
  std::string bias_ckpt, bias_env, bias_config;
  double bias_beta = 0.0;
  std::uint64_t bias_seed = 0;
  bias->add_option("checkpoint", bias_ckpt, "checkpoint file")->required();
  bias->add_option("--env", bias_env, "environment name (default: config's)");
  bias->add_option("--config", bias_config, "config file for the agent");
  bias->add_option("--beta", bias_beta,
                   "conditioner to probe (default: grid argmax)");
  bias->add_option("--seed", bias_seed, "probe rng seed");

  auto* mdp = app.add_subcommand("mdp-study", "tabular chain estimation study");
  std::string mdp_agents = "lb,qb0.5,qb1,qb2,rac", mdp_out;
  int mdp_seeds = 8;
  long mdp_steps = 100000, mdp_every = 100;
  std::uint64_t mdp_base = 1000;
  mdp->add_option("--agents", mdp_agents, "comma list: lb, qb<beta>, rac");
  mdp->add_option("--seeds", mdp_seeds, "independent seeds");
  mdp->add_option("--steps", mdp_steps, "environment steps per seed");
  mdp->add_option("--checkpoint-every", mdp_every, "metric cadence");
  mdp->add_option("--base-seed", mdp_base, "seed i runs with base+i");
  mdp->add_option("--out", mdp_out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_config, run_seeds, run_out);
    if (*plot) return cmd_plot(plot_globs, plot_out);
    if (*bias) return cmd_bias(bias_ckpt, bias_env, bias_config, bias_beta,
                               bias_seed);
    if (*mdp)
      return cmd_mdp_study(mdp_agents, mdp_seeds, mdp_steps, mdp_every,
                           mdp_base, mdp_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
