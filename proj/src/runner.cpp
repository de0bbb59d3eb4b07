#include "rac/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "rac/eval.hpp"
#include "rac/metrics.hpp"
#include "rac/plot.hpp"

namespace rac {
namespace {

namespace fs = std::filesystem;

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Wall-clock sidecar; everything non-deterministic lands here and nowhere
// else, so the CSVs stay a pure function of (config, seed).
class EventLog {
 public:
  explicit EventLog(const fs::path& path) : out_(path, std::ios::trunc) {}
  void line(const std::string& msg) {
    if (out_) {
      out_ << "[" << utc_now() << "] " << msg << '\n';
      out_.flush();
    }
  }

 private:
  std::ofstream out_;
};

std::string fmt_seed(int idx) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "seed_%03d", idx);
  return buf;
}

void worker_loop(const RunConfig& cfg, int seed_index, const fs::path& dir,
                 EventLog& events) {
  const std::uint64_t master = cfg.base_seed + static_cast<std::uint64_t>(seed_index);
  auto env = make_env(cfg.env);
  auto proto = make_env(cfg.env);
  RacAgent agent(cfg.agent, env->obs_dim(), env->act_dim(), master);
  Rng env_rng = Rng::child(master, "env");
  Rng eval_rng = Rng::child(master, "eval");
  Rng bias_rng = Rng::child(master, "bias");

  CsvLog train((dir / "train.csv").string(), kTrainHeader);
  CsvLog eval_log((dir / "eval.csv").string(), eval_header(cfg.eval_grid));
  CsvLog bias_log((dir / "bias.csv").string(), kBiasHeader);

  EvalProtocol protocol;
  protocol.episodes = cfg.eval_episodes;
  protocol.grid_size = cfg.eval_grid;
  protocol.grid_edge = cfg.eval_grid_edge;
  BiasConfig bias_cfg;
  bias_cfg.collect_pairs = cfg.bias_collect;
  bias_cfg.target_pairs = cfg.bias_pairs;
  bias_cfg.rollouts = cfg.bias_rollouts;
  bias_cfg.max_steps = cfg.bias_max_steps;
  bias_cfg.gamma = cfg.agent.gamma;

  const std::string seed_cell = std::to_string(seed_index);
  VectorXd obs = env->reset(env_rng);
  double ep_return = 0.0;
  std::vector<double> window;  // episode returns since the last checkpoint

  events.line("start seed " + seed_cell + " master " + std::to_string(master));
  for (long step = 1; step <= cfg.total_steps; ++step) {
    VectorXd a = agent.act_explore(obs);
    EnvStep sr = env->step(a, env_rng);
    agent.observe({obs, a, sr.reward, sr.obs, sr.done});
    ep_return += sr.reward;
    if (sr.done) {
      window.push_back(ep_return);
      ep_return = 0.0;
      obs = env->reset(env_rng);
    } else {
      obs = sr.obs;
    }
    TrainDiagnostics diag = agent.train_step();

    if (step % cfg.eval_every == 0) {
      const std::string step_cell = std::to_string(step);
      double recent = std::numeric_limits<double>::quiet_NaN();
      if (!window.empty()) {
        recent = 0.0;
        for (double r : window) recent += r;
        recent /= static_cast<double>(window.size());
        window.clear();
      }
      train.row({step_cell, seed_cell, "episode_return", csv_double(recent)});
      if (diag.updated) {
        train.row({step_cell, seed_cell, "critic_loss",
                   csv_double(diag.critic_loss)});
        train.row({step_cell, seed_cell, "actor_loss",
                   csv_double(diag.actor_loss)});
        train.row({step_cell, seed_cell, "temp_loss",
                   csv_double(diag.temp_loss)});
        train.row({step_cell, seed_cell, "alpha_mean",
                   csv_double(diag.alpha_mean)});
        train.row({step_cell, seed_cell, "target_q_mean",
                   csv_double(diag.target_q_mean)});
      }

      EvalResult er = evaluate(agent, *proto, protocol, eval_rng);
      std::vector<std::string> cells{step_cell, csv_double(er.beta_star),
                                     csv_double(er.score)};
      for (double r : er.returns) cells.push_back(csv_double(r));
      eval_log.row(cells);
      events.line("seed " + seed_cell + " step " + step_cell + " score " +
                  csv_double(er.score));

      if (cfg.bias_every > 0 && step % cfg.bias_every == 0) {
        BiasReport rep =
            estimate_bias(agent, *proto, er.beta_star, bias_cfg, bias_rng);
        bias_log.row({step_cell, csv_double(rep.mean), csv_double(rep.std)});
      }
      // Checkpoint the logs: a kill after this point keeps every finished row.
      train.flush();
      eval_log.flush();
      bias_log.flush();
    }
  }
  agent.save_checkpoint((dir / "checkpoint.bin").string());
  events.line("seed " + seed_cell + " finished");
}

void write_aggregate(const RunConfig& cfg, const RunOutcome& out) {
  std::vector<CsvTable> tables;
  for (const SeedOutcome& s : out.seeds) {
    if (!s.ok) continue;
    try {
      tables.push_back(read_csv((s.dir / "eval.csv").string()));
    } catch (const CsvError&) {
    }
  }
  if (tables.empty()) return;
  PlotSeries agg = aggregate_column(cfg.name, tables, "score");
  CsvLog log((out.dir / "aggregate.csv").string(), kAggregateHeader);
  const std::string n = std::to_string(tables.size());
  for (std::size_t i = 0; i < agg.x.size(); ++i)
    log.row({std::to_string(static_cast<long>(agg.x[i])),
             csv_double(agg.mean[i]), csv_double(agg.std[i]), n});
  log.flush();
}

void write_manifest(const RunConfig& cfg, const RunOutcome& out) {
  nlohmann::json m;
  m["name"] = cfg.name;
  m["env"] = cfg.env;
  m["variant"] = variant_name(cfg.agent.variant);
  m["config_hash"] = config_hash(cfg);
  m["base_seed"] = cfg.base_seed;
  m["total_steps"] = cfg.total_steps;
  m["csv_schema_version"] = kCsvSchemaVersion;
  m["csv"] = {{"train", kTrainHeader},
              {"eval", eval_header(cfg.eval_grid)},
              {"bias", kBiasHeader},
              {"aggregate", kAggregateHeader}};
  m["versions"] = {
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__}};
  nlohmann::json seeds = nlohmann::json::array();
  for (const SeedOutcome& s : out.seeds)
    seeds.push_back({{"index", s.index},
                     {"master_seed", s.master_seed},
                     {"dir", s.dir.filename().string()},
                     {"ok", s.ok},
                     {"error", s.error}});
  m["seeds"] = seeds;
  std::ofstream f(out.dir / "manifest.json");
  f << m.dump(2) << '\n';
}

}  // namespace

std::filesystem::path resolve_out_root(const RunConfig& cfg) {
  if (const char* env = std::getenv("RAC_OUT_ROOT"); env && *env)
    return fs::path(env);
  return fs::path(cfg.out_dir);
}

SeedOutcome run_seed(const RunConfig& cfg, int seed_index,
                     const std::filesystem::path& dir) {
  SeedOutcome out;
  out.index = seed_index;
  out.master_seed = cfg.base_seed + static_cast<std::uint64_t>(seed_index);
  out.dir = dir;
  fs::create_directories(dir);
  EventLog events(dir / "events.log");
  try {
    worker_loop(cfg, seed_index, dir, events);
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
    events.line(std::string("error: ") + e.what());
  }
  return out;
}

RunOutcome run_experiment(const RunConfig& cfg) {
  RunOutcome out;
  out.dir = resolve_out_root(cfg) / cfg.name;
  fs::create_directories(out.dir);
  save_config(cfg, (out.dir / "config.ini").string());

  out.seeds.resize(static_cast<std::size_t>(cfg.seeds));
  std::vector<std::thread> workers;
  workers.reserve(out.seeds.size());
  for (int i = 0; i < cfg.seeds; ++i) {
    fs::path dir = out.dir / fmt_seed(i);
    workers.emplace_back([&cfg, i, dir, &out] {
      out.seeds[static_cast<std::size_t>(i)] = run_seed(cfg, i, dir);
    });
  }
  for (std::thread& w : workers) w.join();

  out.ok = true;
  for (const SeedOutcome& s : out.seeds) out.ok = out.ok && s.ok;
  write_aggregate(cfg, out);
  write_manifest(cfg, out);
  return out;
}

}  // namespace rac
