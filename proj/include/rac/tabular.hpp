#ifndef RAC_TABULAR_HPP
#define RAC_TABULAR_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "rac/env.hpp"
#include "rac/rng.hpp"

namespace rac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ----------------------------------------------------------------------------
// Tabular estimation-bias study on the 10-state chain MDP.
//
// Every agent maintains an ensemble of N Q-tables whose reads are perturbed
// with fresh uniform noise (a stand-in for function-approximation error).
// Baselines train with the in-target-minimization backup (min over a random
// pair of target reads) and explore Boltzmann-greedily on mean + beta*std;
// the punished variant trains one ensemble per beta-grid member on the
// uncertainty-punished backup and explores through its low-beta members.
// ----------------------------------------------------------------------------

struct TabularConfig {
  int n_tables = 10;          // ensemble size N
  double lr = 0.01;           // table learning rate
  double gamma = 0.9;
  double read_noise = 0.1;    // fresh read noise ~ U(-w, w)
  double init_lo = -5.0;
  double init_hi = 5.0;
  double boltzmann_temp = 0.1;
  std::size_t buffer_capacity = 5000;
  long warmup_steps = 5000;   // steps with uniform-random behavior (training runs throughout)
  int batch_size = 32;        // replayed transitions per environment step
  int lb_subset = 2;          // members min'd over in the baseline backup
  int beta_grid_size = 12;    // punished family: grid over (0, grid_max]
  double beta_grid_max = 0.8;
  double explore_beta_max = 0.3;  // behavior draws only from grid values <= this
  int bias_rollouts = 20;     // Monte Carlo rollouts for the Q-bias metric
};

// Ensemble of per-(state, action) tables with noisy reads.
class TabularEnsemble {
 public:
  TabularEnsemble(const TabularConfig& cfg, Rng& init);

  int n_tables() const { return static_cast<int>(tables_.size()); }
  double read_noisy(int member, int state, int action, Rng& rng) const;
  double read_clean(int member, int state, int action) const;
  double mean_clean(int state, int action) const;

  // mean / Bessel std over fresh noisy reads of all members.
  void noisy_stats(int state, int action, Rng& rng, double& mean,
                   double& std) const;

  void update(int member, int state, int action, double target);

  // In-target-minimization backup: r + gamma * max_a' min_{i in M} noisy read,
  // M a fresh random subset of `subset` distinct members.
  double lb_target(int state_next, bool done, double reward, int subset,
                   Rng& rng) const;

  // Uncertainty-punished backup: r + gamma * max_a' [mean - beta * std] over
  // fresh noisy reads of all members.
  double punished_target(int state_next, bool done, double reward, double beta,
                         Rng& rng) const;

 private:
  const TabularConfig* cfg_;
  std::vector<MatrixXd> tables_;  // each (states x 2)
  double noise_;
};

// Behavior score used by the baselines: per-action mean + beta*std of fresh
// noisy ensemble reads.
VectorXd behavior_q(const TabularEnsemble& ens, int state, double beta,
                    Rng& rng);

enum class TabularAgentKind { kLb, kQb, kRac };

struct TabularAgentSpec {
  TabularAgentKind kind = TabularAgentKind::kLb;
  double qb_beta = 0.0;  // behavior optimism weight for kQb
  std::string label() const;
};

// Parse "lb", "qb<beta>" (e.g. qb0.5, qb2), "rac".
TabularAgentSpec parse_tabular_agent(const std::string& name);

// Q-bias probe: `score(state, action)` evaluated at (start, greedy first
// action) minus the Monte Carlo discounted return of the greedy policy of
// `score` from the start state. The chain's zero-mean inner rewards are used
// as an exact control variate, so for a fixed greedy policy the subtraction
// removes all sampling variance and a truth-valued table probes to 0.
double tabular_q_bias(const std::function<double(int, int)>& score,
                      double gamma, int rollouts, Rng& rng);

// Per-checkpoint metrics. The visit frequency is a Monte-Carlo evaluation
// quantity: a greedy walk of the agent's reporting estimate either reaches
// state 9 or not (chain transitions are deterministic), so per seed it is a
// 0/1 indicator whose seed average is the plotted frequency. The low-value
// ratio is a behavior-stream quantity over a trailing 100-episode window.
struct TabularMetricsRow {
  long step = 0;
  double optimal_visit_freq = 0.0;  // greedy evaluation reaches state 9
  double low_value_ratio = 0.0;     // visits to states 2..8 per 9-termination, minus 7
  double q_bias = 0.0;              // reporting estimate minus MC ground truth at start
};

struct TabularRunResult {
  std::vector<TabularMetricsRow> rows;
};

// One seed of the study: behave, replay-train, checkpoint metrics every
// `checkpoint_every` env steps. Deterministic in (spec, cfg, seed).
TabularRunResult run_tabular_experiment(const TabularAgentSpec& spec,
                                        const TabularConfig& cfg,
                                        long total_steps, long checkpoint_every,
                                        std::uint64_t seed);

struct TabularStudyResult {
  std::vector<TabularRunResult> per_seed;   // seed i ran with base_seed + i
  std::vector<TabularMetricsRow> mean_rows; // per-checkpoint mean over seeds
};

// Multi-seed study; seeds run as independent parallel tasks. The seed mean of
// low_value_ratio skips NaN entries (seeds whose window has no optimal
// termination yet) and is NaN only if every seed's entry is.
TabularStudyResult run_tabular_study(const TabularAgentSpec& spec,
                                     const TabularConfig& cfg,
                                     long total_steps, long checkpoint_every,
                                     int n_seeds, std::uint64_t base_seed);

// Beta grid for the punished family: grid_max * i / grid_size, i = 1..size.
std::vector<double> tabular_beta_grid(const TabularConfig& cfg);

}  // namespace rac

#endif
