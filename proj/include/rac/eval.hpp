#ifndef RAC_EVAL_HPP
#define RAC_EVAL_HPP

#include <functional>
#include <vector>

#include "rac/agent.hpp"
#include "rac/env.hpp"
#include "rac/rng.hpp"

namespace rac {

// ----------------------------------------------------------------------------
// Evaluation over the discrete conditioner family, and the Monte Carlo
// normalized value-bias estimator. Both operate on fresh clones of a
// prototype environment and never mutate the agent.
// ----------------------------------------------------------------------------

// H evenly spaced values (b/H)*i for i = 1..H: excludes 0, ends at b.
std::vector<double> beta_grid(double b, int H);

// Subset-ratio grid for the in-target variant: 1 + ((b-1)/H)*i, staying in
// the valid k >= 1 region and ending at b.
std::vector<double> ratio_grid(double b, int H);

struct EvalProtocol {
  int episodes = 10;  // per grid policy
  int grid_size = 12; // H
  // Right edge of the evaluation grid; NaN means "the agent's exploration
  // range right edge".
  double grid_edge = std::numeric_limits<double>::quiet_NaN();
};

struct EvalResult {
  double score = 0.0;      // max over the grid of per-policy mean returns
  double beta_star = 0.0;  // winning conditioner (smallest on ties)
  int beta_index = 0;
  std::vector<double> beta_values;
  std::vector<double> returns;  // mean undiscounted return per grid value
};

using PolicyFn = std::function<VectorXd(const VectorXd& obs)>;

// Mean undiscounted return of a deterministic policy over `episodes` fresh
// episodes on clones of `proto`.
double evaluate_policy(const PolicyFn& pi, const Env& proto, int episodes,
                       Rng& rng);

// Runs protocol.episodes deterministic-policy episodes per grid value on
// clones of `proto`; score is the best per-value mean.
EvalResult evaluate(const RacAgent& agent, const Env& proto,
                    const EvalProtocol& protocol, Rng& rng);

struct BiasConfig {
  int collect_pairs = 100;  // on-policy pairs gathered from the environment
  int target_pairs = 20;    // sampled from those without repetition
  int rollouts = 20;        // Monte Carlo rollouts per target pair
  long max_steps = 1500;    // per-rollout step cap
  double gamma = 0.99;
};

struct BiasReport {
  double mean = 0.0;  // mean normalized bias over target pairs
  double std = 0.0;   // Bessel std over target pairs
  double beta_star = 0.0;
  int pairs = 0;
  bool degenerate = false;  // |denominator| < 1e-8; differences left raw
};

using CriticFn = std::function<double(const VectorXd& obs, const VectorXd& act)>;

// Core estimator, parameterized on the policy and the critic read so oracle
// critics can be substituted in tests:
//   1. run `pi` on a clone of proto, recording (state snapshot, obs, action)
//      for collect_pairs consecutive steps (resetting on episode end);
//   2. draw target_pairs of them without repetition;
//   3. per target pair, average `rollouts` discounted returns of: restore the
//      snapshot, replay the recorded action, then follow `pi`, capped at
//      max_steps -> ground truth Q(s, a);
//   4. normalized bias per pair = (critic(s,a) - Q(s,a)) / |mean of truths|;
//      report mean and Bessel std. A denominator below 1e-8 flags the report
//      degenerate and skips the normalization.
BiasReport estimate_bias_with(const PolicyFn& pi, const CriticFn& critic,
                              const Env& proto, const BiasConfig& cfg,
                              Rng& rng);

// Agent front-end: deterministic policy and mean online critic at beta_star.
BiasReport estimate_bias(const RacAgent& agent, const Env& proto,
                         double beta_star, const BiasConfig& cfg, Rng& rng);

}  // namespace rac

#endif
