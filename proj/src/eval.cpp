#include "rac/eval.hpp"

#include <cmath>
#include <stdexcept>

namespace rac {

std::vector<double> beta_grid(double b, int H) {
  if (!(b > 0.0) || H < 1)
    throw std::invalid_argument("beta_grid: need b > 0 and H >= 1");
  std::vector<double> grid(static_cast<std::size_t>(H));
  for (int i = 1; i <= H; ++i)
    grid[static_cast<std::size_t>(i - 1)] = b / H * i;
  return grid;
}

std::vector<double> ratio_grid(double b, int H) {
  if (!(b >= 1.0) || H < 1)
    throw std::invalid_argument("ratio_grid: need b >= 1 and H >= 1");
  std::vector<double> grid(static_cast<std::size_t>(H));
  for (int i = 1; i <= H; ++i)
    grid[static_cast<std::size_t>(i - 1)] = 1.0 + (b - 1.0) / H * i;
  return grid;
}

double evaluate_policy(const PolicyFn& pi, const Env& proto, int episodes,
                       Rng& rng) {
  if (episodes < 1)
    throw std::invalid_argument("evaluate_policy: need episodes >= 1");
  double acc = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    auto env = proto.clone();
    VectorXd obs = env->reset(rng);
    bool done = false;
    while (!done) {
      const EnvStep s = env->step(pi(obs), rng);
      acc += s.reward;
      obs = s.obs;
      done = s.done;
    }
  }
  return acc / episodes;
}

EvalResult evaluate(const RacAgent& agent, const Env& proto,
                    const EvalProtocol& protocol, Rng& rng) {
  const double edge = std::isnan(protocol.grid_edge)
                          ? agent.config().explore_range.right
                          : protocol.grid_edge;
  EvalResult res;
  res.beta_values = agent.config().variant == Variant::kInTarget
                        ? ratio_grid(edge, protocol.grid_size)
                        : beta_grid(edge, protocol.grid_size);
  res.returns.reserve(res.beta_values.size());

  for (std::size_t i = 0; i < res.beta_values.size(); ++i) {
    const double beta = res.beta_values[i];
    PolicyFn pi = [&agent, beta](const VectorXd& obs) {
      return agent.act_exploit(obs, beta);
    };
    res.returns.push_back(
        evaluate_policy(pi, proto, protocol.episodes, rng));
    if (i == 0 || res.returns[i] > res.score) {
      res.score = res.returns[i];
      res.beta_star = beta;
      res.beta_index = static_cast<int>(i);
    }
  }
  return res;
}

namespace {

struct VisitedPair {
  VectorXd snapshot;  // environment state before the action was applied
  VectorXd obs;
  VectorXd action;
};

double rollout_return(const Env& proto, const VisitedPair& pair,
                      const PolicyFn& pi, double gamma, long max_steps,
                      Rng& rng) {
  auto env = proto.clone();
  env->restore(pair.snapshot);
  double acc = 0.0;
  double disc = 1.0;
  VectorXd action = pair.action;
  for (long t = 0; t < max_steps; ++t) {
    const EnvStep s = env->step(action, rng);
    acc += disc * s.reward;
    if (s.done) break;
    disc *= gamma;
    action = pi(s.obs);
  }
  return acc;
}

}  // namespace

BiasReport estimate_bias_with(const PolicyFn& pi, const CriticFn& critic,
                              const Env& proto, const BiasConfig& cfg,
                              Rng& rng) {
  if (cfg.target_pairs < 2 || cfg.collect_pairs < cfg.target_pairs ||
      cfg.rollouts < 1 || cfg.max_steps < 1)
    throw std::invalid_argument("estimate_bias: bad sample counts");

  // 1. on-policy visitation
  std::vector<VisitedPair> visited;
  visited.reserve(static_cast<std::size_t>(cfg.collect_pairs));
  {
    auto env = proto.clone();
    VectorXd obs = env->reset(rng);
    while (visited.size() < static_cast<std::size_t>(cfg.collect_pairs)) {
      VisitedPair p;
      p.snapshot = env->snapshot();
      p.obs = obs;
      p.action = pi(obs);
      const EnvStep s = env->step(p.action, rng);
      visited.push_back(std::move(p));
      obs = s.done ? env->reset(rng) : s.obs;
    }
  }

  // 2. target pairs without repetition (partial Fisher-Yates)
  std::vector<std::size_t> order(visited.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int k = 0; k < cfg.target_pairs; ++k) {
    const auto r = static_cast<std::size_t>(k) +
                   static_cast<std::size_t>(rng.integer(order.size() -
                                                        static_cast<std::size_t>(k)));
    std::swap(order[static_cast<std::size_t>(k)], order[r]);
  }

  // 3. Monte Carlo ground truth per target pair
  VectorXd truth(cfg.target_pairs), q(cfg.target_pairs);
  for (int k = 0; k < cfg.target_pairs; ++k) {
    const VisitedPair& pair = visited[order[static_cast<std::size_t>(k)]];
    double acc = 0.0;
    for (int r = 0; r < cfg.rollouts; ++r)
      acc += rollout_return(proto, pair, pi, cfg.gamma, cfg.max_steps, rng);
    truth(k) = acc / cfg.rollouts;
    q(k) = critic(pair.obs, pair.action);
  }

  // 4. normalization and the pair statistics
  BiasReport rep;
  rep.pairs = cfg.target_pairs;
  const double denom = std::abs(truth.mean());
  rep.degenerate = denom < 1e-8;
  const VectorXd err = (q - truth) / (rep.degenerate ? 1.0 : denom);
  const auto ms = ensemble_mean_std(err);
  rep.mean = ms.mean;
  rep.std = ms.std;
  return rep;
}

BiasReport estimate_bias(const RacAgent& agent, const Env& proto,
                         double beta_star, const BiasConfig& cfg, Rng& rng) {
  PolicyFn pi = [&agent, beta_star](const VectorXd& obs) {
    return agent.act_exploit(obs, beta_star);
  };
  CriticFn critic = [&agent, beta_star](const VectorXd& obs,
                                        const VectorXd& act) {
    return agent.mean_q(obs, act, beta_star);
  };
  BiasReport rep = estimate_bias_with(pi, critic, proto, cfg, rng);
  rep.beta_star = beta_star;
  return rep;
}

}  // namespace rac
