#ifndef RAC_ENV_HPP
#define RAC_ENV_HPP

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "rac/rng.hpp"

namespace rac {

using Eigen::VectorXd;

struct EnvStep {
  VectorXd obs;
  double reward = 0.0;
  bool done = false;
};

// Minimal episodic interface. Actions live in [-1,1]^act_dim. snapshot() /
// restore() expose the full internal state so value-bias rollouts can restart
// from an arbitrary visited state-action pair.
class Env {
 public:
  virtual ~Env() = default;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual VectorXd reset(Rng& rng) = 0;
  virtual EnvStep step(const VectorXd& action, Rng& rng) = 0;
  virtual VectorXd snapshot() const = 0;
  virtual void restore(const VectorXd& state) = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
};

// ----------------------------------------------------------------------------
// 10-state chain MDP used by the tabular estimation-bias study.
//
// States 0..9; 0 and 9 are absorbing, episodes start at state 1.
//   Left  from i in {1..7}: -> i+1, reward ~ U(-1,1)
//   Left  from 8:           -> 9,   reward 1, terminal
//   Right from i in {1..8}: -> 0,   reward 0.1, terminal
// The only positive-value policy is to walk the whole chain to state 9.
// ----------------------------------------------------------------------------

enum class ChainAction { kLeft = 0, kRight = 1 };

class ChainMdp {
 public:
  static constexpr int kNumStates = 10;
  static constexpr int kStart = 1;
  static constexpr int kOptimalTerminal = 9;
  static constexpr int kLowTerminal = 0;

  int reset() {
    state_ = kStart;
    terminal_ = false;
    return state_;
  }

  struct Step {
    int next_state;
    double reward;
    bool done;
  };
  Step step(ChainAction a, Rng& rng);

  int state() const { return state_; }
  bool terminal() const { return terminal_; }
  void restore(int state, bool terminal) {
    state_ = state;
    terminal_ = terminal;
  }

 private:
  int state_ = kStart;
  bool terminal_ = false;
};

// Continuous-facing wrapper: one-hot observations, 1-dim action where
// a < 0 selects Left and a >= 0 selects Right.
class ChainMdpEnv final : public Env {
 public:
  int obs_dim() const override { return ChainMdp::kNumStates; }
  int act_dim() const override { return 1; }
  VectorXd reset(Rng& rng) override;
  EnvStep step(const VectorXd& action, Rng& rng) override;
  VectorXd snapshot() const override;
  void restore(const VectorXd& state) override;
  std::unique_ptr<Env> clone() const override {
    return std::make_unique<ChainMdpEnv>(*this);
  }

  static VectorXd one_hot(int state);

 private:
  ChainMdp mdp_;
};

// ----------------------------------------------------------------------------
// Point-mass toy: position/velocity integrator with quadratic cost.
//   x' = x + v*dt, v' = v + a*dt, reward = -|x'-goal|^2 - 0.01*|a|^2
// Episodes truncate at `horizon` steps. Deterministic given (state, action);
// the only randomness is the reset position.
// ----------------------------------------------------------------------------

struct PointMassParams {
  int dim = 1;
  double dt = 0.05;
  int horizon = 200;
  double goal = 1.0;
  double pos_bound = 4.0;
  double vel_bound = 2.0;
  double action_scale = 1.0;
  double reset_lo = -2.0;
  double reset_hi = 0.0;
};

class PointMassEnv final : public Env {
 public:
  explicit PointMassEnv(const PointMassParams& p = {});
  int obs_dim() const override { return 2 * params_.dim; }
  int act_dim() const override { return params_.dim; }
  VectorXd reset(Rng& rng) override;
  EnvStep step(const VectorXd& action, Rng& rng) override;
  VectorXd snapshot() const override;
  void restore(const VectorXd& state) override;
  std::unique_ptr<Env> clone() const override {
    return std::make_unique<PointMassEnv>(*this);
  }

  const PointMassParams& params() const { return params_; }
  // Deterministic reset to a given start position (test/oracle hook).
  VectorXd reset_to(const VectorXd& x0);

 private:
  VectorXd observation() const;
  PointMassParams params_;
  VectorXd x_, v_;
  int t_ = 0;
};

// Factory keyed by the config-facing environment name.
std::unique_ptr<Env> make_env(const std::string& name,
                              const PointMassParams& pm = {});

}  // namespace rac

#endif
