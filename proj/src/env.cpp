#include "rac/env.hpp"

#include <cmath>
#include <stdexcept>

namespace rac {

ChainMdp::Step ChainMdp::step(ChainAction a, Rng& rng) {
  if (terminal_)
    throw std::logic_error("ChainMdp::step: episode already terminal");
  Step s{};
  if (a == ChainAction::kRight) {
    s.next_state = kLowTerminal;
    s.reward = 0.1;
    s.done = true;
  } else if (state_ == 8) {
    s.next_state = kOptimalTerminal;
    s.reward = 1.0;
    s.done = true;
  } else {
    s.next_state = state_ + 1;
    s.reward = rng.uniform(-1.0, 1.0);
    s.done = false;
  }
  state_ = s.next_state;
  terminal_ = s.done;
  return s;
}

VectorXd ChainMdpEnv::one_hot(int state) {
  VectorXd v = VectorXd::Zero(ChainMdp::kNumStates);
  v(state) = 1.0;
  return v;
}

VectorXd ChainMdpEnv::reset(Rng&) { return one_hot(mdp_.reset()); }

EnvStep ChainMdpEnv::step(const VectorXd& action, Rng& rng) {
  if (action.size() != 1)
    throw std::invalid_argument("ChainMdpEnv::step: expected 1-dim action");
  const ChainAction a =
      action(0) < 0.0 ? ChainAction::kLeft : ChainAction::kRight;
  const ChainMdp::Step s = mdp_.step(a, rng);
  return {one_hot(s.next_state), s.reward, s.done};
}

VectorXd ChainMdpEnv::snapshot() const {
  VectorXd v(2);
  v << static_cast<double>(mdp_.state()), mdp_.terminal() ? 1.0 : 0.0;
  return v;
}

void ChainMdpEnv::restore(const VectorXd& state) {
  if (state.size() != 2)
    throw std::invalid_argument("ChainMdpEnv::restore: bad snapshot");
  mdp_.restore(static_cast<int>(state(0)), state(1) != 0.0);
}

PointMassEnv::PointMassEnv(const PointMassParams& p) : params_(p) {
  if (p.dim <= 0 || p.horizon <= 0 || p.dt <= 0.0)
    throw std::invalid_argument("PointMassEnv: bad parameters");
  x_ = VectorXd::Zero(p.dim);
  v_ = VectorXd::Zero(p.dim);
}

VectorXd PointMassEnv::observation() const {
  VectorXd obs(2 * params_.dim);
  obs << x_, v_;
  return obs;
}

VectorXd PointMassEnv::reset(Rng& rng) {
  for (int d = 0; d < params_.dim; ++d)
    x_(d) = rng.uniform(params_.reset_lo, params_.reset_hi);
  v_.setZero();
  t_ = 0;
  return observation();
}

VectorXd PointMassEnv::reset_to(const VectorXd& x0) {
  if (x0.size() != params_.dim)
    throw std::invalid_argument("PointMassEnv::reset_to: dim mismatch");
  x_ = x0;
  v_.setZero();
  t_ = 0;
  return observation();
}

EnvStep PointMassEnv::step(const VectorXd& action, Rng&) {
  if (action.size() != params_.dim)
    throw std::invalid_argument("PointMassEnv::step: action dim mismatch");
  if (!action.allFinite())
    throw std::invalid_argument("PointMassEnv::step: non-finite action");
  const VectorXd a =
      params_.action_scale * action.cwiseMax(-1.0).cwiseMin(1.0);
  x_ += params_.dt * v_;
  v_ += params_.dt * a;
  x_ = x_.cwiseMax(-params_.pos_bound).cwiseMin(params_.pos_bound);
  v_ = v_.cwiseMax(-params_.vel_bound).cwiseMin(params_.vel_bound);
  t_ += 1;
  EnvStep s;
  s.reward = -(x_.array() - params_.goal).square().sum() -
             0.01 * a.squaredNorm();
  s.done = t_ >= params_.horizon;
  s.obs = observation();
  return s;
}

VectorXd PointMassEnv::snapshot() const {
  VectorXd v(2 * params_.dim + 1);
  v << x_, v_, static_cast<double>(t_);
  return v;
}

void PointMassEnv::restore(const VectorXd& state) {
  if (state.size() != 2 * params_.dim + 1)
    throw std::invalid_argument("PointMassEnv::restore: bad snapshot");
  x_ = state.head(params_.dim);
  v_ = state.segment(params_.dim, params_.dim);
  t_ = static_cast<int>(state(2 * params_.dim));
}

std::unique_ptr<Env> make_env(const std::string& name,
                              const PointMassParams& pm) {
  if (name == "chain-mdp") return std::make_unique<ChainMdpEnv>();
  if (name == "point-mass") return std::make_unique<PointMassEnv>(pm);
  throw std::invalid_argument("make_env: unknown environment '" + name + "'");
}

}  // namespace rac
