#include "rac/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace rac {
namespace {

constexpr char kCheckpointMagic[8] = {'R', 'A', 'C', 'C', 'K', 'P', 'T', '1'};

Eigen::RowVectorXd log_row(const VectorXd& cond) {
  return cond.array().log().matrix().transpose();
}

void check_range(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("agent config: " + what);
}

}  // namespace

// ---------------------------------------------------------------------------
// variant names

Variant parse_variant(const std::string& name) {
  if (name == "rac-sac") return Variant::kRacSac;
  if (name == "rac-td3") return Variant::kRacTd3;
  if (name == "vanilla") return Variant::kVanilla;
  if (name == "in-target") return Variant::kInTarget;
  throw std::invalid_argument("unknown variant: " + name);
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kRacSac: return "rac-sac";
    case Variant::kRacTd3: return "rac-td3";
    case Variant::kVanilla: return "vanilla";
    case Variant::kInTarget: return "in-target";
  }
  throw std::logic_error("bad variant enum");
}

AgentConfig AgentConfig::defaults(Variant v) {
  AgentConfig cfg;
  cfg.variant = v;
  if (v == Variant::kInTarget) {
    cfg.train_range = {1.0, 1.5};
    cfg.explore_range = {1.0, 2.0};
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// TemperatureModel

TemperatureModel::TemperatureModel(int hidden, double xi, Rng& init)
    : conditioned_(true),
      net_({1, hidden, 1}, OutputActivation::kIdentity, init),
      xi_(xi) {
  adam_ = AdamState(net_.param_count());
}

TemperatureModel::TemperatureModel(double log_alpha_init)
    : conditioned_(false),
      log_alpha_(VectorXd::Constant(1, log_alpha_init)),
      adam_(1) {}

double TemperatureModel::alpha(double log_b) const {
  if (!conditioned_) return std::exp(log_alpha_(0));
  return std::exp(net_.predict1(VectorXd::Constant(1, log_b))(0) + xi_);
}

VectorXd TemperatureModel::alpha_row(const Eigen::RowVectorXd& log_b) const {
  if (!conditioned_)
    return VectorXd::Constant(log_b.size(), std::exp(log_alpha_(0)));
  const MatrixXd t = net_.predict(log_b);  // (1 x B)
  return (t.row(0).transpose().array() + xi_).exp();
}

TemperatureModel::LossGrad TemperatureModel::loss_grad(
    const Eigen::RowVectorXd& log_b, const VectorXd& log_pi,
    double target_entropy) {
  const auto B = log_pi.size();
  LossGrad out;
  if (!conditioned_) {
    const double a = std::exp(log_alpha_(0));
    const double m = (log_pi.array() + target_entropy).mean();
    out.loss = -a * m;
    out.grad = VectorXd::Constant(1, -a * m);  // d/dlog(alpha) of -alpha*m
    return out;
  }
  const MatrixXd& t = net_.forward(log_b);  // (1 x B)
  const VectorXd a = (t.row(0).transpose().array() + xi_).exp();
  const VectorXd h = log_pi.array() + target_entropy;
  out.loss = -(a.array() * h.array()).mean();
  MatrixXd upstream(1, B);
  upstream.row(0) =
      (-(a.array() * h.array()) / static_cast<double>(B)).transpose();
  out.grad = net_.backward(upstream).params;
  return out;
}

double TemperatureModel::update(const Eigen::RowVectorXd& log_b,
                                const VectorXd& log_pi, double target_entropy,
                                double lr) {
  LossGrad lg = loss_grad(log_b, log_pi, target_entropy);
  if (conditioned_) {
    VectorXd p = net_.params();
    adam_step(p, lg.grad, adam_, lr);
    net_.set_params(p);
  } else {
    adam_step(log_alpha_, lg.grad, adam_, lr);
  }
  return lg.loss;
}

VectorXd TemperatureModel::params() const {
  return conditioned_ ? net_.params() : log_alpha_;
}

void TemperatureModel::set_params(const VectorXd& flat) {
  if (conditioned_) {
    net_.set_params(flat);
  } else {
    if (flat.size() != 1)
      throw std::invalid_argument("scalar temperature expects one parameter");
    log_alpha_ = flat;
  }
}

double TemperatureModel::log_alpha() const {
  if (conditioned_)
    throw std::logic_error("log_alpha() is only defined for the scalar model");
  return log_alpha_(0);
}

void TemperatureModel::save(std::ostream& os) const {
  write_u64(os, conditioned_ ? 1 : 0);
  if (conditioned_)
    net_.save(os);
  else
    write_vec(os, log_alpha_);
  adam_.save(os);
}

void TemperatureModel::load(std::istream& is) {
  const bool cond = read_u64(is) != 0;
  if (cond != conditioned_)
    throw std::runtime_error("temperature checkpoint kind mismatch");
  if (conditioned_)
    net_.load(is);
  else
    log_alpha_ = read_vec(is);
  adam_.load(is);
}

// ---------------------------------------------------------------------------
// RacAgent

RacAgent::RacAgent(const AgentConfig& cfg, int obs_dim, int act_dim,
                   std::uint64_t master_seed)
    : cfg_(cfg),
      obs_dim_(obs_dim),
      act_dim_(act_dim),
      replay_(cfg.replay_capacity),
      exploration_(Rng::child(master_seed, "exploration")),
      beta_(Rng::child(master_seed, "beta")),
      noise_(Rng::child(master_seed, "noise")),
      minibatch_(Rng::child(master_seed, "minibatch")),
      subset_(Rng::child(master_seed, "subset")) {
  check_range(obs_dim >= 1 && act_dim >= 1, "environment dimensions");
  check_range(cfg_.n_critics >= 2, "need at least two critics");
  check_range(cfg_.utd >= 1, "utd must be >= 1");
  check_range(cfg_.batch_size >= 1, "batch_size must be >= 1");
  check_range(cfg_.replay_capacity >= 1, "replay_capacity must be >= 1");
  check_range(cfg_.gamma >= 0.0 && cfg_.gamma <= 1.0, "gamma out of range");
  check_range(cfg_.rho > 0.0 && cfg_.rho <= 1.0, "rho out of range");
  check_range(cfg_.initial_random_steps >= 0, "initial_random_steps");
  check_range(cfg_.train_range.left > 0.0 &&
                  cfg_.train_range.left <= cfg_.train_range.right,
              "train conditioner range");
  check_range(cfg_.explore_range.left > 0.0 &&
                  cfg_.explore_range.left <= cfg_.explore_range.right,
              "explore conditioner range");
  if (cfg_.variant == Variant::kInTarget) {
    check_range(cfg_.train_range.left >= 1.0 && cfg_.explore_range.left >= 1.0,
                "in-target ratios must be >= 1");
    check_range(static_cast<int>(std::floor(cfg_.train_range.right)) + 1 <=
                    cfg_.n_critics,
                "subset size can exceed the ensemble");
  }
  if (cfg_.variant == Variant::kVanilla)
    check_range(cfg_.vanilla_beta >= 0.0, "vanilla_beta must be >= 0");

  target_entropy_ = std::isnan(cfg_.target_entropy)
                        ? -static_cast<double>(act_dim)
                        : cfg_.target_entropy;

  const bool cond = conditioned();
  const int actor_in = obs_dim + (cond ? 1 : 0);
  const int critic_in = obs_dim + act_dim + (cond ? 1 : 0);
  const bool td3 = cfg_.variant == Variant::kRacTd3;

  Rng init = Rng::child(master_seed, "init");
  std::vector<int> actor_dims{actor_in};
  actor_dims.insert(actor_dims.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  actor_dims.push_back(td3 ? act_dim : 2 * act_dim);
  actor_ = DenseNet(actor_dims,
                    td3 ? OutputActivation::kTanh : OutputActivation::kIdentity,
                    init);
  actor_adam_ = AdamState(actor_.param_count());

  std::vector<int> critic_dims{critic_in};
  critic_dims.insert(critic_dims.end(), cfg_.hidden.begin(),
                     cfg_.hidden.end());
  critic_dims.push_back(1);
  critics_.reserve(static_cast<std::size_t>(cfg_.n_critics));
  for (int i = 0; i < cfg_.n_critics; ++i) {
    critics_.emplace_back(critic_dims, OutputActivation::kIdentity, init);
    critic_adam_.emplace_back(critics_.back().param_count());
  }
  targets_ = critics_;  // start as exact copies

  switch (cfg_.variant) {
    case Variant::kRacSac:
    case Variant::kInTarget:
      temp_ = TemperatureModel(cfg_.temp_hidden, cfg_.xi, init);
      break;
    case Variant::kVanilla:
      temp_ = TemperatureModel(cfg_.vanilla_log_alpha_init);
      break;
    case Variant::kRacTd3:
      temp_ = TemperatureModel(0.0);  // placeholder, never used
      break;
  }
}

MatrixXd RacAgent::actor_input(const MatrixXd& obs,
                               const Eigen::RowVectorXd& log_cond) const {
  if (!conditioned()) return obs;
  MatrixXd x(obs.rows() + 1, obs.cols());
  x.topRows(obs.rows()) = obs;
  x.row(obs.rows()) = log_cond;
  return x;
}

MatrixXd RacAgent::critic_input(const MatrixXd& obs, const MatrixXd& act,
                                const Eigen::RowVectorXd& log_cond) const {
  MatrixXd x(obs.rows() + act.rows() + (conditioned() ? 1 : 0), obs.cols());
  x.topRows(obs.rows()) = obs;
  x.middleRows(obs.rows(), act.rows()) = act;
  if (conditioned()) x.row(obs.rows() + act.rows()) = log_cond;
  return x;
}

RacAgent::PolicySample RacAgent::sample_policy(
    const DenseNet& net, const MatrixXd& obs,
    const Eigen::RowVectorXd& log_cond, const MatrixXd& xi) const {
  const auto B = obs.cols();
  const MatrixXd out = net.predict(actor_input(obs, log_cond));
  PolicySample ps;
  ps.action.resize(act_dim_, B);
  ps.log_pi.resize(B);
  ps.params.reserve(static_cast<std::size_t>(B));
  ps.samples.reserve(static_cast<std::size_t>(B));
  for (Eigen::Index j = 0; j < B; ++j) {
    SquashedGaussianParams p{out.col(j).head(act_dim_),
                             clip_log_std(out.col(j).tail(act_dim_))};
    SquashedSample s = squashed_sample(p, xi.col(j));
    ps.action.col(j) = s.action;
    ps.log_pi(j) = s.log_prob;
    ps.params.push_back(std::move(p));
    ps.samples.push_back(std::move(s));
  }
  return ps;
}

VectorXd RacAgent::actor_single(const VectorXd& obs, double cond,
                                bool deterministic, Rng* noise) const {
  VectorXd x;
  if (conditioned()) {
    x.resize(obs.size() + 1);
    x.head(obs.size()) = obs;
    x(obs.size()) = log_scaled(cond);
  } else {
    x = obs;
  }
  if (cfg_.variant == Variant::kRacTd3) {
    VectorXd a = actor_.predict1(x);
    if (!deterministic) {
      for (Eigen::Index d = 0; d < a.size(); ++d)
        a(d) += noise->normal(0.0, cfg_.td3_explore_sigma);
      a = a.cwiseMax(-1.0).cwiseMin(1.0);
    }
    return a;
  }
  const VectorXd out = actor_.predict1(x);
  SquashedGaussianParams p{out.head(act_dim_),
                           clip_log_std(out.tail(act_dim_))};
  if (deterministic) return squashed_mode(p);
  VectorXd xi(act_dim_);
  for (Eigen::Index d = 0; d < xi.size(); ++d) xi(d) = noise->normal();
  return squashed_sample(p, xi).action;
}

VectorXd RacAgent::act_explore(const VectorXd& obs) {
  if (env_steps_ < cfg_.initial_random_steps) {
    VectorXd a(act_dim_);
    for (Eigen::Index d = 0; d < a.size(); ++d)
      a(d) = exploration_.uniform(-1.0, 1.0);
    return a;
  }
  const double cond = cfg_.variant == Variant::kVanilla
                          ? cfg_.vanilla_beta
                          : cfg_.explore_range.sample(beta_);
  return actor_single(obs, cond, false, &exploration_);
}

VectorXd RacAgent::act_exploit(const VectorXd& obs, double cond) const {
  return actor_single(obs, cond, true, nullptr);
}

void RacAgent::observe(const Transition& t) {
  if (t.obs.size() != obs_dim_ || t.next_obs.size() != obs_dim_ ||
      t.action.size() != act_dim_)
    throw std::invalid_argument("transition dimensions do not match the agent");
  replay_.push(t);
  ++env_steps_;
}

UpdateDraws RacAgent::sample_update_draws(Eigen::Index batch) {
  UpdateDraws d;
  d.cond.resize(batch);
  if (cfg_.variant == Variant::kVanilla) {
    d.cond.setConstant(cfg_.vanilla_beta);
  } else {
    for (Eigen::Index j = 0; j < batch; ++j)
      d.cond(j) = cfg_.train_range.sample(beta_);
  }
  if (cfg_.variant == Variant::kRacTd3) {
    d.smooth.resize(act_dim_, batch);
    for (Eigen::Index j = 0; j < batch; ++j)
      d.smooth.col(j) = clipped_gaussian_noise(
          act_dim_, cfg_.td3_policy_sigma, cfg_.td3_policy_clip, noise_);
  } else {
    d.xi.resize(act_dim_, batch);
    for (Eigen::Index j = 0; j < batch; ++j)
      for (Eigen::Index i = 0; i < d.xi.rows(); ++i) d.xi(i, j) = noise_.normal();
  }
  if (cfg_.variant == Variant::kInTarget) {
    d.subsets.resize(static_cast<std::size_t>(batch));
    const int n = cfg_.n_critics;
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < batch; ++j) {
      const int m = sample_subset_size(d.cond(j), subset_);
      std::iota(idx.begin(), idx.end(), 0);
      auto& chosen = d.subsets[static_cast<std::size_t>(j)];
      chosen.resize(static_cast<std::size_t>(m));
      for (int k = 0; k < m; ++k) {
        const auto r =
            k + static_cast<int>(subset_.integer(static_cast<std::uint64_t>(n - k)));
        std::swap(idx[static_cast<std::size_t>(k)],
                  idx[static_cast<std::size_t>(r)]);
        chosen[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k)];
      }
    }
  }
  return d;
}

VectorXd RacAgent::compute_targets(const Batch& b, const UpdateDraws& d) const {
  const auto B = b.size();
  const Eigen::RowVectorXd lc =
      conditioned() ? Eigen::RowVectorXd(log_row(d.cond)) : Eigen::RowVectorXd();

  MatrixXd next_act;
  VectorXd log_pi = VectorXd::Zero(B);
  if (cfg_.variant == Variant::kRacTd3) {
    next_act = actor_.predict(actor_input(b.next_obs, lc)) + d.smooth;
    next_act = next_act.cwiseMax(-1.0).cwiseMin(1.0);
  } else {
    PolicySample ps = sample_policy(actor_, b.next_obs, lc, d.xi);
    next_act = std::move(ps.action);
    log_pi = std::move(ps.log_pi);
  }

  MatrixXd q(cfg_.n_critics, B);
  const MatrixXd xq = critic_input(b.next_obs, next_act, lc);
  for (int i = 0; i < cfg_.n_critics; ++i)
    q.row(i) = targets_[static_cast<std::size_t>(i)].predict(xq).row(0);

  VectorXd boot(B);
  switch (cfg_.variant) {
    case Variant::kRacSac:
    case Variant::kVanilla: {
      VectorXd mean, std;
      ensemble_mean_std_cols(q, mean, std);
      const VectorXd alpha = conditioned()
                                 ? temp_.alpha_row(lc)
                                 : temp_.alpha_row(Eigen::RowVectorXd::Zero(B));
      boot = mean.array() - d.cond.array() * std.array() -
             alpha.array() * log_pi.array();
      break;
    }
    case Variant::kRacTd3: {
      VectorXd mean, std;
      ensemble_mean_std_cols(q, mean, std);
      boot = mean.array() - d.cond.array() * std.array();
      break;
    }
    case Variant::kInTarget: {
      const VectorXd alpha = temp_.alpha_row(lc);
      for (Eigen::Index j = 0; j < B; ++j) {
        const auto& sub = d.subsets[static_cast<std::size_t>(j)];
        double m = q(sub.front(), j);
        for (int i : sub) m = std::min(m, q(i, j));
        boot(j) = m - alpha(j) * log_pi(j);
      }
      break;
    }
  }

  VectorXd y = b.reward.array() +
               cfg_.gamma * (1.0 - b.done.array()) * boot.array();
  if (!y.allFinite()) {
    std::ostringstream msg;
    msg << variant_name(cfg_.variant) << " target diverged at env step "
        << env_steps_ << " (update " << updates_done_ << ")";
    throw std::runtime_error(msg.str());
  }
  return y;
}

RacAgent::CriticLossGrad RacAgent::critic_loss_grad(const Batch& b,
                                                    const UpdateDraws& d,
                                                    const VectorXd& y) {
  const auto B = b.size();
  const Eigen::RowVectorXd lc =
      conditioned() ? Eigen::RowVectorXd(log_row(d.cond)) : Eigen::RowVectorXd();
  const MatrixXd xq = critic_input(b.obs, b.action, lc);
  CriticLossGrad out;
  out.grads.reserve(critics_.size());
  out.member_loss.reserve(critics_.size());
  for (auto& critic : critics_) {
    const MatrixXd& q = critic.forward(xq);  // (1 x B)
    const Eigen::RowVectorXd diff = q.row(0) - y.transpose();
    out.member_loss.push_back(diff.squaredNorm() / static_cast<double>(B));
    const MatrixXd upstream = (2.0 / static_cast<double>(B)) * diff;
    out.grads.push_back(critic.backward(upstream).params);
  }
  out.loss = std::accumulate(out.member_loss.begin(), out.member_loss.end(),
                             0.0) /
             static_cast<double>(out.member_loss.size());
  return out;
}

RacAgent::LossGrad RacAgent::actor_loss_grad(const Batch& b,
                                             const UpdateDraws& d) {
  return actor_loss_grad(b, d, nullptr);
}

RacAgent::LossGrad RacAgent::actor_loss_grad(const Batch& b,
                                             const UpdateDraws& d,
                                             VectorXd* log_pi_out) {
  const auto B = b.size();
  const double invB = 1.0 / static_cast<double>(B);
  const Eigen::RowVectorXd lc =
      conditioned() ? Eigen::RowVectorXd(log_row(d.cond)) : Eigen::RowVectorXd();
  LossGrad out;

  if (cfg_.variant == Variant::kRacTd3) {
    const MatrixXd& act = actor_.forward(actor_input(b.obs, lc));
    const MatrixXd xq = critic_input(b.obs, act, lc);
    VectorXd v = VectorXd::Zero(B);
    MatrixXd dvda = MatrixXd::Zero(act_dim_, B);
    const double invN = 1.0 / static_cast<double>(cfg_.n_critics);
    for (auto& critic : critics_) {
      const MatrixXd& q = critic.forward(xq);
      v += invN * q.row(0).transpose();
      dvda += invN * critic.backward(MatrixXd::Ones(1, B))
                         .input.middleRows(obs_dim_, act_dim_);
    }
    out.loss = -v.mean();
    out.grad = actor_.backward(-invB * dvda).params;
    if (log_pi_out) *log_pi_out = VectorXd::Zero(B);
    return out;
  }

  // stochastic-actor family: L = mean( alpha*log_pi - mean_i Q_i(s, a) )
  const MatrixXd& raw = actor_.forward(actor_input(b.obs, lc));
  std::vector<SquashedGaussianParams> params;
  std::vector<SquashedSample> samples;
  std::vector<VectorXd> masks;
  params.reserve(static_cast<std::size_t>(B));
  samples.reserve(static_cast<std::size_t>(B));
  masks.reserve(static_cast<std::size_t>(B));
  MatrixXd act(act_dim_, B);
  VectorXd log_pi(B);
  for (Eigen::Index j = 0; j < B; ++j) {
    const VectorXd raw_ls = raw.col(j).tail(act_dim_);
    SquashedGaussianParams p{raw.col(j).head(act_dim_), clip_log_std(raw_ls)};
    SquashedSample s = squashed_sample(p, d.xi.col(j));
    act.col(j) = s.action;
    log_pi(j) = s.log_prob;
    masks.push_back(clip_log_std_mask(raw_ls));
    params.push_back(std::move(p));
    samples.push_back(std::move(s));
  }

  const VectorXd alpha = conditioned()
                             ? temp_.alpha_row(lc)
                             : temp_.alpha_row(Eigen::RowVectorXd::Zero(B));
  const MatrixXd xq = critic_input(b.obs, act, lc);
  VectorXd v = VectorXd::Zero(B);
  MatrixXd dvda = MatrixXd::Zero(act_dim_, B);
  const double invN = 1.0 / static_cast<double>(cfg_.n_critics);
  for (auto& critic : critics_) {
    const MatrixXd& q = critic.forward(xq);
    v += invN * q.row(0).transpose();
    dvda += invN * critic.backward(MatrixXd::Ones(1, B))
                       .input.middleRows(obs_dim_, act_dim_);
  }

  out.loss = (alpha.array() * log_pi.array() - v.array()).mean();
  MatrixXd upstream(2 * act_dim_, B);
  for (Eigen::Index j = 0; j < B; ++j) {
    const SquashGradients g =
        squashed_sample_gradients(params[static_cast<std::size_t>(j)],
                                  d.xi.col(j),
                                  samples[static_cast<std::size_t>(j)]);
    upstream.col(j).head(act_dim_) =
        invB * (alpha(j) * g.dlogp_dmean.array() -
                dvda.col(j).array() * g.daction_dmean.array());
    upstream.col(j).tail(act_dim_) =
        invB * masks[static_cast<std::size_t>(j)].array() *
        (alpha(j) * g.dlogp_dlogstd.array() -
         dvda.col(j).array() * g.daction_dlogstd.array());
  }
  out.grad = actor_.backward(upstream).params;
  if (log_pi_out) *log_pi_out = log_pi;
  return out;
}

TemperatureModel::LossGrad RacAgent::temp_loss_grad(const Batch& b,
                                                    const UpdateDraws& d) {
  if (cfg_.variant == Variant::kRacTd3)
    throw std::logic_error("rac-td3 has no temperature");
  const Eigen::RowVectorXd lc = conditioned()
                                    ? Eigen::RowVectorXd(log_row(d.cond))
                                    : Eigen::RowVectorXd::Zero(b.size());
  const PolicySample ps = sample_policy(actor_, b.obs, lc, d.xi);
  return temp_.loss_grad(lc, ps.log_pi, target_entropy_);
}

TrainDiagnostics RacAgent::train_step() {
  TrainDiagnostics diag;
  if (env_steps_ < cfg_.initial_random_steps || replay_.size() == 0)
    return diag;

  const double critic_lr = cfg_.critic_lr.at(env_steps_);
  const auto batch = static_cast<std::size_t>(cfg_.batch_size);
  for (int g = 0; g < cfg_.utd; ++g) {
    const Batch b = replay_.sample(batch, minibatch_);
    const UpdateDraws d = sample_update_draws(b.size());
    const VectorXd y = compute_targets(b, d);
    const CriticLossGrad cg = critic_loss_grad(b, d, y);
    for (int i = 0; i < cfg_.n_critics; ++i) {
      auto& critic = critics_[static_cast<std::size_t>(i)];
      VectorXd p = critic.params();
      adam_step(p, cg.grads[static_cast<std::size_t>(i)],
                critic_adam_[static_cast<std::size_t>(i)], critic_lr);
      critic.set_params(p);
      auto& target = targets_[static_cast<std::size_t>(i)];
      VectorXd tp = target.params();
      ema_update(tp, p, cfg_.rho);
      target.set_params(tp);
    }
    if (g == cfg_.utd - 1) {
      diag.critic_loss = cg.loss;
      diag.target_q_mean = y.mean();
    }
  }

  const Batch b = replay_.sample(batch, minibatch_);
  const UpdateDraws d = sample_update_draws(b.size());
  VectorXd log_pi;
  const LossGrad ag = actor_loss_grad(b, d, &log_pi);
  VectorXd p = actor_.params();
  adam_step(p, ag.grad, actor_adam_, cfg_.actor_lr);
  actor_.set_params(p);
  diag.actor_loss = ag.loss;

  if (cfg_.variant != Variant::kRacTd3) {
    const Eigen::RowVectorXd lc = conditioned()
                                      ? Eigen::RowVectorXd(log_row(d.cond))
                                      : Eigen::RowVectorXd::Zero(b.size());
    diag.alpha_mean = temp_.alpha_row(lc).mean();
    diag.temp_loss = temp_.update(lc, log_pi, target_entropy_, cfg_.temp_lr);
  }

  ++updates_done_;
  diag.updated = true;
  return diag;
}

double RacAgent::mean_q(const VectorXd& obs, const VectorXd& act,
                        double cond) const {
  VectorXd x(obs.size() + act.size() + (conditioned() ? 1 : 0));
  x.head(obs.size()) = obs;
  x.segment(obs.size(), act.size()) = act;
  if (conditioned()) x(obs.size() + act.size()) = log_scaled(cond);
  double acc = 0.0;
  for (const auto& critic : critics_) acc += critic.predict1(x)(0);
  return acc / static_cast<double>(critics_.size());
}

void RacAgent::save(std::ostream& os) const {
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u64(os, static_cast<std::uint64_t>(cfg_.variant));
  write_u64(os, static_cast<std::uint64_t>(obs_dim_));
  write_u64(os, static_cast<std::uint64_t>(act_dim_));
  write_u64(os, static_cast<std::uint64_t>(cfg_.n_critics));
  write_u64(os, static_cast<std::uint64_t>(env_steps_));
  write_u64(os, static_cast<std::uint64_t>(updates_done_));
  actor_.save(os);
  for (const auto& c : critics_) c.save(os);
  for (const auto& t : targets_) t.save(os);
  temp_.save(os);
  actor_adam_.save(os);
  for (const auto& a : critic_adam_) a.save(os);
  exploration_.save(os);
  beta_.save(os);
  noise_.save(os);
  minibatch_.save(os);
  subset_.save(os);
  replay_.save(os);
  if (!os) throw std::runtime_error("checkpoint write failed");
}

void RacAgent::load(std::istream& is) {
  char magic[sizeof(kCheckpointMagic)];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + sizeof(magic), kCheckpointMagic))
    throw std::runtime_error("not an agent checkpoint");
  const auto variant = static_cast<Variant>(read_u64(is));
  const auto obs = static_cast<int>(read_u64(is));
  const auto act = static_cast<int>(read_u64(is));
  const auto n = static_cast<int>(read_u64(is));
  if (variant != cfg_.variant || obs != obs_dim_ || act != act_dim_ ||
      n != cfg_.n_critics)
    throw std::runtime_error("checkpoint does not match the agent layout");
  env_steps_ = static_cast<long>(read_u64(is));
  updates_done_ = static_cast<long>(read_u64(is));
  actor_.load(is);
  for (auto& c : critics_) c.load(is);
  for (auto& t : targets_) t.load(is);
  temp_.load(is);
  actor_adam_.load(is);
  for (auto& a : critic_adam_) a.load(is);
  exploration_.load(is);
  beta_.load(is);
  noise_.load(is);
  minibatch_.load(is);
  subset_.load(is);
  replay_.load(is);
  if (!is) throw std::runtime_error("checkpoint read failed");
}

void RacAgent::save_checkpoint(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  save(os);
}

void RacAgent::load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  load(is);
}

}  // namespace rac
