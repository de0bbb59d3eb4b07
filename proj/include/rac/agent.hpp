#ifndef RAC_AGENT_HPP
#define RAC_AGENT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "rac/distributions.hpp"
#include "rac/net.hpp"
#include "rac/replay.hpp"
#include "rac/rng.hpp"

namespace rac {

// ----------------------------------------------------------------------------
// Deep agent family. All four variants share the same skeleton: an ensemble
// of N critics with EMA target copies, every member regressed onto one shared
// uncertainty-aware target per minibatch, and a per-environment-step cadence
// of G critic updates followed by one actor and one temperature update.
//
//   rac-sac    stochastic actor, target = r + g*(mean - beta*std - alpha*logpi),
//              nets conditioned on log(beta), temperature net alpha(beta)
//   rac-td3    deterministic tanh actor with smoothed target actions,
//              target = r + g*(mean - beta*std), no entropy terms
//   vanilla    rac-sac with one constant beta, unconditioned nets and a
//              single learned scalar temperature
//   in-target  target = r + g*(min over a random critic subset - alpha*logpi),
//              conditioned on log(k) where k >= 1 sets the expected subset size
// ----------------------------------------------------------------------------

enum class Variant { kRacSac, kRacTd3, kVanilla, kInTarget };

// "rac-sac" | "rac-td3" | "vanilla" | "in-target"
Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);

// Defaults follow the shared hyperparameter set; `defaults(variant)` swaps in
// the variant-specific conditioner ranges. The ranges hold punishment weights
// for rac-sac/rac-td3, and subset-size ratios (left edge 1) for in-target.
struct AgentConfig {
  Variant variant = Variant::kRacSac;
  int n_critics = 10;                    // ensemble size N
  int utd = 20;                          // critic updates per env step G
  int batch_size = 256;
  double gamma = 0.99;
  double rho = 0.005;                    // EMA rate toward the online nets
  long initial_random_steps = 5000;      // uniform behavior before this step
  std::size_t replay_capacity = 100000;
  std::vector<int> hidden = {256, 256};  // actor and critic trunks
  int temp_hidden = 64;                  // temperature net hidden width
  double xi = -5.0;                      // alpha(b) = exp(T(log b) + xi)
  BetaRange train_range{1e-7, 0.8};      // U1: conditioner for updates
  BetaRange explore_range{1e-7, 0.3};    // U2: conditioner for behavior
  WarmupSchedule critic_lr{};            // 3e-5 -> 3e-4 over [5000, 1e4]
  double actor_lr = 3e-4;
  double temp_lr = 3e-4;
  // NaN means "use -act_dim" (resolved at construction).
  double target_entropy = std::numeric_limits<double>::quiet_NaN();
  double td3_policy_sigma = 0.2;   // target smoothing noise scale
  double td3_policy_clip = 0.5;    // and its clip
  double td3_explore_sigma = 0.1;  // behavior noise scale
  double vanilla_beta = 0.3;
  double vanilla_log_alpha_init = -3.0;

  static AgentConfig defaults(Variant v);
};

// alpha(conditioner) for the conditioned variants: exp(T(log b) + xi) with a
// one-hidden-layer net T; the vanilla variant degenerates to one learned
// scalar log(alpha). Positive by construction either way.
class TemperatureModel {
 public:
  TemperatureModel() = default;
  TemperatureModel(int hidden, double xi, Rng& init);   // conditioned
  explicit TemperatureModel(double log_alpha_init);     // vanilla scalar

  bool conditioned() const { return conditioned_; }
  double alpha(double log_b) const;
  // Per-element alpha for a row of log-conditioners.
  VectorXd alpha_row(const Eigen::RowVectorXd& log_b) const;

  struct LossGrad {
    double loss = 0.0;
    VectorXd grad;  // aligned with params()
  };
  // L = mean_b[ -alpha_b * (log_pi_b + target_entropy) ]; log_pi is constant.
  LossGrad loss_grad(const Eigen::RowVectorXd& log_b, const VectorXd& log_pi,
                     double target_entropy);
  // One Adam step on that loss; returns the pre-step loss.
  double update(const Eigen::RowVectorXd& log_b, const VectorXd& log_pi,
                double target_entropy, double lr);

  VectorXd params() const;
  void set_params(const VectorXd& flat);
  double log_alpha() const;  // vanilla accessor

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  bool conditioned_ = true;
  DenseNet net_;         // conditioned: 1 -> hidden -> 1
  VectorXd log_alpha_;   // vanilla: single entry
  AdamState adam_;
  double xi_ = -5.0;
};

struct TrainDiagnostics {
  bool updated = false;
  double critic_loss = 0.0;    // member-mean MSE of the last critic update
  double actor_loss = 0.0;
  double temp_loss = 0.0;
  double alpha_mean = 0.0;     // mean temperature over the actor batch
  double target_q_mean = 0.0;  // mean target of the last critic update
};

// Frozen per-update randomness. Passing these explicitly makes every loss a
// deterministic function of the parameters, which is what the finite-
// difference gradient checks and the variant-equivalence harness need.
struct UpdateDraws {
  VectorXd cond;    // per-element conditioner (beta, or k for in-target)
  MatrixXd xi;      // (act_dim x B) standard normal, stochastic-actor samples
  MatrixXd smooth;  // (act_dim x B) clipped noise, td3 target smoothing
  std::vector<std::vector<int>> subsets;  // per-element members, in-target
};

class RacAgent {
 public:
  RacAgent(const AgentConfig& cfg, int obs_dim, int act_dim,
           std::uint64_t master_seed);

  const AgentConfig& config() const { return cfg_; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  long env_steps() const { return env_steps_; }
  long updates_done() const { return updates_done_; }
  double target_entropy() const { return target_entropy_; }

  // Behavior: uniform over [-1,1]^d for the first initial_random_steps env
  // steps, then the variant's exploration rule with a conditioner from U2.
  VectorXd act_explore(const VectorXd& obs);
  // Deterministic policy at the given conditioner (ignored by vanilla).
  VectorXd act_exploit(const VectorXd& obs, double cond) const;

  void observe(const Transition& t);  // store + advance the step counter

  // G critic updates (fresh minibatch, conditioners, target, all N members,
  // EMA) followed by one actor and one temperature update. No-op until the
  // random phase is over and one batch is buffered.
  TrainDiagnostics train_step();

  // Mean online-critic value of one (obs, action) pair at a conditioner.
  double mean_q(const VectorXd& obs, const VectorXd& act, double cond) const;

  // --- pure update pieces (also the seams for gradient checks) -------------
  UpdateDraws sample_update_draws(Eigen::Index batch);
  // Uncertainty-punished (or subset-min) bootstrap targets; throws on
  // non-finite values with a run-state diagnostic.
  VectorXd compute_targets(const Batch& b, const UpdateDraws& d) const;
  struct CriticLossGrad {
    double loss = 0.0;                // mean over members
    std::vector<VectorXd> grads;      // one per member
    std::vector<double> member_loss;  // MSE per member
  };
  CriticLossGrad critic_loss_grad(const Batch& b, const UpdateDraws& d,
                                  const VectorXd& y);
  struct LossGrad {
    double loss = 0.0;
    VectorXd grad;
  };
  LossGrad actor_loss_grad(const Batch& b, const UpdateDraws& d);
  // Also returns the sampled log pi used by the temperature loss.
  LossGrad actor_loss_grad(const Batch& b, const UpdateDraws& d,
                           VectorXd* log_pi_out);
  TemperatureModel::LossGrad temp_loss_grad(const Batch& b,
                                            const UpdateDraws& d);

  // --- parameter access (checkpoint tests, probes, net surgery) ------------
  DenseNet& actor() { return actor_; }
  const DenseNet& actor() const { return actor_; }
  DenseNet& critic(int i) { return critics_[static_cast<std::size_t>(i)]; }
  const DenseNet& critic(int i) const {
    return critics_[static_cast<std::size_t>(i)];
  }
  DenseNet& target(int i) { return targets_[static_cast<std::size_t>(i)]; }
  const DenseNet& target(int i) const {
    return targets_[static_cast<std::size_t>(i)];
  }
  TemperatureModel& temperature() { return temp_; }
  const TemperatureModel& temperature() const { return temp_; }
  ReplayBuffer& replay() { return replay_; }
  const ReplayBuffer& replay() const { return replay_; }

  bool conditioned() const { return cfg_.variant != Variant::kVanilla; }

  // Versioned binary checkpoint: nets, targets, optimizer states, temperature
  // model, RNG streams, counters and the replay buffer. A load restores the
  // run bit-identically.
  void save(std::ostream& os) const;
  void load(std::istream& is);
  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

 private:
  MatrixXd actor_input(const MatrixXd& obs,
                       const Eigen::RowVectorXd& log_cond) const;
  MatrixXd critic_input(const MatrixXd& obs, const MatrixXd& act,
                        const Eigen::RowVectorXd& log_cond) const;
  VectorXd actor_single(const VectorXd& obs, double cond, bool deterministic,
                        Rng* noise) const;
  // Sampled actions, per-element log pi and the output-parameter gradients
  // for a stochastic-actor forward pass (shared by target/actor/temp paths).
  struct PolicySample {
    MatrixXd action;          // (A x B)
    VectorXd log_pi;          // (B)
    std::vector<SquashedGaussianParams> params;
    std::vector<SquashedSample> samples;
  };
  PolicySample sample_policy(const DenseNet& net, const MatrixXd& obs,
                             const Eigen::RowVectorXd& log_cond,
                             const MatrixXd& xi) const;

  AgentConfig cfg_;
  int obs_dim_ = 0;
  int act_dim_ = 0;
  double target_entropy_ = 0.0;

  DenseNet actor_;
  std::vector<DenseNet> critics_;
  std::vector<DenseNet> targets_;
  TemperatureModel temp_;
  AdamState actor_adam_;
  std::vector<AdamState> critic_adam_;

  ReplayBuffer replay_;
  long env_steps_ = 0;
  long updates_done_ = 0;

  // Named streams so a draw added on one path can never shift another.
  Rng exploration_;  // behavior: uniform phase, action noise
  Rng beta_;         // every conditioner draw (U1 and U2)
  Rng noise_;        // update-side noise: target xi, smoothing, actor xi
  Rng minibatch_;    // replay sampling
  Rng subset_;       // in-target member subsets
};

}  // namespace rac

#endif
