#ifndef RAC_DISTRIBUTIONS_HPP
#define RAC_DISTRIBUTIONS_HPP

#include <Eigen/Dense>

#include "rac/rng.hpp"

namespace rac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kLogStdMin = -10.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kSquashEps = 1e-6;

// Diagonal Gaussian squashed through tanh. log_std is stored already clipped
// to [kLogStdMin, kLogStdMax].
struct SquashedGaussianParams {
  VectorXd mean;
  VectorXd log_std;
};

// Clip log-std into range; companion mask is 1 where the raw value was inside
// the (closed) range, 0 where it was clipped, for backprop through the clip.
VectorXd clip_log_std(const VectorXd& raw);
VectorXd clip_log_std_mask(const VectorXd& raw);

struct SquashedSample {
  VectorXd action;    // tanh(mean + sigma .* xi), componentwise in (-1, 1)
  VectorXd pre_tanh;  // mean + sigma .* xi
  double log_prob;    // log-likelihood of `action` under the squashed density
};

// Reparameterized sample with externally supplied standard-normal noise xi.
// log_prob = sum_d [ N(u_d; mu_d, sigma_d) in log form ]
//          - sum_d log(1 - tanh(u_d)^2 + kSquashEps).
SquashedSample squashed_sample(const SquashedGaussianParams& p,
                               const VectorXd& xi);

// Density of an arbitrary action in (-1,1)^d under the squashed Gaussian.
// squash_eps floors the Jacobian term exactly as in the sampler; pass 0 for
// the exact change-of-variables density (the epsilon-floored form loses
// E[eps/(1-tanh(u)^2+eps)] of the total mass, which is non-negligible for
// very wide sigmas).
double squashed_log_density(const SquashedGaussianParams& p,
                            const VectorXd& action,
                            double squash_eps = kSquashEps);

// Deterministic evaluation action: tanh(mean).
VectorXd squashed_mode(const SquashedGaussianParams& p);

// Gradients of a reparameterized sample for the actor update, all w.r.t. the
// distribution parameters with xi held fixed:
//   dlogp_dmean/dlogp_dlogstd: gradient of log_prob
//   daction_dmean/daction_dlogstd: diagonal Jacobian of the action
struct SquashGradients {
  VectorXd dlogp_dmean, dlogp_dlogstd;
  VectorXd daction_dmean, daction_dlogstd;
};
SquashGradients squashed_sample_gradients(const SquashedGaussianParams& p,
                                          const VectorXd& xi,
                                          const SquashedSample& s);

// Per-dimension clip(N(0, sigma), -c, c); used for target policy smoothing.
VectorXd clipped_gaussian_noise(int dim, double sigma, double clip, Rng& rng);

// Sample an index proportional to exp(q_i / temperature), max-subtracted for
// stability. Throws on non-finite scores.
int boltzmann_select(const VectorXd& q, double temperature, Rng& rng);
VectorXd boltzmann_probs(const VectorXd& q, double temperature);

// Mean and Bessel-corrected (n-1) standard deviation of ensemble values.
struct MeanStd {
  double mean;
  double std;
};
MeanStd ensemble_mean_std(const VectorXd& values);  // requires n >= 2

// Column-wise mean/std over an (ensemble x batch) matrix.
void ensemble_mean_std_cols(const MatrixXd& values, VectorXd& mean,
                            VectorXd& std);

// Uniform range for the punishment weight beta (or the subset-size ratio k of
// the in-target variant, where left is 1 instead of ~0). Config validation
// enforces 0 < left < right; the sampler itself tolerates left == right and
// returns the point, which the variant-equivalence harness relies on.
struct BetaRange {
  double left = 1e-7;
  double right = 0.8;

  double sample(Rng& rng) const { return rng.uniform(left, right); }
};

// beta is fed to networks in log scale.
inline double log_scaled(double beta) { return std::log(beta); }

// In-target subset size for ratio k: floor(k) + Bernoulli(k - floor(k)).
int sample_subset_size(double k, Rng& rng);

}  // namespace rac

#endif
