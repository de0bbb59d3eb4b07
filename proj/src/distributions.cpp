#include "rac/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace rac {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)
}

VectorXd clip_log_std(const VectorXd& raw) {
  return raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

VectorXd clip_log_std_mask(const VectorXd& raw) {
  return ((raw.array() >= kLogStdMin) && (raw.array() <= kLogStdMax))
      .cast<double>()
      .matrix();
}

SquashedSample squashed_sample(const SquashedGaussianParams& p,
                               const VectorXd& xi) {
  if (p.mean.size() != p.log_std.size() || p.mean.size() != xi.size())
    throw std::invalid_argument("squashed_sample: size mismatch");
  SquashedSample s;
  const VectorXd sigma = p.log_std.array().exp().matrix();
  s.pre_tanh = p.mean + sigma.cwiseProduct(xi);
  s.action = s.pre_tanh.array().tanh().matrix();
  // tanh saturates to exactly +-1 for |u| > ~19; keep actions strictly
  // interior so downstream atanh/log terms stay finite.
  const double interior = std::nextafter(1.0, 0.0);
  s.action = s.action.cwiseMax(-interior).cwiseMin(interior);
  double logp = 0.0;
  for (Eigen::Index d = 0; d < xi.size(); ++d) {
    logp += -0.5 * xi(d) * xi(d) - p.log_std(d) - 0.5 * kLogTwoPi;
    const double t = s.action(d);
    logp -= std::log(1.0 - t * t + kSquashEps);
  }
  s.log_prob = logp;
  return s;
}

double squashed_log_density(const SquashedGaussianParams& p,
                            const VectorXd& action, double squash_eps) {
  if (p.mean.size() != p.log_std.size() || p.mean.size() != action.size())
    throw std::invalid_argument("squashed_log_density: size mismatch");
  double logp = 0.0;
  for (Eigen::Index d = 0; d < action.size(); ++d) {
    const double a = action(d);
    if (!(a > -1.0 && a < 1.0))
      throw std::invalid_argument("squashed_log_density: action outside (-1,1)");
    const double u = std::atanh(a);
    const double sigma = std::exp(p.log_std(d));
    const double z = (u - p.mean(d)) / sigma;
    logp += -0.5 * z * z - p.log_std(d) - 0.5 * kLogTwoPi;
    logp -= std::log(1.0 - a * a + squash_eps);
  }
  return logp;
}

VectorXd squashed_mode(const SquashedGaussianParams& p) {
  const double interior = std::nextafter(1.0, 0.0);
  return p.mean.array().tanh().matrix().cwiseMax(-interior).cwiseMin(interior);
}

SquashGradients squashed_sample_gradients(const SquashedGaussianParams& p,
                                          const VectorXd& xi,
                                          const SquashedSample& s) {
  const Eigen::Index n = p.mean.size();
  SquashGradients g;
  g.dlogp_dmean.resize(n);
  g.dlogp_dlogstd.resize(n);
  g.daction_dmean.resize(n);
  g.daction_dlogstd.resize(n);
  for (Eigen::Index d = 0; d < n; ++d) {
    const double t = s.action(d);
    const double one_m_t2 = 1.0 - t * t;
    const double sigma = std::exp(p.log_std(d));
    // d/du of -log(1 - tanh(u)^2 + eps)
    const double dlogp_du = 2.0 * t * one_m_t2 / (one_m_t2 + kSquashEps);
    g.dlogp_dmean(d) = dlogp_du;                       // du/dmean = 1
    g.dlogp_dlogstd(d) = -1.0 + dlogp_du * sigma * xi(d);  // du/dlogstd = sigma*xi
    g.daction_dmean(d) = one_m_t2;
    g.daction_dlogstd(d) = one_m_t2 * sigma * xi(d);
  }
  return g;
}

VectorXd clipped_gaussian_noise(int dim, double sigma, double clip, Rng& rng) {
  VectorXd eps(dim);
  for (int d = 0; d < dim; ++d) {
    double e = rng.normal(0.0, sigma);
    eps(d) = e < -clip ? -clip : (e > clip ? clip : e);
  }
  return eps;
}

VectorXd boltzmann_probs(const VectorXd& q, double temperature) {
  if (!q.allFinite())
    throw std::invalid_argument("boltzmann: non-finite scores");
  if (!(temperature > 0.0))
    throw std::invalid_argument("boltzmann: temperature must be > 0");
  const double m = q.maxCoeff();
  VectorXd p = ((q.array() - m) / temperature).exp().matrix();
  return p / p.sum();
}

int boltzmann_select(const VectorXd& q, double temperature, Rng& rng) {
  const VectorXd p = boltzmann_probs(q, temperature);
  const double u = rng.canonical();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);  // u landed in roundoff tail
}

MeanStd ensemble_mean_std(const VectorXd& values) {
  const Eigen::Index n = values.size();
  if (n < 2)
    throw std::invalid_argument("ensemble_mean_std: need >= 2 members");
  const double mean = values.mean();
  const double ss = (values.array() - mean).square().sum();
  return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

void ensemble_mean_std_cols(const MatrixXd& values, VectorXd& mean,
                            VectorXd& std) {
  const Eigen::Index n = values.rows();
  if (n < 2)
    throw std::invalid_argument("ensemble_mean_std_cols: need >= 2 members");
  mean = values.colwise().mean();
  std = ((values.rowwise() - mean.transpose()).colwise().squaredNorm() /
         static_cast<double>(n - 1))
            .cwiseSqrt()
            .transpose();
}

int sample_subset_size(double k, Rng& rng) {
  if (!(k >= 1.0)) throw std::invalid_argument("sample_subset_size: k < 1");
  const double fl = std::floor(k);
  const double frac = k - fl;
  int size = static_cast<int>(fl);
  if (frac > 0.0 && rng.bernoulli(frac)) size += 1;
  return size;
}

}  // namespace rac
