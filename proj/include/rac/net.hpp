#ifndef RAC_NET_HPP
#define RAC_NET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rac/rng.hpp"

namespace rac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Piecewise-linear learning-rate warm-up: l(t) = l_init·(1-p) + p·l_target
// with p = clip((t - t_start)/(t_target - t_start), 0, 1).
struct WarmupSchedule {
  double l_init = 3e-5;
  double l_target = 3e-4;
  long t_start = 5000;
  long t_target = 10000;

  double at(long t) const {
    double p = static_cast<double>(t - t_start) /
               static_cast<double>(t_target - t_start);
    p = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
    return l_init * (1.0 - p) + p * l_target;
  }
};

// Adam over a flat parameter vector. Moments are zero-initialized; t counts
// completed steps and drives the bias correction.
struct AdamState {
  VectorXd m, v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(Eigen::Index n = 0)
      : m(VectorXd::Zero(n)), v(VectorXd::Zero(n)) {}

  void save(std::ostream& os) const;
  void load(std::istream& is);
};

// One Adam step in place. Throws on non-finite gradients so a diverging run
// aborts with a diagnostic instead of poisoning every parameter downstream.
void adam_step(VectorXd& params, const VectorXd& grad, AdamState& state,
               double lr);

// Polyak average toward the online parameters: target <- rho*online + (1-rho)*target.
void ema_update(VectorXd& target, const VectorXd& online, double rho);

enum class OutputActivation { kIdentity, kTanh };

// Fully connected net, ReLU hidden activations, identity or tanh output.
// Double precision throughout. Batches are stored column-wise: an input is
// (input_dim x batch) and the output (output_dim x batch).
//
// forward() caches pre-activations for backward(); predict() is the const
// inference path with no cache. backward() returns the gradient of a scalar
// loss with respect to every parameter (flattened in params() order) plus the
// gradient with respect to the input batch, given dLoss/dOutput.
class DenseNet {
 public:
  DenseNet() = default;
  // dims = {in, hidden..., out}. Weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in))
  // (Kaiming uniform, ReLU gain), biases exactly zero.
  DenseNet(const std::vector<int>& dims, OutputActivation out_act, Rng& init);

  int input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().w.cols()); }
  int output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().w.rows()); }
  OutputActivation output_activation() const { return out_act_; }

  MatrixXd predict(const MatrixXd& x) const;
  VectorXd predict1(const VectorXd& x) const;

  const MatrixXd& forward(const MatrixXd& x);

  struct Gradients {
    VectorXd params;   // flattened, aligned with params()
    MatrixXd input;    // (input_dim x batch)
  };
  // upstream = dLoss/dOutput, (output_dim x batch). Requires a prior forward().
  Gradients backward(const MatrixXd& upstream) const;

  Eigen::Index param_count() const;
  VectorXd params() const;
  void set_params(const VectorXd& flat);

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  struct Layer {
    MatrixXd w;  // (out x in)
    VectorXd b;  // (out)
  };
  std::vector<Layer> layers_;
  OutputActivation out_act_ = OutputActivation::kIdentity;

  // forward() cache
  MatrixXd input_;
  std::vector<MatrixXd> pre_;   // z_l per layer
  std::vector<MatrixXd> post_;  // activation(z_l) per layer
  bool has_cache_ = false;
};

// Binary little-endian serialization helpers shared by checkpoint writers.
void write_u64(std::ostream& os, std::uint64_t v);
std::uint64_t read_u64(std::istream& is);
void write_vec(std::ostream& os, const VectorXd& v);
VectorXd read_vec(std::istream& is);

}  // namespace rac

#endif
