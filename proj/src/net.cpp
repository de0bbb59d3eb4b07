#include "rac/net.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace rac {

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) throw std::runtime_error("checkpoint: truncated u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_vec(std::ostream& os, const VectorXd& v) {
  write_u64(os, static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(sizeof(double) * v.size()));
}

VectorXd read_vec(std::istream& is) {
  const auto n = static_cast<Eigen::Index>(read_u64(is));
  VectorXd v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(double) * n));
  if (!is) throw std::runtime_error("checkpoint: truncated vector");
  return v;
}

void AdamState::save(std::ostream& os) const {
  write_u64(os, static_cast<std::uint64_t>(t));
  write_vec(os, m);
  write_vec(os, v);
}

void AdamState::load(std::istream& is) {
  t = static_cast<long>(read_u64(is));
  m = read_vec(is);
  v = read_vec(is);
}

void adam_step(VectorXd& params, const VectorXd& grad, AdamState& s, double lr) {
  if (params.size() != grad.size() || params.size() != s.m.size())
    throw std::invalid_argument("adam_step: size mismatch");
  if (!grad.allFinite())
    throw std::runtime_error("adam_step: non-finite gradient");
  s.t += 1;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  params.array() -= lr * (s.m.array() / c1) /
                    ((s.v.array() / c2).sqrt() + s.eps);
}

void ema_update(VectorXd& target, const VectorXd& online, double rho) {
  target = rho * online + (1.0 - rho) * target;
}

DenseNet::DenseNet(const std::vector<int>& dims, OutputActivation out_act,
                   Rng& init)
    : out_act_(out_act) {
  if (dims.size() < 2) throw std::invalid_argument("DenseNet: need >= 2 dims");
  layers_.reserve(dims.size() - 1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    if (fan_in <= 0 || fan_out <= 0)
      throw std::invalid_argument("DenseNet: dims must be positive");
    Layer layer;
    layer.w.resize(fan_out, fan_in);
    const double bound = std::sqrt(6.0 / fan_in);
    for (Eigen::Index j = 0; j < layer.w.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.w.rows(); ++i)
        layer.w(i, j) = init.uniform(-bound, bound);
    layer.b = VectorXd::Zero(fan_out);
    layers_.push_back(std::move(layer));
  }
}

MatrixXd DenseNet::predict(const MatrixXd& x) const {
  if (x.rows() != input_dim())
    throw std::invalid_argument("DenseNet::predict: input dim mismatch");
  MatrixXd h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = (layers_[l].w * h).colwise() + layers_[l].b;
    if (l + 1 < layers_.size())
      h = h.cwiseMax(0.0);
    else if (out_act_ == OutputActivation::kTanh)
      h = h.array().tanh().matrix();
  }
  return h;
}

VectorXd DenseNet::predict1(const VectorXd& x) const { return predict(x); }

const MatrixXd& DenseNet::forward(const MatrixXd& x) {
  if (x.rows() != input_dim())
    throw std::invalid_argument("DenseNet::forward: input dim mismatch");
  input_ = x;
  pre_.resize(layers_.size());
  post_.resize(layers_.size());
  const MatrixXd* h = &input_;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    pre_[l] = (layers_[l].w * (*h)).colwise() + layers_[l].b;
    if (l + 1 < layers_.size())
      post_[l] = pre_[l].cwiseMax(0.0);
    else if (out_act_ == OutputActivation::kTanh)
      post_[l] = pre_[l].array().tanh().matrix();
    else
      post_[l] = pre_[l];
    h = &post_[l];
  }
  has_cache_ = true;
  return post_.back();
}

DenseNet::Gradients DenseNet::backward(const MatrixXd& upstream) const {
  if (!has_cache_)
    throw std::logic_error("DenseNet::backward: no cached forward pass");
  if (upstream.rows() != output_dim() || upstream.cols() != input_.cols())
    throw std::invalid_argument("DenseNet::backward: upstream shape mismatch");

  const std::size_t L = layers_.size();
  Gradients g;
  g.params.resize(param_count());

  MatrixXd delta;  // dLoss/dz_l
  if (out_act_ == OutputActivation::kTanh) {
    delta = upstream.cwiseProduct(
        (1.0 - post_.back().array().square()).matrix());
  } else {
    delta = upstream;
  }

  Eigen::Index offset = g.params.size();
  for (std::size_t l = L; l-- > 0;) {
    const MatrixXd& below = (l == 0) ? input_ : post_[l - 1];
    MatrixXd gw = delta * below.transpose();
    VectorXd gb = delta.rowwise().sum();
    offset -= gw.size() + gb.size();
    g.params.segment(offset, gw.size()) =
        Eigen::Map<const VectorXd>(gw.data(), gw.size());
    g.params.segment(offset + gw.size(), gb.size()) = gb;
    MatrixXd dx = layers_[l].w.transpose() * delta;
    if (l == 0) {
      g.input = std::move(dx);
    } else {
      // ReLU subgradient: 0 at z == 0.
      delta = dx.cwiseProduct(
          (pre_[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

Eigen::Index DenseNet::param_count() const {
  Eigen::Index n = 0;
  for (const auto& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

VectorXd DenseNet::params() const {
  VectorXd flat(param_count());
  Eigen::Index off = 0;
  for (const auto& l : layers_) {
    flat.segment(off, l.w.size()) =
        Eigen::Map<const VectorXd>(l.w.data(), l.w.size());
    off += l.w.size();
    flat.segment(off, l.b.size()) = l.b;
    off += l.b.size();
  }
  return flat;
}

void DenseNet::set_params(const VectorXd& flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("DenseNet::set_params: size mismatch");
  Eigen::Index off = 0;
  for (auto& l : layers_) {
    Eigen::Map<VectorXd>(l.w.data(), l.w.size()) = flat.segment(off, l.w.size());
    off += l.w.size();
    l.b = flat.segment(off, l.b.size());
    off += l.b.size();
  }
  has_cache_ = false;
}

void DenseNet::save(std::ostream& os) const {
  write_u64(os, layers_.size());
  write_u64(os, out_act_ == OutputActivation::kTanh ? 1 : 0);
  for (const auto& l : layers_) {
    write_u64(os, static_cast<std::uint64_t>(l.w.rows()));
    write_u64(os, static_cast<std::uint64_t>(l.w.cols()));
    os.write(reinterpret_cast<const char*>(l.w.data()),
             static_cast<std::streamsize>(sizeof(double) * l.w.size()));
    write_vec(os, l.b);
  }
}

void DenseNet::load(std::istream& is) {
  const auto n_layers = read_u64(is);
  out_act_ = read_u64(is) == 1 ? OutputActivation::kTanh
                               : OutputActivation::kIdentity;
  layers_.assign(n_layers, Layer{});
  for (auto& l : layers_) {
    const auto rows = static_cast<Eigen::Index>(read_u64(is));
    const auto cols = static_cast<Eigen::Index>(read_u64(is));
    l.w.resize(rows, cols);
    is.read(reinterpret_cast<char*>(l.w.data()),
            static_cast<std::streamsize>(sizeof(double) * l.w.size()));
    if (!is) throw std::runtime_error("checkpoint: truncated layer");
    l.b = read_vec(is);
  }
  has_cache_ = false;
}

}  // namespace rac
