#include "rac/replay.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "rac/net.hpp"  // write_u64 / write_vec helpers

namespace rac {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0)
    throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
  storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
  if (logical >= storage_.size())
    throw std::out_of_range("ReplayBuffer::at");
  if (storage_.size() < capacity_) return storage_[logical];
  return storage_[(next_ + logical) % capacity_];
}

Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (storage_.empty())
    throw std::logic_error("ReplayBuffer::sample: buffer is empty");
  if (batch_size == 0)
    throw std::invalid_argument("ReplayBuffer::sample: batch_size must be > 0");
  const auto obs_dim = storage_.front().obs.size();
  const auto act_dim = storage_.front().action.size();
  Batch b;
  b.obs.resize(obs_dim, static_cast<Eigen::Index>(batch_size));
  b.action.resize(act_dim, static_cast<Eigen::Index>(batch_size));
  b.next_obs.resize(obs_dim, static_cast<Eigen::Index>(batch_size));
  b.reward.resize(static_cast<Eigen::Index>(batch_size));
  b.done.resize(static_cast<Eigen::Index>(batch_size));
  for (std::size_t j = 0; j < batch_size; ++j) {
    const Transition& t = storage_[rng.integer(storage_.size())];
    const auto col = static_cast<Eigen::Index>(j);
    b.obs.col(col) = t.obs;
    b.action.col(col) = t.action;
    b.next_obs.col(col) = t.next_obs;
    b.reward(col) = t.reward;
    b.done(col) = t.done ? 1.0 : 0.0;
  }
  return b;
}

void ReplayBuffer::save(std::ostream& os) const {
  write_u64(os, capacity_);
  write_u64(os, next_);
  write_u64(os, storage_.size());
  for (const Transition& t : storage_) {
    write_vec(os, t.obs);
    write_vec(os, t.action);
    write_vec(os, t.next_obs);
    write_u64(os, t.done ? 1 : 0);
    VectorXd r(1);
    r << t.reward;
    write_vec(os, r);
  }
}

void ReplayBuffer::load(std::istream& is) {
  capacity_ = read_u64(is);
  next_ = read_u64(is);
  const std::uint64_t n = read_u64(is);
  storage_.clear();
  storage_.reserve(capacity_);
  for (std::uint64_t i = 0; i < n; ++i) {
    Transition t;
    t.obs = read_vec(is);
    t.action = read_vec(is);
    t.next_obs = read_vec(is);
    t.done = read_u64(is) == 1;
    t.reward = read_vec(is)(0);
    storage_.push_back(std::move(t));
  }
}

}  // namespace rac
