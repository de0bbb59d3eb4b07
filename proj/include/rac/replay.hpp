#ifndef RAC_REPLAY_HPP
#define RAC_REPLAY_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "rac/rng.hpp"

namespace rac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Transition {
  VectorXd obs;
  VectorXd action;
  double reward = 0.0;
  VectorXd next_obs;
  bool done = false;
};

// Column-major minibatch: obs is (obs_dim x B), etc. done is 1.0/0.0.
struct Batch {
  MatrixXd obs, action, next_obs;
  VectorXd reward, done;
  Eigen::Index size() const { return reward.size(); }
};

// Fixed-capacity FIFO ring with uniform sampling (with replacement).
// The punishment weight is sampled per update, never stored here.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t logical) const;  // 0 = oldest retained

  Batch sample(std::size_t batch_size, Rng& rng) const;

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;  // ring write head
  std::vector<Transition> storage_;
};

}  // namespace rac

#endif
