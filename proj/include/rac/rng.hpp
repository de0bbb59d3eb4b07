#ifndef RAC_RNG_HPP
#define RAC_RNG_HPP

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

namespace rac {

// Deterministic random stream. One master seed per run fans out into named
// sub-streams (env, init, exploration, minibatch, ...) so that components
// consume independent sequences and adding a draw in one place cannot shift
// the numbers seen somewhere else.
//
// All sampling goes through our own transforms (not std::*_distribution) so a
// stream's state is exactly the mt19937_64 engine state: trivially
// serializable and bit-identical on reload.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Derive the seed of a named sub-stream from a master seed.
  static std::uint64_t derive(std::uint64_t master, const std::string& name);
  static Rng child(std::uint64_t master, const std::string& name) {
    return Rng(derive(master, name));
  }

  std::uint64_t raw() { return gen_(); }

  // Uniform on [0, 1).
  double canonical() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi). Degenerate lo == hi returns lo exactly.
  double uniform(double lo, double hi) { return lo + canonical() * (hi - lo); }

  // Standard normal via Box-Muller; stateless (no cached spare), two raw
  // draws per sample, so engine state fully describes the stream.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Uniform integer on [0, n). n must be > 0.
  std::uint64_t integer(std::uint64_t n);

  bool bernoulli(double p) { return canonical() < p; }

  void save(std::ostream& os) const;
  void load(std::istream& is);

  bool operator==(const Rng& other) const { return gen_ == other.gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rac

#endif
