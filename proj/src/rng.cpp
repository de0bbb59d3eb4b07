#include "rac/rng.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace rac {

namespace {
// FNV-1a over the stream name, then a splitmix64 finalizer to decorrelate
// master seeds that differ in few bits.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t Rng::derive(std::uint64_t master, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return splitmix64(master ^ splitmix64(h));
}

double Rng::normal() {
  // Box-Muller, sine branch discarded: costs one extra uniform but keeps the
  // stream state equal to the engine state.
  double u1 = canonical();
  double u2 = canonical();
  while (u1 <= 0.0) u1 = canonical();  // log(0) guard; probability 2^-53
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

std::uint64_t Rng::integer(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::integer: n must be > 0");
  // Rejection sampling for an unbiased bounded draw.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = gen_();
  while (x >= limit) x = gen_();
  return x % n;
}

void Rng::save(std::ostream& os) const {
  // The engine serializes as space-separated text with no trailing delimiter;
  // terminate it explicitly so states can sit back-to-back in binary streams.
  os << gen_ << '\n';
}

void Rng::load(std::istream& is) {
  is >> gen_;
  if (!is || is.get() != '\n')
    throw std::runtime_error("Rng::load: malformed stream state");
}

}  // namespace rac
