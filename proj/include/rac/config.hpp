#ifndef RAC_CONFIG_HPP
#define RAC_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>

#include "rac/agent.hpp"

namespace rac {

// Raised for malformed files, unknown sections/keys, bad literals and
// out-of-range values; what() names the offending key.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Everything an experiment run needs: agent family + hyperparameters, env,
// duration, seed count, evaluation cadence and artifact destination. Stored
// as a flat `key = value` file with [section] headers. Unknown keys are a
// hard error so typos cannot silently fall back to defaults; an empty file
// is a valid config (all defaults).
struct RunConfig {
  // [experiment]
  std::string name = "rac";
  std::string env = "point-mass";
  long total_steps = 30000;
  int seeds = 8;
  std::uint64_t base_seed = 1;
  std::string out_dir = "runs";

  // [agent] -- defaults track the variant (see AgentConfig::defaults)
  AgentConfig agent = AgentConfig::defaults(Variant::kRacSac);

  // [eval] -- grid_edge NaN means "the agent's exploration range right edge"
  long eval_every = 1000;
  int eval_episodes = 10;
  int eval_grid = 12;
  double eval_grid_edge = std::numeric_limits<double>::quiet_NaN();

  // [bias] -- every = 0 disables periodic value-bias estimation
  long bias_every = 5000;
  int bias_collect = 100;
  int bias_pairs = 20;
  int bias_rollouts = 20;
  long bias_max_steps = 1500;
};

bool operator==(const RunConfig& a, const RunConfig& b);
inline bool operator!=(const RunConfig& a, const RunConfig& b) {
  return !(a == b);
}

// Parse from a stream/file. `origin` only decorates error messages.
RunConfig parse_config(std::istream& is, const std::string& origin);
RunConfig load_config(const std::string& path);

// Canonical text form: every key, grouped by section, doubles printed with
// shortest round-trip precision. parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

// FNV-1a of the canonical text; stable identity for manifests.
std::string config_hash(const RunConfig& cfg);

}  // namespace rac

#endif
