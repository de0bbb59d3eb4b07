#include "rac/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

namespace rac {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Shortest decimal that parses back to the same bits, so serialized configs
// reload exactly and still read like hand-written numbers.
std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return "0";  // unreachable
}

std::string fmt_hidden(const std::vector<int>& h) {
  std::string out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(h[i]);
  }
  return out;
}

struct Entry {
  std::string section, key, value;
  int line = 0;
};

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ConfigError(origin + ": " + what);
}

long to_long(const Entry& e, const std::string& origin) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(e.value, &pos);
  } catch (const std::exception&) {
    fail(origin, "key '" + e.key + "': expected integer, got '" + e.value + "'");
  }
  if (pos != e.value.size())
    fail(origin, "key '" + e.key + "': expected integer, got '" + e.value + "'");
  return v;
}

int to_int(const Entry& e, const std::string& origin) {
  long v = to_long(e, origin);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    fail(origin, "key '" + e.key + "': value out of int range");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const Entry& e, const std::string& origin) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(e.value, &pos);
  } catch (const std::exception&) {
    fail(origin, "key '" + e.key + "': expected unsigned integer, got '" +
                     e.value + "'");
  }
  if (pos != e.value.size() || e.value[0] == '-')
    fail(origin, "key '" + e.key + "': expected unsigned integer, got '" +
                     e.value + "'");
  return v;
}

double to_double(const Entry& e, const std::string& origin) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(e.value, &pos);
  } catch (const std::exception&) {
    fail(origin, "key '" + e.key + "': expected number, got '" + e.value + "'");
  }
  if (pos != e.value.size())
    fail(origin, "key '" + e.key + "': expected number, got '" + e.value + "'");
  return v;
}

std::vector<int> to_int_list(const Entry& e, const std::string& origin) {
  std::vector<int> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    Entry sub{e.section, e.key, item, e.line};
    out.push_back(to_int(sub, origin));
  }
  if (out.empty())
    fail(origin, "key '" + e.key + "': expected comma-separated integers");
  return out;
}

void require(bool ok, const std::string& origin, const std::string& key,
             const std::string& constraint) {
  if (!ok) fail(origin, "key '" + key + "': " + constraint);
}

void validate(const RunConfig& c, const std::string& origin) {
  require(!c.name.empty(), origin, "name", "must not be empty");
  require(c.env == "chain-mdp" || c.env == "point-mass", origin, "env",
          "unknown environment '" + c.env + "'");
  require(c.total_steps >= 1, origin, "total_steps", "must be >= 1");
  require(c.seeds >= 1, origin, "seeds", "must be >= 1");

  const AgentConfig& a = c.agent;
  require(a.n_critics >= 2, origin, "n_critics", "ensemble needs >= 2 members");
  require(a.utd >= 1, origin, "utd", "must be >= 1");
  require(a.batch_size >= 1, origin, "batch_size", "must be >= 1");
  require(a.replay_capacity >= static_cast<std::size_t>(a.batch_size), origin,
          "replay_capacity", "must be >= batch_size");
  require(a.gamma >= 0.0 && a.gamma <= 1.0, origin, "gamma",
          "must lie in [0, 1]");
  require(a.rho > 0.0 && a.rho <= 1.0, origin, "rho", "must lie in (0, 1]");
  require(a.initial_random_steps >= 0, origin, "initial_random_steps",
          "must be >= 0");
  require(!a.hidden.empty(), origin, "hidden", "needs at least one layer");
  for (int h : a.hidden)
    require(h >= 1, origin, "hidden", "layer widths must be >= 1");
  require(a.temp_hidden >= 1, origin, "temp_hidden", "must be >= 1");
  auto check_range = [&](const BetaRange& r, const std::string& lo,
                         const std::string& hi, bool bounds_subset) {
    require(r.left > 0.0, origin, lo, "must be > 0");
    require(r.left <= r.right, origin, hi, "must be >= " + lo);
    if (a.variant == Variant::kInTarget) {
      require(r.left >= 1.0, origin, lo, "subset ratios must be >= 1");
      if (bounds_subset)
        require(std::floor(r.right) + 1.0 <=
                    static_cast<double>(a.n_critics),
                origin, hi, "subset size floor+1 must be <= n_critics");
    }
  };
  check_range(a.train_range, "train_beta_min", "train_beta_max", true);
  check_range(a.explore_range, "explore_beta_min", "explore_beta_max", false);
  require(a.critic_lr.l_init > 0.0, origin, "critic_lr_init", "must be > 0");
  require(a.critic_lr.l_target > 0.0, origin, "critic_lr_final",
          "must be > 0");
  require(a.critic_lr.t_start < a.critic_lr.t_target, origin,
          "critic_lr_warm_end", "must be > critic_lr_warm_start");
  require(a.actor_lr > 0.0, origin, "actor_lr", "must be > 0");
  require(a.temp_lr > 0.0, origin, "temp_lr", "must be > 0");
  require(a.td3_policy_sigma >= 0.0, origin, "td3_policy_sigma",
          "must be >= 0");
  require(a.td3_policy_clip >= 0.0, origin, "td3_policy_clip", "must be >= 0");
  require(a.td3_explore_sigma >= 0.0, origin, "td3_explore_sigma",
          "must be >= 0");
  require(a.vanilla_beta >= 0.0, origin, "vanilla_beta", "must be >= 0");

  require(c.eval_every >= 1, origin, "eval.every", "must be >= 1");
  require(c.eval_episodes >= 1, origin, "eval.episodes", "must be >= 1");
  require(c.eval_grid >= 1, origin, "eval.grid", "must be >= 1");
  require(std::isnan(c.eval_grid_edge) || c.eval_grid_edge > 0.0, origin,
          "eval.grid_edge", "must be > 0 (or 'auto')");
  require(c.bias_every >= 0, origin, "bias.every", "must be >= 0");
  require(c.bias_pairs >= 1, origin, "bias.pairs", "must be >= 1");
  require(c.bias_collect >= c.bias_pairs, origin, "bias.collect",
          "must be >= bias.pairs");
  require(c.bias_rollouts >= 1, origin, "bias.rollouts", "must be >= 1");
  require(c.bias_max_steps >= 1, origin, "bias.max_steps", "must be >= 1");
}

}  // namespace

bool operator==(const RunConfig& x, const RunConfig& y) {
  auto deq = [](double a, double b) {
    return (std::isnan(a) && std::isnan(b)) || a == b;
  };
  const AgentConfig &a = x.agent, &b = y.agent;
  return x.name == y.name && x.env == y.env &&
         x.total_steps == y.total_steps && x.seeds == y.seeds &&
         x.base_seed == y.base_seed && x.out_dir == y.out_dir &&
         a.variant == b.variant && a.n_critics == b.n_critics &&
         a.utd == b.utd && a.batch_size == b.batch_size &&
         deq(a.gamma, b.gamma) && deq(a.rho, b.rho) &&
         a.initial_random_steps == b.initial_random_steps &&
         a.replay_capacity == b.replay_capacity && a.hidden == b.hidden &&
         a.temp_hidden == b.temp_hidden && deq(a.xi, b.xi) &&
         deq(a.train_range.left, b.train_range.left) &&
         deq(a.train_range.right, b.train_range.right) &&
         deq(a.explore_range.left, b.explore_range.left) &&
         deq(a.explore_range.right, b.explore_range.right) &&
         deq(a.critic_lr.l_init, b.critic_lr.l_init) &&
         deq(a.critic_lr.l_target, b.critic_lr.l_target) &&
         a.critic_lr.t_start == b.critic_lr.t_start &&
         a.critic_lr.t_target == b.critic_lr.t_target &&
         deq(a.actor_lr, b.actor_lr) && deq(a.temp_lr, b.temp_lr) &&
         deq(a.target_entropy, b.target_entropy) &&
         deq(a.td3_policy_sigma, b.td3_policy_sigma) &&
         deq(a.td3_policy_clip, b.td3_policy_clip) &&
         deq(a.td3_explore_sigma, b.td3_explore_sigma) &&
         deq(a.vanilla_beta, b.vanilla_beta) &&
         deq(a.vanilla_log_alpha_init, b.vanilla_log_alpha_init) &&
         x.eval_every == y.eval_every && x.eval_episodes == y.eval_episodes &&
         x.eval_grid == y.eval_grid &&
         deq(x.eval_grid_edge, y.eval_grid_edge) &&
         x.bias_every == y.bias_every &&
         x.bias_collect == y.bias_collect && x.bias_pairs == y.bias_pairs &&
         x.bias_rollouts == y.bias_rollouts &&
         x.bias_max_steps == y.bias_max_steps;
}

RunConfig parse_config(std::istream& is, const std::string& origin) {
  std::vector<Entry> entries;
  std::string line, section;
  int line_no = 0;
  std::map<std::string, int> seen;
  while (std::getline(is, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        fail(origin, "line " + std::to_string(line_no) +
                         ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section != "experiment" && section != "agent" &&
          section != "eval" && section != "bias")
        fail(origin, "unknown section '" + section + "'");
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(origin,
           "line " + std::to_string(line_no) + ": expected 'key = value'");
    if (section.empty())
      fail(origin, "line " + std::to_string(line_no) +
                       ": key before any [section] header");
    Entry e{section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), line_no};
    if (e.key.empty())
      fail(origin, "line " + std::to_string(line_no) + ": empty key");
    if (++seen[e.section + "." + e.key] > 1)
      fail(origin, "duplicate key '" + e.key + "' in [" + e.section + "]");
    entries.push_back(std::move(e));
  }

  RunConfig cfg;
  // The variant decides the agent defaults, so resolve it before any other
  // [agent] key regardless of file order.
  for (const Entry& e : entries) {
    if (e.section == "agent" && e.key == "variant") {
      try {
        cfg.agent = AgentConfig::defaults(parse_variant(e.value));
      } catch (const std::invalid_argument&) {
        fail(origin, "key 'variant': unknown agent variant '" + e.value + "'");
      }
    }
  }

  for (const Entry& e : entries) {
    AgentConfig& a = cfg.agent;
    if (e.section == "experiment") {
      if (e.key == "name") cfg.name = e.value;
      else if (e.key == "env") cfg.env = e.value;
      else if (e.key == "total_steps") cfg.total_steps = to_long(e, origin);
      else if (e.key == "seeds") cfg.seeds = to_int(e, origin);
      else if (e.key == "base_seed") cfg.base_seed = to_u64(e, origin);
      else if (e.key == "out_dir") cfg.out_dir = e.value;
      else fail(origin, "unknown key '" + e.key + "' in [experiment]");
    } else if (e.section == "agent") {
      if (e.key == "variant") continue;  // already applied
      else if (e.key == "n_critics") a.n_critics = to_int(e, origin);
      else if (e.key == "utd") a.utd = to_int(e, origin);
      else if (e.key == "batch_size") a.batch_size = to_int(e, origin);
      else if (e.key == "gamma") a.gamma = to_double(e, origin);
      else if (e.key == "rho") a.rho = to_double(e, origin);
      else if (e.key == "initial_random_steps")
        a.initial_random_steps = to_long(e, origin);
      else if (e.key == "replay_capacity") {
        long v = to_long(e, origin);
        require(v >= 1, origin, e.key, "must be >= 1");
        a.replay_capacity = static_cast<std::size_t>(v);
      } else if (e.key == "hidden") a.hidden = to_int_list(e, origin);
      else if (e.key == "temp_hidden") a.temp_hidden = to_int(e, origin);
      else if (e.key == "xi") a.xi = to_double(e, origin);
      else if (e.key == "train_beta_min")
        a.train_range.left = to_double(e, origin);
      else if (e.key == "train_beta_max")
        a.train_range.right = to_double(e, origin);
      else if (e.key == "explore_beta_min")
        a.explore_range.left = to_double(e, origin);
      else if (e.key == "explore_beta_max")
        a.explore_range.right = to_double(e, origin);
      else if (e.key == "critic_lr_init")
        a.critic_lr.l_init = to_double(e, origin);
      else if (e.key == "critic_lr_final")
        a.critic_lr.l_target = to_double(e, origin);
      else if (e.key == "critic_lr_warm_start")
        a.critic_lr.t_start = to_long(e, origin);
      else if (e.key == "critic_lr_warm_end")
        a.critic_lr.t_target = to_long(e, origin);
      else if (e.key == "actor_lr") a.actor_lr = to_double(e, origin);
      else if (e.key == "temp_lr") a.temp_lr = to_double(e, origin);
      else if (e.key == "target_entropy")
        a.target_entropy = e.value == "auto"
                               ? std::numeric_limits<double>::quiet_NaN()
                               : to_double(e, origin);
      else if (e.key == "td3_policy_sigma")
        a.td3_policy_sigma = to_double(e, origin);
      else if (e.key == "td3_policy_clip")
        a.td3_policy_clip = to_double(e, origin);
      else if (e.key == "td3_explore_sigma")
        a.td3_explore_sigma = to_double(e, origin);
      else if (e.key == "vanilla_beta") a.vanilla_beta = to_double(e, origin);
      else if (e.key == "vanilla_log_alpha_init")
        a.vanilla_log_alpha_init = to_double(e, origin);
      else fail(origin, "unknown key '" + e.key + "' in [agent]");
    } else if (e.section == "eval") {
      if (e.key == "every") cfg.eval_every = to_long(e, origin);
      else if (e.key == "episodes") cfg.eval_episodes = to_int(e, origin);
      else if (e.key == "grid") cfg.eval_grid = to_int(e, origin);
      else if (e.key == "grid_edge")
        cfg.eval_grid_edge = e.value == "auto"
                                 ? std::numeric_limits<double>::quiet_NaN()
                                 : to_double(e, origin);
      else fail(origin, "unknown key '" + e.key + "' in [eval]");
    } else {  // bias
      if (e.key == "every") cfg.bias_every = to_long(e, origin);
      else if (e.key == "collect") cfg.bias_collect = to_int(e, origin);
      else if (e.key == "pairs") cfg.bias_pairs = to_int(e, origin);
      else if (e.key == "rollouts") cfg.bias_rollouts = to_int(e, origin);
      else if (e.key == "max_steps") cfg.bias_max_steps = to_long(e, origin);
      else fail(origin, "unknown key '" + e.key + "' in [bias]");
    }
  }

  validate(cfg, origin);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open config file");
  return parse_config(f, path);
}

std::string serialize_config(const RunConfig& c) {
  const AgentConfig& a = c.agent;
  std::ostringstream os;
  os << "[experiment]\n"
     << "name = " << c.name << "\n"
     << "env = " << c.env << "\n"
     << "total_steps = " << c.total_steps << "\n"
     << "seeds = " << c.seeds << "\n"
     << "base_seed = " << c.base_seed << "\n"
     << "out_dir = " << c.out_dir << "\n\n";
  os << "[agent]\n"
     << "variant = " << variant_name(a.variant) << "\n"
     << "n_critics = " << a.n_critics << "\n"
     << "utd = " << a.utd << "\n"
     << "batch_size = " << a.batch_size << "\n"
     << "gamma = " << fmt_double(a.gamma) << "\n"
     << "rho = " << fmt_double(a.rho) << "\n"
     << "initial_random_steps = " << a.initial_random_steps << "\n"
     << "replay_capacity = " << a.replay_capacity << "\n"
     << "hidden = " << fmt_hidden(a.hidden) << "\n"
     << "temp_hidden = " << a.temp_hidden << "\n"
     << "xi = " << fmt_double(a.xi) << "\n"
     << "train_beta_min = " << fmt_double(a.train_range.left) << "\n"
     << "train_beta_max = " << fmt_double(a.train_range.right) << "\n"
     << "explore_beta_min = " << fmt_double(a.explore_range.left) << "\n"
     << "explore_beta_max = " << fmt_double(a.explore_range.right) << "\n"
     << "critic_lr_init = " << fmt_double(a.critic_lr.l_init) << "\n"
     << "critic_lr_final = " << fmt_double(a.critic_lr.l_target) << "\n"
     << "critic_lr_warm_start = " << a.critic_lr.t_start << "\n"
     << "critic_lr_warm_end = " << a.critic_lr.t_target << "\n"
     << "actor_lr = " << fmt_double(a.actor_lr) << "\n"
     << "temp_lr = " << fmt_double(a.temp_lr) << "\n"
     << "target_entropy = "
     << (std::isnan(a.target_entropy) ? std::string("auto")
                                      : fmt_double(a.target_entropy))
     << "\n"
     << "td3_policy_sigma = " << fmt_double(a.td3_policy_sigma) << "\n"
     << "td3_policy_clip = " << fmt_double(a.td3_policy_clip) << "\n"
     << "td3_explore_sigma = " << fmt_double(a.td3_explore_sigma) << "\n"
     << "vanilla_beta = " << fmt_double(a.vanilla_beta) << "\n"
     << "vanilla_log_alpha_init = " << fmt_double(a.vanilla_log_alpha_init)
     << "\n\n";
  os << "[eval]\n"
     << "every = " << c.eval_every << "\n"
     << "episodes = " << c.eval_episodes << "\n"
     << "grid = " << c.eval_grid << "\n"
     << "grid_edge = "
     << (std::isnan(c.eval_grid_edge) ? std::string("auto")
                                      : fmt_double(c.eval_grid_edge))
     << "\n\n";
  os << "[bias]\n"
     << "every = " << c.bias_every << "\n"
     << "collect = " << c.bias_collect << "\n"
     << "pairs = " << c.bias_pairs << "\n"
     << "rollouts = " << c.bias_rollouts << "\n"
     << "max_steps = " << c.bias_max_steps << "\n";
  return os.str();
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError(path + ": cannot write config file");
  f << serialize_config(cfg);
  if (!f.flush()) throw ConfigError(path + ": write failed");
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rac
