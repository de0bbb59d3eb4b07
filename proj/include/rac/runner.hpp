#ifndef RAC_RUNNER_HPP
#define RAC_RUNNER_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "rac/config.hpp"

namespace rac {

struct SeedOutcome {
  int index = 0;
  std::uint64_t master_seed = 0;
  bool ok = false;
  std::string error;  // populated on divergence / failure
  std::filesystem::path dir;
};

struct RunOutcome {
  bool ok = false;  // every seed finished
  std::filesystem::path dir;
  std::vector<SeedOutcome> seeds;
};

// Experiment directory root: $RAC_OUT_ROOT when set, else cfg.out_dir.
std::filesystem::path resolve_out_root(const RunConfig& cfg);

// The full experiment: seeds run as independent parallel workers, each a
// plain act / step / observe / train loop over its own artifact directory
//
//   <root>/<name>/config.ini
//                 manifest.json        run identity + schema versions
//                 aggregate.csv        eval score mean/std across seeds
//                 seed_<k>/train.csv   step,seed,metric,value at eval cadence
//                          eval.csv    step,beta_star,score,ret_1..ret_H
//                          bias.csv    step,bias_mean,bias_std
//                          checkpoint.bin
//                          events.log  wall-clock sidecar (not deterministic)
//
// CSV content is a pure function of (config, seed): wall time stays in
// events.log. Rows are flushed at every evaluation, so a killed or diverged
// run leaves parseable files; a diverged seed is reported in its outcome and
// the experiment returns ok = false with partial artifacts intact.
RunOutcome run_experiment(const RunConfig& cfg);

// One seed's loop, writing into `dir` (created if needed). Exposed for
// tests; run_experiment fans out over seed indices 0..seeds-1 with master
// seeds base_seed + index.
SeedOutcome run_seed(const RunConfig& cfg, int seed_index,
                     const std::filesystem::path& dir);

}  // namespace rac

#endif
