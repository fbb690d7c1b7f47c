#pragma once

#include <string>
#include <vector>

#include "rdnet/datasets.hpp"
#include "rdnet/ensemble.hpp"

namespace rdnet {

// Run configuration loaded from a JSON file. Unknown keys are rejected.
// The defaults reproduce the reference setup: six grids totalling 41
// regions, Z=2, K=20, 200 epochs at learning rate 0.001.
struct RunConfig {
  std::vector<GridSpec> grids{{1, 1}, {1, 4}, {4, 1}, {2, 4}, {4, 2}, {4, 4}};
  int z_per_region = 2;
  int k_votes = 20;
  int d_hidden = 2048;
  int epochs = 200;
  float learning_rate = 0.001f;
  uint64_t master_seed = 1;
  DatasetSpec dataset;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text, const std::string& origin);

  EnsembleConfig to_ensemble_config() const;
  void validate() const;
};

}  // namespace rdnet
