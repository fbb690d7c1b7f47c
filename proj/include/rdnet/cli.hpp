#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "rdnet/config.hpp"
#include "rdnet/datasets.hpp"

namespace rdnet::cli {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;

int cmd_train(const RunConfig& cfg, const std::string& model_path, std::ostream& out,
              std::ostream& err, bool verbose = false);

int cmd_eval(const RunConfig& cfg, const std::string& model_path, const std::string& results_dir,
             std::ostream& out, std::ostream& err);

int cmd_time(const RunConfig& cfg, const std::string& model_path, std::ostream& out,
             std::ostream& err);

// axis is one of grids|k|z. A K sweep reuses a single trained ensemble; the
// other axes retrain per value. Grid values look like "4x4" or "2x1+1x3".
int cmd_ablate(const RunConfig& cfg, const std::string& axis,
               const std::vector<std::string>& values, const std::string& results_dir,
               std::ostream& out, std::ostream& err);

int cmd_synth(const SynthSpec& spec, const std::string& out_dir, std::ostream& out,
              std::ostream& err);

}  // namespace rdnet::cli
