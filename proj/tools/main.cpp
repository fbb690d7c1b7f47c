#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdnet/cli.hpp"
#include "rdnet/errors.hpp"
#include "rdnet/threads.hpp"

namespace {

// Loads the run configuration, applying the --seed override.
rdnet::RunConfig load_config(const std::string& path, std::optional<uint64_t> seed) {
  if (path.empty())
    throw rdnet::InvalidInputError("--config is required for this command");
  rdnet::RunConfig cfg = rdnet::RunConfig::from_json_file(path);
  if (seed) cfg.master_seed = *seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"region-ensemble visual place recognition"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<uint64_t> seed;
  int threads = 0;
  bool verbose = false;
  app.add_option("--config", config_path, "run configuration JSON file");
  app.add_option("--seed", seed, "override the config master seed");
  app.add_option("--threads", threads, "worker thread count (ignored by 'time')");
  app.add_flag("--verbose", verbose, "more output");

  auto* train = app.add_subcommand("train", "train an ensemble on the reference traversal");
  std::string model_path = "model.rdn";
  train->add_option("--model", model_path, "output model file")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "match the query traversal and write metrics");
  std::string eval_model, results_dir = "results";
  eval->add_option("--model", eval_model, "trained model file")->required();
  eval->add_option("--results", results_dir, "output directory")->capture_default_str();

  auto* time_cmd = app.add_subcommand("time", "measure single-threaded inference latency");
  std::string time_model;
  time_cmd->add_option("--model", time_model, "trained model file")->required();

  auto* ablate = app.add_subcommand("ablate", "sweep grids, K or Z and record metrics");
  std::string axis, ablate_results = "results";
  std::vector<std::string> values;
  ablate->add_option("--axis", axis, "one of grids|k|z")->required();
  ablate->add_option("--values", values, "sweep values (e.g. 1 5 20, or 4x4 2x1+1x3)")
      ->required()
      ->delimiter(',');
  ablate->add_option("--results", ablate_results, "output directory")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  rdnet::SynthSpec spec;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--places", spec.n_places, "number of places")->capture_default_str();
  synth->add_option("--width", spec.width, "frame width")->capture_default_str();
  synth->add_option("--height", spec.height, "frame height")->capture_default_str();
  synth->add_option("--brightness", spec.perturbation.brightness_delta,
                    "query brightness delta")->capture_default_str();
  synth->add_option("--shift", spec.perturbation.shift, "query lateral shift in pixels")
      ->capture_default_str();
  synth->add_option("--noise", spec.perturbation.noise_sigma, "query noise sigma")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return rdnet::cli::kExitInvalid;
  }

  rdnet::set_threads(threads);

  try {
    if (train->parsed())
      return rdnet::cli::cmd_train(load_config(config_path, seed), model_path, std::cout,
                                   std::cerr, verbose);
    if (eval->parsed())
      return rdnet::cli::cmd_eval(load_config(config_path, seed), eval_model, results_dir,
                                  std::cout, std::cerr);
    if (time_cmd->parsed())
      return rdnet::cli::cmd_time(load_config(config_path, seed), time_model, std::cout,
                                  std::cerr);
    if (ablate->parsed())
      return rdnet::cli::cmd_ablate(load_config(config_path, seed), axis, values, ablate_results,
                                    std::cout, std::cerr);
    if (synth->parsed()) {
      if (seed) spec.seed = *seed;
      return rdnet::cli::cmd_synth(spec, synth_out, std::cout, std::cerr);
    }
  } catch (const rdnet::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rdnet::cli::kExitInvalid;
  } catch (const rdnet::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rdnet::cli::kExitInvalid;
  }
  return rdnet::cli::kExitInvalid;
}
