#include "rdnet/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rdnet/errors.hpp"

namespace rdnet {

namespace {

using json = nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key))
      throw InvalidInputError("unknown key '" + key + "' in " + where);
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInputError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), path);
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(origin + ": " + e.what());
  }
  if (!root.is_object()) throw InvalidInputError(origin + ": config must be a JSON object");

  reject_unknown_keys(root,
                      {"grids", "z_per_region", "k_votes", "d_hidden", "epochs", "learning_rate",
                       "master_seed", "dataset"},
                      origin);

  RunConfig cfg;
  if (root.contains("grids")) {
    if (!root["grids"].is_array() || root["grids"].empty())
      throw InvalidInputError("'grids' must be a non-empty array of [rows, cols] pairs");
    cfg.grids.clear();
    for (const auto& g : root["grids"]) {
      if (!g.is_array() || g.size() != 2 || !g[0].is_number_integer() ||
          !g[1].is_number_integer())
        throw InvalidInputError("'grids' entries must be [rows, cols] integer pairs");
      cfg.grids.push_back({g[0].get<int>(), g[1].get<int>()});
    }
  }
  cfg.z_per_region = get_or(root, "z_per_region", cfg.z_per_region);
  cfg.k_votes = get_or(root, "k_votes", cfg.k_votes);
  cfg.d_hidden = get_or(root, "d_hidden", cfg.d_hidden);
  cfg.epochs = get_or(root, "epochs", cfg.epochs);
  cfg.learning_rate = get_or(root, "learning_rate", cfg.learning_rate);
  cfg.master_seed = get_or(root, "master_seed", cfg.master_seed);

  if (root.contains("dataset")) {
    const json& ds = root["dataset"];
    if (!ds.is_object()) throw InvalidInputError("'dataset' must be an object");
    reject_unknown_keys(ds, {"reference_dir", "query_dir", "tolerance", "gt_file"},
                        origin + " dataset");
    cfg.dataset.reference_dir = get_or<std::string>(ds, "reference_dir", "");
    cfg.dataset.query_dir = get_or<std::string>(ds, "query_dir", "");
    cfg.dataset.tolerance = get_or(ds, "tolerance", 0);
    cfg.dataset.gt_file = get_or<std::string>(ds, "gt_file", "");
  }

  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  to_ensemble_config().validate();
  if (dataset.tolerance < 0) throw InvalidInputError("dataset tolerance must be >= 0");
}

EnsembleConfig RunConfig::to_ensemble_config() const {
  EnsembleConfig e;
  e.plan.grids = grids;
  e.z_per_region = z_per_region;
  e.k_votes = k_votes;
  e.master_seed = master_seed;
  e.drosonet.d_in = kInputDim;
  e.drosonet.d_hidden = d_hidden;
  e.drosonet.epochs = epochs;
  e.drosonet.learning_rate = learning_rate;
  return e;
}

}  // namespace rdnet
