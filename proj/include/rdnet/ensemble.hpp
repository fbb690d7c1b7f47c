#pragma once

#include <string>
#include <vector>

#include "rdnet/drosonet.hpp"
#include "rdnet/partition.hpp"

namespace rdnet {

struct EnsembleConfig {
  PartitionPlan plan;
  int z_per_region = 2;  // Z
  int k_votes = 20;      // K
  DrosoNetConfig drosonet;  // n_places and seed are filled in at build time
  uint64_t master_seed = 1;

  void validate() const;
};

// P groups of Z DrosoNets (T = P*Z total); group p is trained exclusively on
// region p of the reference traversal. Net seeds derive from
// (master_seed, group, member), so the trained model is independent of the
// training schedule and thread count.
class Ensemble {
 public:
  static Ensemble build(const EnsembleConfig& cfg, int n_places);

  int regions() const { return p_; }        // P
  int group_size() const { return z_; }     // Z
  int size() const { return p_ * z_; }      // T
  int n_places() const { return n_places_; }
  bool trained() const { return trained_; }
  const EnsembleConfig& config() const { return cfg_; }

  const DrosoNet& net(int group, int member) const;
  DrosoNet& net(int group, int member);

  // Trains every group on its region subset; returns per-net stats in
  // canonical net order (group-major).
  std::vector<TrainStats> train_all(const std::vector<GrayImage>& reference);

  // T score vectors in canonical order: group 0 member 0, group 0 member 1,
  // ..., group P-1 member Z-1.
  std::vector<ScoreVector> infer(const GrayImage& query) const;

  void save(const std::string& path) const;
  static Ensemble load(const std::string& path);

 private:
  Ensemble() = default;

  EnsembleConfig cfg_;
  int p_ = 0;
  int z_ = 0;
  int n_places_ = 0;
  bool trained_ = false;
  std::vector<DrosoNet> nets_;  // flat, index = group * Z + member
};

// Subset p holds, for each reference image in order, region p flattened to
// the classifier input vector.
std::vector<std::vector<InputVector>> make_training_subsets(
    const std::vector<GrayImage>& reference_images, const PartitionPlan& plan);

uint64_t drosonet_seed(uint64_t master_seed, int group, int member);

}  // namespace rdnet
