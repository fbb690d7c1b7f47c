#pragma once

#include <string>
#include <vector>

#include "rdnet/eval.hpp"
#include "rdnet/image.hpp"

namespace rdnet {

// Ordered image sequence of one route.
struct Traversal {
  std::vector<GrayImage> images;
  std::vector<std::string> names;  // original filenames, same order
};

struct DatasetSpec {
  std::string reference_dir;
  std::string query_dir;
  int tolerance = 0;
  std::string gt_file;  // empty: identity mapping query n -> reference n
};

struct Perturbation {
  int brightness_delta = 0;  // added to every pixel
  int shift = 0;             // lateral pixel shift
  double noise_sigma = 0.0;  // additive gaussian noise, luma units
};

struct SynthSpec {
  int n_places = 2;
  int width = 128;
  int height = 64;
  uint64_t seed = 0;
  Perturbation perturbation;
};

struct SynthDataset {
  Traversal reference;
  Traversal query;
  GroundTruth gt;
};

// Loads every PNG/JPEG in the directory, ordered by the integer embedded in
// the filename (numeric, not lexicographic).
Traversal load_traversal(const std::string& dir);

// Identity mapping unless spec.gt_file names a CSV of "query_idx,ref_idx"
// rows (header allowed); tolerance is copied from the spec.
GroundTruth load_ground_truth(const DatasetSpec& spec, int n_query, int n_ref);

// Seeded procedural scenes, one per place; queries are the references run
// through the perturbation. Ground truth is identity with tolerance 0.
SynthDataset generate_synthetic(const SynthSpec& spec);

// Writes reference/, query/ PNG frames and gt.csv under out_dir.
void write_dataset(const SynthDataset& ds, const std::string& out_dir);

// Single-image PNG/JPEG decode and PNG encode (OpenCV imgcodecs).
GrayImage decode_image_file(const std::string& path);
void encode_png(const GrayImage& img, const std::string& path);

}  // namespace rdnet
