#pragma once

#include <cstdint>
#include <vector>

#include "rdnet/image.hpp"

namespace rdnet {

struct DrosoNetConfig {
  int d_in = kInputDim;      // input vector length
  int d_hidden = 2048;       // projection width; must be even
  int n_places = 1;          // N, one class per reference place
  int epochs = 200;
  float learning_rate = 0.001f;
  uint64_t seed = 0;

  void validate() const;  // throws InvalidInputError
  bool operator==(const DrosoNetConfig&) const = default;
};

// Softmax score distribution over the N reference places.
using ScoreVector = std::vector<float>;

struct TrainStats {
  float initial_loss = 0.f;  // mean loss before the first update
  float final_loss = 0.f;    // mean loss after the last update
};

// Compact place classifier: a fixed sparse binary projection H (10% of each
// column set), winner-take-all binarization keeping the top half of the
// projected values, and a trainable linear layer with softmax output.
// H never trains; only the linear layer (W, bias) learns.
class DrosoNet {
 public:
  explicit DrosoNet(const DrosoNetConfig& cfg);

  // Rebuild from serialized storage; validates H column popcounts.
  DrosoNet(const DrosoNetConfig& cfg, std::vector<uint64_t> h_bits, std::vector<float> w,
           std::vector<float> bias);

  const DrosoNetConfig& config() const { return cfg_; }
  int ones_per_column() const { return k_ones_; }
  int words_per_column() const { return wpc_; }

  // Binary hidden activation O for input x; exactly d_hidden/2 ones.
  std::vector<uint8_t> hidden(const InputVector& x) const;

  ScoreVector scores(const InputVector& x) const;

  // Index of the largest score; ties go to the lowest index.
  int predict(const InputVector& x) const;

  // Full-batch training on one subset: item at index n is place n's region.
  // Adam, beta1=0.9, beta2=0.999, eps=1e-8, config epochs and learning rate.
  TrainStats train(const std::vector<InputVector>& subset);

  // Storage access (serialization, tests).
  const std::vector<uint64_t>& h_bits() const { return h_bits_; }  // packed column-major
  const std::vector<float>& weights() const { return w_; }         // d_hidden x N row-major
  const std::vector<float>& bias() const { return b_; }

 private:
  void build_index_from_bits();
  void check_input(const InputVector& x) const;
  void hidden_active(const float* x, float* f_scratch, uint32_t* active) const;

  DrosoNetConfig cfg_;
  int k_ones_ = 0;  // ones per H column = round(0.1 * d_in)
  int wpc_ = 0;     // 64-bit words per packed H column
  std::vector<uint64_t> h_bits_;  // column-major packed bits, d_hidden columns
  std::vector<uint16_t> h_idx_;   // flat k_ones ascending indices per column
  std::vector<float> w_;          // d_hidden x n_places
  std::vector<float> b_;          // n_places
};

int hidden_ones_for_input(int d_in);  // round(0.1 * d_in)

}  // namespace rdnet
