#include "rdnet/drosonet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdnet/errors.hpp"
#include "rdnet/kernels.hpp"
#include "rdnet/rng.hpp"

namespace rdnet {

int hidden_ones_for_input(int d_in) { return int(std::lround(0.1 * d_in)); }

void DrosoNetConfig::validate() const {
  if (d_in < 1) throw InvalidInputError("d_in must be >= 1");
  if (d_in > 65536) throw InvalidInputError("d_in must be <= 65536");
  if (d_hidden < 2 || d_hidden % 2 != 0) throw InvalidInputError("d_hidden must be even and >= 2");
  if (n_places < 1) throw InvalidInputError("n_places must be >= 1");
  if (epochs < 1) throw InvalidInputError("epochs must be >= 1");
  if (!(learning_rate > 0.f)) throw InvalidInputError("learning_rate must be > 0");
}

DrosoNet::DrosoNet(const DrosoNetConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  k_ones_ = hidden_ones_for_input(cfg_.d_in);
  wpc_ = (cfg_.d_in + 63) / 64;
  h_bits_.assign(size_t(wpc_) * cfg_.d_hidden, 0);
  h_idx_.assign(size_t(k_ones_) * cfg_.d_hidden, 0);

  Rng rng(cfg_.seed);
  // Floyd's subset sampling per column, with the packed column words serving
  // as the membership set; the index lists fall out of the bit scan below.
  for (int c = 0; c < cfg_.d_hidden; ++c) {
    uint64_t* col = h_bits_.data() + size_t(c) * wpc_;
    for (int j = cfg_.d_in - k_ones_; j < cfg_.d_in; ++j) {
      uint32_t t = rng.below(uint32_t(j + 1));
      if ((col[t >> 6] >> (t & 63)) & 1) t = uint32_t(j);
      col[t >> 6] |= uint64_t(1) << (t & 63);
    }
  }
  build_index_from_bits();

  w_.resize(size_t(cfg_.d_hidden) * cfg_.n_places);
  for (auto& x : w_) x = float(rng.uniform(-0.01, 0.01));
  b_.resize(size_t(cfg_.n_places));
  for (auto& x : b_) x = float(rng.uniform(-0.01, 0.01));
}

DrosoNet::DrosoNet(const DrosoNetConfig& cfg, std::vector<uint64_t> h_bits, std::vector<float> w,
                   std::vector<float> bias)
    : cfg_(cfg), h_bits_(std::move(h_bits)), w_(std::move(w)), b_(std::move(bias)) {
  cfg_.validate();
  k_ones_ = hidden_ones_for_input(cfg_.d_in);
  wpc_ = (cfg_.d_in + 63) / 64;
  if (h_bits_.size() != size_t(wpc_) * cfg_.d_hidden)
    throw InvalidInputError("H bit storage size mismatch");
  if (w_.size() != size_t(cfg_.d_hidden) * cfg_.n_places)
    throw InvalidInputError("W storage size mismatch");
  if (b_.size() != size_t(cfg_.n_places)) throw InvalidInputError("bias storage size mismatch");
  build_index_from_bits();
}

void DrosoNet::build_index_from_bits() {
  h_idx_.assign(size_t(k_ones_) * cfg_.d_hidden, 0);
  for (int c = 0; c < cfg_.d_hidden; ++c) {
    const uint64_t* col = h_bits_.data() + size_t(c) * wpc_;
    uint16_t* idx = h_idx_.data() + size_t(c) * k_ones_;
    int count = 0;
    for (int wi = 0; wi < wpc_; ++wi) {
      uint64_t word = col[wi];
      while (word) {
        const int bit = std::countr_zero(word);
        word &= word - 1;
        const int pos = wi * 64 + bit;
        if (pos >= cfg_.d_in) throw InvalidInputError("H bit set beyond d_in");
        if (count == k_ones_) throw InvalidInputError("H column popcount mismatch");
        idx[count++] = uint16_t(pos);
      }
    }
    if (count != k_ones_) throw InvalidInputError("H column popcount mismatch");
  }
}

void DrosoNet::check_input(const InputVector& x) const {
  if (int(x.size()) != cfg_.d_in)
    throw InvalidInputError("input length " + std::to_string(x.size()) + " does not match d_in " +
                            std::to_string(cfg_.d_in));
}

void DrosoNet::hidden_active(const float* x, float* f_scratch, uint32_t* active) const {
  kernels::project_sparse(x, h_idx_.data(), k_ones_, cfg_.d_hidden, f_scratch);
  kernels::top_half_select(f_scratch, cfg_.d_hidden, active);
}

std::vector<uint8_t> DrosoNet::hidden(const InputVector& x) const {
  check_input(x);
  std::vector<float> f(size_t(cfg_.d_hidden), 0.f);
  std::vector<uint32_t> active(size_t(cfg_.d_hidden / 2), 0u);
  hidden_active(x.data(), f.data(), active.data());
  std::vector<uint8_t> o(size_t(cfg_.d_hidden), 0);
  for (uint32_t a : active) o[a] = 1;
  return o;
}

ScoreVector DrosoNet::scores(const InputVector& x) const {
  check_input(x);
  thread_local std::vector<float> f;
  thread_local std::vector<uint32_t> active;
  f.resize(size_t(cfg_.d_hidden));
  active.resize(size_t(cfg_.d_hidden / 2));
  hidden_active(x.data(), f.data(), active.data());
  ScoreVector s(b_.begin(), b_.end());
  kernels::add_rows(w_.data(), cfg_.n_places, active.data(), cfg_.d_hidden / 2, s.data());
  kernels::softmax_inplace(s.data(), cfg_.n_places);
  return s;
}

int DrosoNet::predict(const InputVector& x) const {
  const ScoreVector s = scores(x);
  return int(std::max_element(s.begin(), s.end()) - s.begin());
}

TrainStats DrosoNet::train(const std::vector<InputVector>& subset) {
  const int n = cfg_.n_places;
  if (int(subset.size()) != n)
    throw InvalidInputError("training subset has " + std::to_string(subset.size()) +
                            " items, expected one per place (" + std::to_string(n) + ")");
  for (const auto& x : subset) check_input(x);

  const int d_half = cfg_.d_hidden / 2;
  const int wpi = (cfg_.d_hidden + 63) / 64;  // packed O words per item

  // Hidden activations are fixed while W trains; compute them once.
  std::vector<uint32_t> active(size_t(n) * d_half);
  std::vector<uint64_t> obits(size_t(n) * wpi, 0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    std::vector<float> f(size_t(cfg_.d_hidden), 0.f);
    uint32_t* act = active.data() + size_t(i) * d_half;
    kernels::serial::project_sparse(subset[i].data(), h_idx_.data(), k_ones_, cfg_.d_hidden,
                                    f.data());
    kernels::top_half_select(f.data(), cfg_.d_hidden, act);
    uint64_t* ob = obits.data() + size_t(i) * wpi;
    for (int j = 0; j < d_half; ++j) ob[act[j] >> 6] |= uint64_t(1) << (act[j] & 63);
  }

  const size_t w_count = w_.size();
  std::vector<float> deltas(size_t(n) * n);
  std::vector<float> gw(w_count, 0.f), gb(size_t(n), 0.f);
  std::vector<float> mw(w_count, 0.f), vw(w_count, 0.f);
  std::vector<float> mb(size_t(n), 0.f), vb(size_t(n), 0.f);
  const float lr = cfg_.learning_rate;
  const float beta1 = 0.9f, beta2 = 0.999f, eps = 1e-8f;
  const float inv_n = 1.0f / float(n);

  TrainStats stats;
  for (int t = 1; t <= cfg_.epochs; ++t) {
    const double loss = kernels::batch_forward_deltas(w_.data(), b_.data(), n, active.data(),
                                                      d_half, n, deltas.data());
    if (t == 1) stats.initial_loss = float(loss);
    kernels::grad_from_deltas(deltas.data(), n, n, obits.data(), wpi, cfg_.d_hidden, inv_n,
                              gw.data());
    kernels::bias_grad(deltas.data(), n, n, inv_n, gb.data());
    kernels::adam_step(w_.data(), gw.data(), mw.data(), vw.data(), w_count, lr, beta1, beta2, eps,
                       t);
    kernels::adam_step(b_.data(), gb.data(), mb.data(), vb.data(), size_t(n), lr, beta1, beta2,
                       eps, t);
  }
  stats.final_loss = float(kernels::batch_forward_deltas(w_.data(), b_.data(), n, active.data(),
                                                         d_half, n, deltas.data()));
  return stats;
}

}  // namespace rdnet
