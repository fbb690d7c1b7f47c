#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace rdnet::kernels {

// Numeric inner loops of the classifier. Every kernel exists twice: a serial
// reference under kernels::serial and an OpenMP variant under kernels::par.
// The two produce bit-identical results (the per-element order of floating
// point operations is the same; only the outer loop is distributed), which
// the unit tests and the bench tool rely on. The unqualified functions
// dispatch to one of the two based on the current threading context.
//
// Conventions: w is a d_hidden x n row-major matrix, `active` lists the
// indices of the binary hidden units that are on, `deltas` is an
// n_items x n row-major matrix of softmax-minus-onehot rows, and item i
// carries class label i.

// Gather-sum with a fixed four-accumulator order, shared by both variants.
// Indices are 16-bit: the projection input never exceeds 65536 elements and
// the index stream is half of this kernel's memory traffic.
inline float gather_sum(const float* x, const uint16_t* idx, int k) {
  float s0 = 0.f, s1 = 0.f, s2 = 0.f, s3 = 0.f;
  int j = 0;
  for (; j + 4 <= k; j += 4) {
    s0 += x[idx[j]];
    s1 += x[idx[j + 1]];
    s2 += x[idx[j + 2]];
    s3 += x[idx[j + 3]];
  }
  float tail = 0.f;
  for (; j < k; ++j) tail += x[idx[j]];
  return ((s0 + s1) + (s2 + s3)) + tail;
}

template <class T>
inline void softmax_inplace(T* v, int n) {
  T mx = v[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, v[i]);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = std::exp(v[i] - mx);
    sum += double(v[i]);
  }
  const T inv = T(1.0 / sum);
  for (int i = 0; i < n; ++i) v[i] *= inv;
}

// acc[j] += w[row][j] for the listed rows, restricted to columns [lo, hi).
// Rows are processed in blocks of four with a fixed (s0+s1)+(s2+s3) grouping;
// every caller (serial, OpenMP, training, inference) shares this order, so
// results are bit-identical across variants and column partitions.
template <class T>
inline void add_rows_span(const T* w, int n, const uint32_t* rows, int n_rows, T* acc, int lo,
                          int hi) {
  int r = 0;
  for (; r + 4 <= n_rows; r += 4) {
    const T* s0 = w + size_t(rows[r + 0]) * n;
    const T* s1 = w + size_t(rows[r + 1]) * n;
    const T* s2 = w + size_t(rows[r + 2]) * n;
    const T* s3 = w + size_t(rows[r + 3]) * n;
    for (int j = lo; j < hi; ++j) acc[j] += (s0[j] + s1[j]) + (s2[j] + s3[j]);
  }
  for (; r < n_rows; ++r) {
    const T* src = w + size_t(rows[r]) * n;
    for (int j = lo; j < hi; ++j) acc[j] += src[j];
  }
}

template <class T>
inline void add_rows_ref(const T* w, int n, const uint32_t* rows, int n_rows, T* acc) {
  add_rows_span(w, n, rows, n_rows, acc, 0, n);
}

// Forward pass of one item written into its delta row: logits -> softmax ->
// subtract one-hot. Returns the item's cross-entropy loss.
template <class T>
inline double item_forward_delta(const T* w, const T* b, int n, const uint32_t* act, int d_half,
                                 int label, T* row) {
  std::copy(b, b + n, row);
  add_rows_ref(w, n, act, d_half, row);
  softmax_inplace(row, n);
  const double loss = -std::log(std::max(double(row[label]), 1e-300));
  row[label] -= T(1);
  return loss;
}

template <class T>
inline void adam_update_span(T* p, const T* g, T* m, T* v, size_t lo, size_t hi, T lr, T beta1,
                             T beta2, T eps, T c1, T c2) {
  for (size_t i = lo; i < hi; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
    const T mhat = m[i] * c1;
    const T vhat = v[i] * c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template <class T>
inline std::pair<T, T> adam_corrections(T beta1, T beta2, int t) {
  return {T(1.0 / (1.0 - std::pow(double(beta1), t))),
          T(1.0 / (1.0 - std::pow(double(beta2), t)))};
}

inline bool test_bit(const uint64_t* words, int bit) {
  return (words[bit >> 6] >> (bit & 63)) & 1u;
}

// ---------------------------------------------------------------------------
// Serial reference implementations.

namespace serial {

// f[c] = sum of x at the column's index list.
void project_sparse(const float* x, const uint16_t* col_idx, int k_ones, int d_hidden, float* f);

// Indices of the d_hidden/2 largest values of f, ties at the cutoff resolved
// toward lower indices; written in ascending order. Reference: full sort.
void top_half_select(const float* f, int d_hidden, uint32_t* active);

void add_rows(const float* w, int n, const uint32_t* rows, int n_rows, float* acc);

// Full-batch forward pass; deltas filled per item, returns mean loss.
template <class T>
double batch_forward_deltas(const T* w, const T* b, int n, const uint32_t* active, int d_half,
                            int n_items, T* deltas) {
  std::vector<double> losses(size_t(n_items), 0.0);
  for (int i = 0; i < n_items; ++i)
    losses[i] = item_forward_delta(w, b, n, active + size_t(i) * d_half, d_half, i,
                                   deltas + size_t(i) * n);
  double sum = 0.0;
  for (int i = 0; i < n_items; ++i) sum += losses[i];
  return sum / n_items;
}

// gw[j][c] = inv_n * sum over items whose hidden bit j is set of deltas[i][c].
template <class T>
void grad_from_deltas(const T* deltas, int n_items, int n, const uint64_t* obits,
                      int words_per_item, int d_hidden, T inv_n, T* gw) {
  std::fill(gw, gw + size_t(d_hidden) * n, T(0));
  for (int j = 0; j < d_hidden; ++j) {
    T* row = gw + size_t(j) * n;
    for (int i = 0; i < n_items; ++i) {
      if (!test_bit(obits + size_t(i) * words_per_item, j)) continue;
      const T* d = deltas + size_t(i) * n;
      for (int c = 0; c < n; ++c) row[c] += d[c];
    }
    for (int c = 0; c < n; ++c) row[c] *= inv_n;
  }
}

// gb[c] = inv_n * sum over items of deltas[i][c].
template <class T>
void bias_grad(const T* deltas, int n_items, int n, T inv_n, T* gb) {
  std::fill(gb, gb + n, T(0));
  for (int i = 0; i < n_items; ++i) {
    const T* d = deltas + size_t(i) * n;
    for (int c = 0; c < n; ++c) gb[c] += d[c];
  }
  for (int c = 0; c < n; ++c) gb[c] *= inv_n;
}

template <class T>
void adam_step(T* p, const T* g, T* m, T* v, size_t count, T lr, T beta1, T beta2, T eps, int t) {
  const auto [c1, c2] = adam_corrections(beta1, beta2, t);
  adam_update_span(p, g, m, v, size_t(0), count, lr, beta1, beta2, eps, c1, c2);
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP implementations; outputs bit-identical to serial.

namespace par {

void project_sparse(const float* x, const uint16_t* col_idx, int k_ones, int d_hidden, float* f);
void add_rows(const float* w, int n, const uint32_t* rows, int n_rows, float* acc);
double batch_forward_deltas(const float* w, const float* b, int n, const uint32_t* active,
                            int d_half, int n_items, float* deltas);
void grad_from_deltas(const float* deltas, int n_items, int n, const uint64_t* obits,
                      int words_per_item, int d_hidden, float inv_n, float* gw);
void bias_grad(const float* deltas, int n_items, int n, float inv_n, float* gb);
void adam_step(float* p, const float* g, float* m, float* v, size_t count, float lr, float beta1,
               float beta2, float eps, int t);

}  // namespace par

// ---------------------------------------------------------------------------
// Dispatchers (parallel when threads are available and we are not nested).

void project_sparse(const float* x, const uint16_t* col_idx, int k_ones, int d_hidden, float* f);

// Production selection via nth_element; same result as serial::top_half_select.
void top_half_select(const float* f, int d_hidden, uint32_t* active);

void add_rows(const float* w, int n, const uint32_t* rows, int n_rows, float* acc);
double batch_forward_deltas(const float* w, const float* b, int n, const uint32_t* active,
                            int d_half, int n_items, float* deltas);
void grad_from_deltas(const float* deltas, int n_items, int n, const uint64_t* obits,
                      int words_per_item, int d_hidden, float inv_n, float* gw);
void bias_grad(const float* deltas, int n_items, int n, float inv_n, float* gb);
void adam_step(float* p, const float* g, float* m, float* v, size_t count, float lr, float beta1,
               float beta2, float eps, int t);

}  // namespace rdnet::kernels
