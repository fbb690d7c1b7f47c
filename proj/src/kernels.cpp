#include "rdnet/kernels.hpp"

#include "rdnet/threads.hpp"

namespace rdnet::kernels {

namespace serial {

void project_sparse(const float* x, const uint16_t* col_idx, int k_ones, int d_hidden, float* f) {
  for (int c = 0; c < d_hidden; ++c)
    f[c] = gather_sum(x, col_idx + size_t(c) * k_ones, k_ones);
}

void top_half_select(const float* f, int d_hidden, uint32_t* active) {
  const int half = d_hidden / 2;
  std::vector<uint32_t> idx(size_t(d_hidden), 0u);
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
    return f[a] > f[b] || (f[a] == f[b] && a < b);
  });
  std::copy(idx.begin(), idx.begin() + half, active);
  std::sort(active, active + half);
}

void add_rows(const float* w, int n, const uint32_t* rows, int n_rows, float* acc) {
  add_rows_span(w, n, rows, n_rows, acc, 0, n);
}

}  // namespace serial

namespace par {

void project_sparse(const float* x, const uint16_t* col_idx, int k_ones, int d_hidden, float* f) {
#pragma omp parallel for schedule(static)
  for (int c = 0; c < d_hidden; ++c)
    f[c] = gather_sum(x, col_idx + size_t(c) * k_ones, k_ones);
}

void add_rows(const float* w, int n, const uint32_t* rows, int n_rows, float* acc) {
  // each thread owns a contiguous span of output columns
#pragma omp parallel
  {
#ifdef _OPENMP
    const int nt = omp_get_num_threads();
    const int tid = omp_get_thread_num();
#else
    const int nt = 1, tid = 0;
#endif
    const int lo = int(size_t(n) * tid / nt);
    const int hi = int(size_t(n) * (tid + 1) / nt);
    add_rows_span(w, n, rows, n_rows, acc, lo, hi);
  }
}

double batch_forward_deltas(const float* w, const float* b, int n, const uint32_t* active,
                            int d_half, int n_items, float* deltas) {
  std::vector<double> losses(size_t(n_items), 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_items; ++i)
    losses[i] = item_forward_delta(w, b, n, active + size_t(i) * d_half, d_half, i,
                                   deltas + size_t(i) * n);
  double sum = 0.0;
  for (int i = 0; i < n_items; ++i) sum += losses[i];
  return sum / n_items;
}

void grad_from_deltas(const float* deltas, int n_items, int n, const uint64_t* obits,
                      int words_per_item, int d_hidden, float inv_n, float* gw) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < d_hidden; ++j) {
    float* row = gw + size_t(j) * n;
    std::fill(row, row + n, 0.f);
    for (int i = 0; i < n_items; ++i) {
      if (!test_bit(obits + size_t(i) * words_per_item, j)) continue;
      const float* d = deltas + size_t(i) * n;
      for (int c = 0; c < n; ++c) row[c] += d[c];
    }
    for (int c = 0; c < n; ++c) row[c] *= inv_n;
  }
}

void bias_grad(const float* deltas, int n_items, int n, float inv_n, float* gb) {
#pragma omp parallel
  {
#ifdef _OPENMP
    const int nt = omp_get_num_threads();
    const int tid = omp_get_thread_num();
#else
    const int nt = 1, tid = 0;
#endif
    const int lo = int(size_t(n) * tid / nt);
    const int hi = int(size_t(n) * (tid + 1) / nt);
    for (int c = lo; c < hi; ++c) gb[c] = 0.f;
    for (int i = 0; i < n_items; ++i) {
      const float* d = deltas + size_t(i) * n;
      for (int c = lo; c < hi; ++c) gb[c] += d[c];
    }
    for (int c = lo; c < hi; ++c) gb[c] *= inv_n;
  }
}

void adam_step(float* p, const float* g, float* m, float* v, size_t count, float lr, float beta1,
               float beta2, float eps, int t) {
  const auto [c1, c2] = adam_corrections(beta1, beta2, t);
#pragma omp parallel
  {
#ifdef _OPENMP
    const int nt = omp_get_num_threads();
    const int tid = omp_get_thread_num();
#else
    const int nt = 1, tid = 0;
#endif
    const size_t lo = count * tid / nt;
    const size_t hi = count * (tid + 1) / nt;
    adam_update_span(p, g, m, v, lo, hi, lr, beta1, beta2, eps, c1, c2);
  }
}

}  // namespace par

void project_sparse(const float* x, const uint16_t* col_idx, int k_ones, int d_hidden, float* f) {
  if (use_parallel())
    par::project_sparse(x, col_idx, k_ones, d_hidden, f);
  else
    serial::project_sparse(x, col_idx, k_ones, d_hidden, f);
}

void top_half_select(const float* f, int d_hidden, uint32_t* active) {
  const int half = d_hidden / 2;
  thread_local std::vector<float> vals;
  vals.assign(f, f + d_hidden);
  std::nth_element(vals.begin(), vals.begin() + (half - 1), vals.end(), std::greater<float>());
  const float cutoff = vals[size_t(half) - 1];

  // everything above the cutoff survives; remaining slots go to the
  // lowest-index values that tie the cutoff. One ascending pass keeps the
  // output sorted.
  int above = 0;
  for (int i = 0; i < d_hidden; ++i) above += f[i] > cutoff ? 1 : 0;
  int ties_left = half - above;
  int count = 0;
  for (int i = 0; i < d_hidden && count < half; ++i) {
    if (f[i] > cutoff) {
      active[count++] = uint32_t(i);
    } else if (f[i] == cutoff && ties_left > 0) {
      active[count++] = uint32_t(i);
      --ties_left;
    }
  }
}

void add_rows(const float* w, int n, const uint32_t* rows, int n_rows, float* acc) {
  if (use_parallel())
    par::add_rows(w, n, rows, n_rows, acc);
  else
    serial::add_rows(w, n, rows, n_rows, acc);
}

double batch_forward_deltas(const float* w, const float* b, int n, const uint32_t* active,
                            int d_half, int n_items, float* deltas) {
  if (use_parallel())
    return par::batch_forward_deltas(w, b, n, active, d_half, n_items, deltas);
  return serial::batch_forward_deltas(w, b, n, active, d_half, n_items, deltas);
}

void grad_from_deltas(const float* deltas, int n_items, int n, const uint64_t* obits,
                      int words_per_item, int d_hidden, float inv_n, float* gw) {
  if (use_parallel())
    par::grad_from_deltas(deltas, n_items, n, obits, words_per_item, d_hidden, inv_n, gw);
  else
    serial::grad_from_deltas(deltas, n_items, n, obits, words_per_item, d_hidden, inv_n, gw);
}

void bias_grad(const float* deltas, int n_items, int n, float inv_n, float* gb) {
  if (use_parallel())
    par::bias_grad(deltas, n_items, n, inv_n, gb);
  else
    serial::bias_grad(deltas, n_items, n, inv_n, gb);
}

void adam_step(float* p, const float* g, float* m, float* v, size_t count, float lr, float beta1,
               float beta2, float eps, int t) {
  if (use_parallel())
    par::adam_step(p, g, m, v, count, lr, beta1, beta2, eps, t);
  else
    serial::adam_step(p, g, m, v, count, lr, beta1, beta2, eps, t);
}

}  // namespace rdnet::kernels
