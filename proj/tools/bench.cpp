// Compares the serial reference kernels against the OpenMP variants at
// production sizes and reports end-to-end train/inference throughput.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "rdnet/config.hpp"
#include "rdnet/datasets.hpp"
#include "rdnet/ensemble.hpp"
#include "rdnet/eval.hpp"
#include "rdnet/kernels.hpp"
#include "rdnet/rng.hpp"
#include "rdnet/threads.hpp"

using namespace rdnet;

namespace {

double time_ms(const std::function<void()>& fn, int iters) {
  fn();  // warmup
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
}

void report(const char* name, double serial_ms, double par_ms) {
  std::printf("%-28s serial %9.3f ms   omp %9.3f ms   speedup %.2fx\n", name, serial_ms, par_ms,
              serial_ms / par_ms);
}

}  // namespace

int main() {
  std::printf("threads: %d\n\n", max_threads());

  const int d_in = kInputDim, d_hidden = 2048, n = 1000;
  const int k_ones = hidden_ones_for_input(d_in);
  const int d_half = d_hidden / 2;

  Rng rng(7);
  std::vector<float> x(size_t(d_in), 0.f);
  for (auto& v : x) v = float(rng.uniform01());
  std::vector<uint16_t> col_idx(size_t(d_hidden) * k_ones);
  for (auto& v : col_idx) v = uint16_t(rng.below(uint32_t(d_in)));
  std::vector<float> f(size_t(d_hidden), 0.f);

  report("project_sparse 2048x2048",
         time_ms([&] { kernels::serial::project_sparse(x.data(), col_idx.data(), k_ones, d_hidden,
                                                       f.data()); },
                 50),
         time_ms([&] { kernels::par::project_sparse(x.data(), col_idx.data(), k_ones, d_hidden,
                                                    f.data()); },
                 50));

  std::vector<float> w(size_t(d_hidden) * n);
  for (auto& v : w) v = float(rng.uniform(-0.01, 0.01));
  std::vector<uint32_t> active(size_t(d_half), 0u);
  kernels::top_half_select(f.data(), d_hidden, active.data());
  std::vector<float> acc(size_t(n), 0.f);
  report("add_rows 1024x1000",
         time_ms([&] { kernels::serial::add_rows(w.data(), n, active.data(), d_half, acc.data()); },
                 50),
         time_ms([&] { kernels::par::add_rows(w.data(), n, active.data(), d_half, acc.data()); },
                 50));

  // full-batch step at desk scale: 200 items, 200 classes
  {
    const int nb = 200;
    std::vector<float> wb(size_t(d_hidden) * nb, 0.f), bb(size_t(nb), 0.f);
    for (auto& v : wb) v = float(rng.uniform(-0.01, 0.01));
    for (auto& v : bb) v = float(rng.uniform(-0.01, 0.01));
    const int wpi = (d_hidden + 63) / 64;
    std::vector<uint32_t> acts(size_t(nb) * d_half);
    std::vector<uint64_t> obits(size_t(nb) * wpi, 0);
    std::vector<float> fb(size_t(d_hidden), 0.f);
    for (int i = 0; i < nb; ++i) {
      for (auto& v : fb) v = float(rng.uniform01());
      uint32_t* act = acts.data() + size_t(i) * d_half;
      kernels::top_half_select(fb.data(), d_hidden, act);
      for (int j = 0; j < d_half; ++j)
        obits[size_t(i) * wpi + (act[j] >> 6)] |= uint64_t(1) << (act[j] & 63);
    }
    std::vector<float> deltas(size_t(nb) * nb), gw(wb.size());
    report("batch_forward 200x200",
           time_ms([&] { kernels::serial::batch_forward_deltas(wb.data(), bb.data(), nb,
                                                               acts.data(), d_half, nb,
                                                               deltas.data()); },
                   10),
           time_ms([&] { kernels::par::batch_forward_deltas(wb.data(), bb.data(), nb, acts.data(),
                                                            d_half, nb, deltas.data()); },
                   10));
    report("grad_from_deltas 200x200",
           time_ms([&] { kernels::serial::grad_from_deltas(deltas.data(), nb, nb, obits.data(),
                                                           wpi, d_hidden, 1.f / nb, gw.data()); },
                   10),
           time_ms([&] { kernels::par::grad_from_deltas(deltas.data(), nb, nb, obits.data(), wpi,
                                                        d_hidden, 1.f / nb, gw.data()); },
                   10));
    std::vector<float> m(wb.size(), 0.f), v2(wb.size(), 0.f);
    report("adam_step 2048x200",
           time_ms([&] { kernels::serial::adam_step(wb.data(), gw.data(), m.data(), v2.data(),
                                                    wb.size(), 1e-3f, 0.9f, 0.999f, 1e-8f, 3); },
                   20),
           time_ms([&] { kernels::par::adam_step(wb.data(), gw.data(), m.data(), v2.data(),
                                                 wb.size(), 1e-3f, 0.9f, 0.999f, 1e-8f, 3); },
                   20));
  }

  // end to end: default ensemble on a small synthetic set
  {
    SynthSpec spec;
    spec.n_places = 50;
    spec.width = 256;
    spec.height = 128;
    spec.seed = 3;
    const SynthDataset ds = generate_synthetic(spec);

    RunConfig cfg;
    cfg.epochs = 20;
    std::printf("\nensemble train (T=82, N=50, 20 epochs):\n");
    Ensemble trained = Ensemble::build(cfg.to_ensemble_config(), spec.n_places);
    {
      SingleThreadScope single;
      Ensemble e = Ensemble::build(cfg.to_ensemble_config(), spec.n_places);
      const auto t0 = std::chrono::steady_clock::now();
      e.train_all(ds.reference.images);
      const auto t1 = std::chrono::steady_clock::now();
      std::printf("  serial: %.0f ms\n", std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    {
      const auto t0 = std::chrono::steady_clock::now();
      trained.train_all(ds.reference.images);
      const auto t1 = std::chrono::steady_clock::now();
      std::printf("  omp:    %.0f ms\n", std::chrono::duration<double, std::milli>(t1 - t0).count());
    }

    const TimingStats ts = time_inference(trained, ds.query.images);
    std::printf("\nsingle-threaded inference: mean %.2f ms, median %.2f ms, %.1f fps\n",
                ts.mean_ms, ts.median_ms, ts.fps());
  }
  return 0;
}
