#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "rdnet/datasets.hpp"
#include "rdnet/ensemble.hpp"
#include "rdnet/errors.hpp"
#include "rdnet/eval.hpp"
#include "rdnet/rng.hpp"
#include "rdnet/threads.hpp"

using namespace rdnet;

namespace {

EnsembleConfig tiny_ensemble_config(std::vector<GridSpec> grids, int z, uint64_t seed,
                                    int d_hidden = 128, int epochs = 80) {
  EnsembleConfig cfg;
  cfg.plan.grids = std::move(grids);
  cfg.z_per_region = z;
  cfg.k_votes = 3;
  cfg.master_seed = seed;
  cfg.drosonet.d_hidden = d_hidden;
  cfg.drosonet.epochs = epochs;
  return cfg;
}

std::vector<GrayImage> random_reference(int n, int w, int h, uint64_t seed) {
  Rng rng(seed);
  std::vector<GrayImage> images;
  images.reserve(size_t(n));
  for (int i = 0; i < n; ++i)
    images.push_back(test::make_gray(w, h, [&](int, int) { return int(rng.below(256)); }));
  return images;
}

}  // namespace

TEST_SUITE("ensemble") {
  TEST_CASE("build counts") {
    const auto cfg41 = tiny_ensemble_config(
        {{1, 1}, {1, 4}, {4, 1}, {2, 4}, {4, 2}, {4, 4}}, 2, 1);
    const Ensemble e = Ensemble::build(cfg41, 3);
    CHECK(e.regions() == 41);
    CHECK(e.size() == 82);
    CHECK_FALSE(e.trained());

    CHECK(Ensemble::build(tiny_ensemble_config({{1, 1}}, 1, 1), 2).size() == 1);
    CHECK(Ensemble::build(tiny_ensemble_config({{2, 1}, {1, 3}}, 3, 1), 2).size() == 15);
  }

  TEST_CASE("per-net seeds are distinct and schedule independent") {
    const auto cfg = tiny_ensemble_config({{2, 2}}, 3, 99);
    std::vector<uint64_t> seeds;
    for (int p = 0; p < 4; ++p)
      for (int z = 0; z < 3; ++z) seeds.push_back(drosonet_seed(cfg.master_seed, p, z));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());

    const Ensemble e = Ensemble::build(cfg, 2);
    CHECK(e.net(0, 0).config().seed == drosonet_seed(99, 0, 0));
    CHECK(e.net(3, 2).config().seed == drosonet_seed(99, 3, 2));
  }

  TEST_CASE("make_training_subsets layout and consistency") {
    const auto reference = random_reference(6, 80, 40, 7);
    const PartitionPlan plan{{{2, 1}, {1, 3}}};
    const auto subsets = make_training_subsets(reference, plan);
    REQUIRE(subsets.size() == 5);
    for (const auto& s : subsets) CHECK(s.size() == 6);

    // subset item (p, n) equals extracting region p from image n directly
    for (int n = 0; n < 6; ++n) {
      const auto regions = extract_regions(reference[size_t(n)], plan);
      for (int p = 0; p < 5; ++p) CHECK(subsets[size_t(p)][size_t(n)] == flatten(regions[size_t(p)]));
    }
  }

  TEST_CASE("whole-image plan reduces subsets to plain flattens") {
    const auto reference = random_reference(3, kInputWidth, kInputHeight, 8);
    const auto subsets = make_training_subsets(reference, {{{1, 1}}});
    REQUIRE(subsets.size() == 1);
    for (int n = 0; n < 3; ++n) CHECK(subsets[0][size_t(n)] == flatten(reference[size_t(n)]));
  }

  TEST_CASE("region inputs are isolated from the rest of the image") {
    const auto reference = random_reference(4, 64, 32, 9);
    const PartitionPlan plan{{{2, 1}}};
    const auto base = make_training_subsets(reference, plan);

    // zero everything outside region 0 (the top half)
    auto masked = reference;
    for (auto& img : masked)
      for (int y = img.height / 2; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) img.at(x, y) = 0;
    const auto after = make_training_subsets(masked, plan);

    CHECK(after[0] == base[0]);
    CHECK(after[1] != base[1]);
  }

  TEST_CASE("train_all wiring and determinism") {
    const auto reference = random_reference(5, 64, 32, 10);
    const auto cfg = tiny_ensemble_config({{2, 1}}, 2, 4);

    Ensemble a = Ensemble::build(cfg, 5);
    CHECK_THROWS_AS(a.infer(reference[0]), StateError);
    CHECK_THROWS_AS(a.train_all(random_reference(4, 64, 32, 1)), InvalidInputError);

    const auto stats = a.train_all(reference);
    CHECK(a.trained());
    REQUIRE(stats.size() == 4);
    for (const auto& s : stats) CHECK(s.final_loss < s.initial_loss);

    Ensemble b = Ensemble::build(cfg, 5);
    b.train_all(reference);
    for (int p = 0; p < 2; ++p)
      for (int z = 0; z < 2; ++z) {
        CHECK(a.net(p, z).weights() == b.net(p, z).weights());
        CHECK(a.net(p, z).bias() == b.net(p, z).bias());
      }
  }

  TEST_CASE("thread count does not change the trained model") {
    const auto reference = random_reference(4, 64, 32, 11);
    const auto cfg = tiny_ensemble_config({{1, 2}}, 2, 21, 64, 40);

    const int saved = max_threads();
    set_threads(1);
    Ensemble serial = Ensemble::build(cfg, 4);
    serial.train_all(reference);
    set_threads(saved > 1 ? saved : 2);
    Ensemble parallel = Ensemble::build(cfg, 4);
    parallel.train_all(reference);
    set_threads(saved);

    for (int p = 0; p < 2; ++p)
      for (int z = 0; z < 2; ++z)
        CHECK(serial.net(p, z).weights() == parallel.net(p, z).weights());
  }

  TEST_CASE("infer contract") {
    const auto reference = random_reference(6, 64, 32, 12);
    Ensemble e = Ensemble::build(tiny_ensemble_config({{2, 1}, {1, 3}}, 2, 5), 6);
    e.train_all(reference);

    const auto scores = e.infer(reference[0]);
    REQUIRE(int(scores.size()) == e.size());
    for (const auto& s : scores) {
      REQUIRE(s.size() == 6);
      double sum = 0;
      for (float v : s) {
        CHECK(v > 0.f);
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }

    // concurrent inference returns the same result as sequential
    const auto again = e.infer(reference[0]);
    CHECK(scores == again);
  }

  TEST_CASE("trained groups memorize their region inputs") {
    SynthSpec spec;
    spec.n_places = 12;
    spec.width = 96;
    spec.height = 48;
    spec.seed = 500;
    const SynthDataset ds = generate_synthetic(spec);

    const auto cfg = tiny_ensemble_config({{1, 1}, {2, 2}}, 2, 6, 1024, 200);
    Ensemble e = Ensemble::build(cfg, spec.n_places);
    e.train_all(ds.reference.images);

    // each net recovers >= 95% of its own training subset
    const auto subsets = make_training_subsets(ds.reference.images, cfg.plan);
    for (int p = 0; p < e.regions(); ++p)
      for (int z = 0; z < e.group_size(); ++z) {
        int correct = 0;
        for (int n = 0; n < spec.n_places; ++n)
          if (e.net(p, z).predict(subsets[size_t(p)][size_t(n)]) == n) ++correct;
        CHECK(correct >= int(std::ceil(0.95 * spec.n_places)));
      }

    // end-to-end: querying with training images recovers the place index
    GroundTruth gt;
    gt.mapping.resize(size_t(spec.n_places));
    for (int i = 0; i < spec.n_places; ++i) gt.mapping[size_t(i)] = i;
    const auto records = run_queries(e, ds.reference.images, gt);
    int correct = 0;
    for (const auto& r : records) correct += r.correct ? 1 : 0;
    CHECK(correct >= int(std::ceil(0.95 * spec.n_places)));
  }

  TEST_CASE("save/load round trip") {
    test::TempDir tmp("model");
    const std::string path = (tmp.path() / "toy.rdn").string();

    const auto reference = random_reference(6, 64, 32, 13);
    const auto cfg = tiny_ensemble_config({{2, 1}}, 2, 77);
    Ensemble e = Ensemble::build(cfg, 6);
    CHECK_THROWS_AS(e.save(path), StateError);  // untrained
    e.train_all(reference);
    e.save(path);

    const Ensemble loaded = Ensemble::load(path);
    CHECK(loaded.trained());
    CHECK(loaded.n_places() == 6);
    CHECK(loaded.size() == e.size());
    CHECK(loaded.config().k_votes == cfg.k_votes);
    CHECK(loaded.config().master_seed == cfg.master_seed);
    CHECK(loaded.config().plan == cfg.plan);
    CHECK(loaded.config().drosonet.epochs == cfg.drosonet.epochs);
    CHECK(loaded.config().drosonet.learning_rate == cfg.drosonet.learning_rate);
    for (int p = 0; p < 2; ++p)
      for (int z = 0; z < 2; ++z) {
        CHECK(loaded.net(p, z).h_bits() == e.net(p, z).h_bits());
        CHECK(loaded.net(p, z).weights() == e.net(p, z).weights());
        CHECK(loaded.net(p, z).bias() == e.net(p, z).bias());
        CHECK(loaded.net(p, z).config().seed == e.net(p, z).config().seed);
      }

    // inference after load is element-wise identical
    const GrayImage query = random_reference(1, 64, 32, 14)[0];
    CHECK(e.infer(query) == loaded.infer(query));
  }

  TEST_CASE("load rejects corruption") {
    test::TempDir tmp("corrupt");
    const std::string path = (tmp.path() / "toy.rdn").string();
    const auto reference = random_reference(4, 64, 32, 15);
    Ensemble e = Ensemble::build(tiny_ensemble_config({{1, 1}}, 2, 3), 4);
    e.train_all(reference);
    e.save(path);

    auto bytes = [&] {
      std::ifstream in(path, std::ios::binary);
      return std::vector<char>((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    }();

    SUBCASE("tampered header byte") {
      auto copy = bytes;
      copy[5] ^= 0x40;
      std::ofstream(path, std::ios::binary).write(copy.data(), std::streamsize(copy.size()));
      CHECK_THROWS_AS(Ensemble::load(path), FormatError);
    }
    SUBCASE("tampered payload byte") {
      auto copy = bytes;
      copy[copy.size() / 2] ^= 0x01;
      std::ofstream(path, std::ios::binary).write(copy.data(), std::streamsize(copy.size()));
      CHECK_THROWS_AS(Ensemble::load(path), FormatError);
    }
    SUBCASE("truncation") {
      std::ofstream(path, std::ios::binary)
          .write(bytes.data(), std::streamsize(bytes.size() / 2));
      CHECK_THROWS_AS(Ensemble::load(path), FormatError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(Ensemble::load(path + ".nope"), InvalidInputError); }
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("per-region metrics of a whole-image plan equal the full system") {
    SynthSpec spec;
    spec.n_places = 8;
    spec.width = 64;
    spec.height = 32;
    spec.seed = 321;
    spec.perturbation.noise_sigma = 12.0;
    const SynthDataset ds = generate_synthetic(spec);

    Ensemble e = Ensemble::build(tiny_ensemble_config({{1, 1}}, 3, 8, 256, 120), spec.n_places);
    e.train_all(ds.reference.images);

    const auto per_region = per_region_metrics(e, ds.query.images, ds.gt);
    REQUIRE(per_region.size() == 1);
    const Metrics full = compute_metrics(run_queries(e, ds.query.images, ds.gt));
    CHECK(per_region[0].auc == full.auc);
    CHECK(per_region[0].ep == full.ep);
  }

  TEST_CASE("per-region metrics come in canonical order and count") {
    SynthSpec spec;
    spec.n_places = 6;
    spec.width = 64;
    spec.height = 32;
    spec.seed = 33;
    const SynthDataset ds = generate_synthetic(spec);
    Ensemble e = Ensemble::build(tiny_ensemble_config({{2, 1}, {1, 3}}, 1, 9, 64, 30),
                                 spec.n_places);
    e.train_all(ds.reference.images);
    CHECK(per_region_metrics(e, ds.query.images, ds.gt).size() == 5);
  }

  TEST_CASE("time_inference reports one sample per query") {
    SynthSpec spec;
    spec.n_places = 5;
    spec.width = 64;
    spec.height = 32;
    spec.seed = 44;
    const SynthDataset ds = generate_synthetic(spec);
    Ensemble e = Ensemble::build(tiny_ensemble_config({{1, 1}}, 1, 10, 64, 20), spec.n_places);
    e.train_all(ds.reference.images);

    const TimingStats stats = time_inference(e, ds.query.images);
    CHECK(stats.samples == 5);
    CHECK(stats.fps() == doctest::Approx(1000.0 / stats.mean_ms).epsilon(1e-12));
    CHECK(stats.median_ms <= stats.p99_ms);
    CHECK_THROWS_AS(time_inference(e, {}), InvalidInputError);
  }

  TEST_CASE("evaluate bundles records, metrics and per-region metrics") {
    SynthSpec spec;
    spec.n_places = 6;
    spec.width = 64;
    spec.height = 32;
    spec.seed = 55;
    const SynthDataset ds = generate_synthetic(spec);
    Ensemble e = Ensemble::build(tiny_ensemble_config({{2, 1}}, 1, 11, 64, 40), spec.n_places);
    e.train_all(ds.reference.images);

    const EvalBundle bundle = evaluate(e, ds.query.images, ds.gt);
    CHECK(bundle.records.size() == 6);
    CHECK(bundle.per_region.size() == 2);
    const Metrics direct = compute_metrics(bundle.records);
    CHECK(bundle.metrics.auc == direct.auc);
  }
}
