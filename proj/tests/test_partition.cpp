#include <doctest.h>

#include "helpers.hpp"
#include "rdnet/errors.hpp"
#include "rdnet/partition.hpp"
#include "rdnet/rng.hpp"

using namespace rdnet;

TEST_SUITE("partition") {
  TEST_CASE("partition_count fixtures") {
    CHECK(partition_count({{{2, 1}, {1, 3}}}) == 5);
    CHECK(partition_count({{{1, 1}, {1, 4}, {4, 1}, {2, 4}, {4, 2}, {4, 4}}}) == 41);
    CHECK(partition_count({{{1, 1}}}) == 1);
    CHECK_THROWS_AS(partition_count(PartitionPlan{}), InvalidInputError);
    CHECK_THROWS_AS(partition_count({{{0, 2}}}), InvalidInputError);
  }

  TEST_CASE("region_bounds fixtures") {
    CHECK(region_bounds(640, 480, {4, 4}, 0, 0) == RegionRect{0, 0, 160, 120});
    CHECK(region_bounds(100, 100, {1, 1}, 0, 0) == RegionRect{0, 0, 100, 100});

    // width 10 over 3 columns -> boundaries 0,3,6,10
    CHECK(region_bounds(10, 5, {1, 3}, 0, 0).x0 == 0);
    CHECK(region_bounds(10, 5, {1, 3}, 0, 0).x1 == 3);
    CHECK(region_bounds(10, 5, {1, 3}, 0, 1).x1 == 6);
    CHECK(region_bounds(10, 5, {1, 3}, 0, 2).x1 == 10);
  }

  TEST_CASE("region_bounds rejects bad input") {
    CHECK_THROWS_AS(region_bounds(3, 3, {4, 4}, 0, 0), InvalidInputError);  // image too small
    CHECK_THROWS_AS(region_bounds(10, 10, {2, 2}, 2, 0), InvalidInputError);
    CHECK_THROWS_AS(region_bounds(10, 10, {2, 2}, 0, 2), InvalidInputError);
  }

  TEST_CASE("cells tile the image exactly") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      const int w = 1 + int(rng.below(100));
      const int h = 1 + int(rng.below(100));
      const GridSpec g{1 + int(rng.below(uint32_t(h))), 1 + int(rng.below(uint32_t(w)))};
      std::vector<int> claimed(size_t(w) * h, 0);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
          const RegionRect rect = region_bounds(w, h, g, r, c);
          CHECK(rect.width() >= 1);
          CHECK(rect.height() >= 1);
          for (int y = rect.y0; y < rect.y1; ++y)
            for (int x = rect.x0; x < rect.x1; ++x) ++claimed[size_t(y) * w + x];
        }
      for (int count : claimed) CHECK(count == 1);
    }
  }

  TEST_CASE("extract_regions identity plan") {
    const GrayImage img =
        test::make_gray(kInputWidth, kInputHeight, [](int x, int y) { return x ^ y; });
    const auto regions = extract_regions(img, {{{1, 1}}});
    REQUIRE(regions.size() == 1);
    CHECK(regions[0] == img);
  }

  TEST_CASE("extract_regions canonical order") {
    // distinct constant value per 2x1 half and per 1x3 third
    const int w = 60, h = 40;
    const GrayImage img = test::make_gray(w, h, [&](int x, int y) {
      (void)x;
      return y < h / 2 ? 10 : 20;
    });
    const auto regions = extract_regions(img, {{{2, 1}, {1, 3}}});
    REQUIRE(regions.size() == 5);
    // top half then bottom half
    CHECK(regions[0].data[0] == 10);
    CHECK(regions[1].data[0] == 20);

    const GrayImage cols = test::make_gray(w, h, [&](int x, int) { return (x / 20) * 50 + 50; });
    const auto r2 = extract_regions(cols, {{{2, 1}, {1, 3}}});
    CHECK(r2[2].data[0] == 50);
    CHECK(r2[3].data[0] == 100);
    CHECK(r2[4].data[0] == 150);
  }

  TEST_CASE("extract_regions length and stability") {
    Rng rng(23);
    const GrayImage img =
        test::make_gray(97, 53, [&](int, int) { return int(rng.below(256)); });
    const PartitionPlan plan{{{1, 1}, {2, 4}, {3, 3}}};
    const auto a = extract_regions(img, plan);
    const auto b = extract_regions(img, plan);
    CHECK(int(a.size()) == partition_count(plan));
    CHECK(a == b);
    for (const auto& r : a) {
      CHECK(r.width == kInputWidth);
      CHECK(r.height == kInputHeight);
    }
  }

  TEST_CASE("enumerate_regions walks rows then columns") {
    const auto infos = enumerate_regions({{{4, 4}}});
    REQUIRE(infos.size() == 16);
    CHECK(infos[0].row == 0);
    CHECK(infos[0].col == 0);
    CHECK(infos[1].row == 0);
    CHECK(infos[1].col == 1);
    CHECK(infos[4].row == 1);
    CHECK(infos[4].col == 0);
  }
}
