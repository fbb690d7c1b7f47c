#include "rdnet/partition.hpp"

#include <cstdint>

#include "rdnet/errors.hpp"

namespace rdnet {

namespace {

void check_grid(const GridSpec& g) {
  if (g.rows < 1 || g.cols < 1)
    throw InvalidInputError("grid must have at least 1 row and 1 column, got " + grid_label(g));
}

}  // namespace

int partition_count(const PartitionPlan& plan) {
  if (plan.grids.empty()) throw InvalidInputError("partition plan has no grids");
  int64_t p = 0;
  for (const auto& g : plan.grids) {
    check_grid(g);
    p += int64_t(g.rows) * g.cols;
  }
  if (p > (int64_t(1) << 24)) throw InvalidInputError("partition plan is unreasonably large");
  return int(p);
}

std::vector<RegionInfo> enumerate_regions(const PartitionPlan& plan) {
  std::vector<RegionInfo> out;
  out.reserve(size_t(partition_count(plan)));
  for (int g = 0; g < int(plan.grids.size()); ++g)
    for (int r = 0; r < plan.grids[g].rows; ++r)
      for (int c = 0; c < plan.grids[g].cols; ++c)
        out.push_back({g, r, c, plan.grids[g]});
  return out;
}

RegionRect region_bounds(int img_w, int img_h, const GridSpec& grid, int row, int col) {
  check_grid(grid);
  if (row < 0 || row >= grid.rows || col < 0 || col >= grid.cols)
    throw InvalidInputError("cell (" + std::to_string(row) + "," + std::to_string(col) +
                            ") outside grid " + grid_label(grid));
  if (img_w < grid.cols || img_h < grid.rows)
    throw InvalidInputError("image " + std::to_string(img_w) + "x" + std::to_string(img_h) +
                            " smaller than grid " + grid_label(grid));
  RegionRect rect;
  rect.x0 = int(int64_t(col) * img_w / grid.cols);
  rect.x1 = int(int64_t(col + 1) * img_w / grid.cols);
  rect.y0 = int(int64_t(row) * img_h / grid.rows);
  rect.y1 = int(int64_t(row + 1) * img_h / grid.rows);
  return rect;
}

GrayImage crop(const GrayImage& img, const RegionRect& rect) {
  if (rect.x0 < 0 || rect.y0 < 0 || rect.x1 > img.width || rect.y1 > img.height ||
      rect.width() < 1 || rect.height() < 1)
    throw InvalidInputError("crop rectangle outside image");
  GrayImage out{rect.width(), rect.height(),
                std::vector<uint8_t>(size_t(rect.width()) * rect.height())};
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = img.at(rect.x0 + x, rect.y0 + y);
  return out;
}

std::vector<GrayImage> extract_regions(const GrayImage& img, const PartitionPlan& plan) {
  const auto regions = enumerate_regions(plan);
  std::vector<GrayImage> out;
  out.reserve(regions.size());
  for (const auto& info : regions) {
    const RegionRect rect = region_bounds(img.width, img.height, info.spec, info.row, info.col);
    out.push_back(resize(crop(img, rect), kInputWidth, kInputHeight));
  }
  return out;
}

std::string grid_label(const GridSpec& grid) {
  return std::to_string(grid.rows) + "x" + std::to_string(grid.cols);
}

}  // namespace rdnet
