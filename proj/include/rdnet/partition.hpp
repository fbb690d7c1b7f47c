#pragma once

#include <string>
#include <vector>

#include "rdnet/image.hpp"

namespace rdnet {

// One slicing grid: r rows by c columns.
struct GridSpec {
  int rows = 1;
  int cols = 1;

  bool operator==(const GridSpec&) const = default;
};

// Half-open pixel rectangle [x0,x1) x [y0,y1).
struct RegionRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool operator==(const RegionRect&) const = default;
};

// Ordered list of grids. Regions are enumerated grid by grid in list order;
// within a grid left-to-right, then top-to-bottom.
struct PartitionPlan {
  std::vector<GridSpec> grids;

  bool operator==(const PartitionPlan&) const = default;
};

// (grid index, cell row, cell col) for one region in canonical order.
struct RegionInfo {
  int grid = 0;
  int row = 0;
  int col = 0;
  GridSpec spec;
};

// Total region count P = sum of rows*cols over all grids.
int partition_count(const PartitionPlan& plan);

// Canonical enumeration of all P regions.
std::vector<RegionInfo> enumerate_regions(const PartitionPlan& plan);

// Floor-boundary cell rectangle; cells of one grid tile the image exactly,
// remainder pixels accrue to the last row/column.
RegionRect region_bounds(int img_w, int img_h, const GridSpec& grid, int row, int col);

GrayImage crop(const GrayImage& img, const RegionRect& rect);

// Crop every region of the plan and resize each to 64x32, in canonical order.
std::vector<GrayImage> extract_regions(const GrayImage& img, const PartitionPlan& plan);

std::string grid_label(const GridSpec& grid);  // e.g. "4x2"

}  // namespace rdnet
