#pragma once

#include <cstdint>
#include <vector>

namespace rdnet {

// Classifier input resolution. Every image region is brought to this size
// before flattening.
constexpr int kInputWidth = 64;
constexpr int kInputHeight = 32;
constexpr int kInputDim = kInputWidth * kInputHeight;

// Interleaved 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // size = 3 * width * height

  const uint8_t* pixel(int x, int y) const {
    return data.data() + 3 * (size_t(y) * width + x);
  }
};

// Row-major 8-bit luminance raster; the pixel currency of the pipeline.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // size = width * height

  uint8_t at(int x, int y) const { return data[size_t(y) * width + x]; }
  uint8_t& at(int x, int y) { return data[size_t(y) * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

// Flattened 64x32 region scaled to [0,1]; length kInputDim.
using InputVector = std::vector<float>;

// BT.601 integer luma: round(0.299 R + 0.587 G + 0.114 B).
GrayImage to_grayscale(const RgbImage& img);

// Bilinear resize with half-pixel-center sampling.
GrayImage resize(const GrayImage& img, int out_w, int out_h);

// Row-major flatten of a 64x32 image, each byte divided by 255.
InputVector flatten(const GrayImage& img);

}  // namespace rdnet
