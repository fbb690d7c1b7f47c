#include "rdnet/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdnet/errors.hpp"

namespace rdnet {

namespace {

void check_dims(int w, int h, size_t data_size, size_t channels, const char* op) {
  if (w < 1 || h < 1)
    throw InvalidInputError(std::string(op) + ": image dimensions must be at least 1x1");
  if (data_size != channels * size_t(w) * size_t(h))
    throw InvalidInputError(std::string(op) + ": pixel buffer size does not match dimensions");
}

uint8_t clamp_u8(long v) { return uint8_t(std::clamp(v, 0l, 255l)); }

}  // namespace

GrayImage to_grayscale(const RgbImage& img) {
  check_dims(img.width, img.height, img.data.size(), 3, "to_grayscale");
  GrayImage out{img.width, img.height, std::vector<uint8_t>(size_t(img.width) * img.height)};
  const uint8_t* src = img.data.data();
  for (size_t i = 0; i < out.data.size(); ++i) {
    const double r = src[3 * i + 0];
    const double g = src[3 * i + 1];
    const double b = src[3 * i + 2];
    out.data[i] = clamp_u8(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
  }
  return out;
}

GrayImage resize(const GrayImage& img, int out_w, int out_h) {
  check_dims(img.width, img.height, img.data.size(), 1, "resize");
  if (out_w < 1 || out_h < 1)
    throw InvalidInputError("resize: target dimensions must be at least 1x1");
  if (out_w == img.width && out_h == img.height) return img;

  GrayImage out{out_w, out_h, std::vector<uint8_t>(size_t(out_w) * out_h)};
  const double sx = double(img.width) / out_w;
  const double sy = double(img.height) / out_h;
  auto clampx = [&](int x) { return std::clamp(x, 0, img.width - 1); };
  auto clampy = [&](int y) { return std::clamp(y, 0, img.height - 1); };

  for (int oy = 0; oy < out_h; ++oy) {
    const double fy = (oy + 0.5) * sy - 0.5;
    const int y0 = int(std::floor(fy));
    const double ty = fy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      const double fx = (ox + 0.5) * sx - 0.5;
      const int x0 = int(std::floor(fx));
      const double tx = fx - x0;
      const double p00 = img.at(clampx(x0), clampy(y0));
      const double p10 = img.at(clampx(x0 + 1), clampy(y0));
      const double p01 = img.at(clampx(x0), clampy(y0 + 1));
      const double p11 = img.at(clampx(x0 + 1), clampy(y0 + 1));
      const double top = p00 + (p10 - p00) * tx;
      const double bot = p01 + (p11 - p01) * tx;
      out.at(ox, oy) = clamp_u8(std::lround(top + (bot - top) * ty));
    }
  }
  return out;
}

InputVector flatten(const GrayImage& img) {
  check_dims(img.width, img.height, img.data.size(), 1, "flatten");
  if (img.width != kInputWidth || img.height != kInputHeight)
    throw InvalidInputError("flatten: image must be " + std::to_string(kInputWidth) + "x" +
                            std::to_string(kInputHeight) + ", got " + std::to_string(img.width) +
                            "x" + std::to_string(img.height));
  InputVector v(kInputDim);
  for (int i = 0; i < kInputDim; ++i) v[i] = float(img.data[i]) / 255.0f;
  return v;
}

}  // namespace rdnet
