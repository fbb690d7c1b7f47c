#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "rdnet/image.hpp"

namespace rdnet::test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("rdnet_" + tag + "_" + std::to_string(++counter) + "_" +
             std::to_string(uintptr_t(this) & 0xffff));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline GrayImage make_gray(int w, int h, const std::function<int(int, int)>& fn) {
  GrayImage img{w, h, std::vector<uint8_t>(size_t(w) * h)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = uint8_t(fn(x, y) & 0xff);
  return img;
}

inline GrayImage constant_gray(int w, int h, uint8_t v) {
  return make_gray(w, h, [v](int, int) { return v; });
}

}  // namespace rdnet::test
