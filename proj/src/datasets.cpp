#include "rdnet/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "rdnet/errors.hpp"
#include "rdnet/partition.hpp"
#include "rdnet/rng.hpp"

namespace fs = std::filesystem;

namespace rdnet {

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// Last run of digits in the stem, e.g. "frame-0042" -> 42.
std::optional<uint64_t> stem_number(const std::string& stem) {
  int end = -1;
  for (int i = int(stem.size()) - 1; i >= 0; --i) {
    if (std::isdigit(static_cast<unsigned char>(stem[i]))) {
      end = i + 1;
      break;
    }
  }
  if (end < 0) return std::nullopt;
  int begin = end - 1;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  uint64_t value = 0;
  const auto res = std::from_chars(stem.data() + begin, stem.data() + end, value);
  if (res.ec != std::errc()) return ~uint64_t(0);  // absurdly long digit run
  return value;
}

uint8_t clamp_u8(long v) { return uint8_t(std::clamp(v, 0l, 255l)); }

void fill_rect(GrayImage& img, int x0, int y0, int x1, int y1, uint8_t value) {
  x0 = std::clamp(x0, 0, img.width);
  x1 = std::clamp(x1, 0, img.width);
  y0 = std::clamp(y0, 0, img.height);
  y1 = std::clamp(y1, 0, img.height);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) img.at(x, y) = value;
}

// High-contrast geometric scene; every cell of a 4x4 slicing receives its
// own random detail so that region specialization has something to latch on
// to in any grid arrangement.
GrayImage render_scene(int w, int h, uint64_t seed) {
  Rng rng(seed);
  GrayImage img{w, h, std::vector<uint8_t>(size_t(w) * h)};

  const double base = rng.uniform(50.0, 110.0);
  const double gx = rng.uniform(-50.0, 50.0);
  const double gy = rng.uniform(-50.0, 50.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = base + gx * (double(x) / w) + gy * (double(y) / h);
      img.at(x, y) = clamp_u8(std::lround(std::clamp(v, 15.0, 225.0)));
    }

  const int n_rects = 8 + int(rng.below(8));
  for (int r = 0; r < n_rects; ++r) {
    const int rw = std::max(2, int(rng.below(uint32_t(std::max(2, w / 4)))));
    const int rh = std::max(2, int(rng.below(uint32_t(std::max(2, h / 4)))));
    const int x0 = int(rng.below(uint32_t(w)));
    const int y0 = int(rng.below(uint32_t(h)));
    const auto value = uint8_t(15 + rng.below(211));
    fill_rect(img, x0, y0, x0 + rw, y0 + rh, value);
  }

  const GridSpec fine{4, 4};
  for (int cr = 0; cr < fine.rows; ++cr)
    for (int cc = 0; cc < fine.cols; ++cc) {
      const RegionRect cell = region_bounds(w, h, fine, cr, cc);
      for (int m = 0; m < 2; ++m) {
        const int mw = std::max(2, cell.width() / (2 + int(rng.below(3))));
        const int mh = std::max(2, cell.height() / (2 + int(rng.below(3))));
        const int x0 = cell.x0 + int(rng.below(uint32_t(std::max(1, cell.width() - mw + 1))));
        const int y0 = cell.y0 + int(rng.below(uint32_t(std::max(1, cell.height() - mh + 1))));
        const auto value = uint8_t(15 + rng.below(211));
        fill_rect(img, x0, y0, x0 + mw, y0 + mh, value);
      }
    }

  const int n_checkers = 2 + int(rng.below(3));
  for (int p = 0; p < n_checkers; ++p) {
    const int cell = 2 + int(rng.below(4));
    const int pw = cell * (3 + int(rng.below(5)));
    const int ph = cell * (2 + int(rng.below(4)));
    const int x0 = int(rng.below(uint32_t(std::max(1, w - pw))));
    const int y0 = int(rng.below(uint32_t(std::max(1, h - ph))));
    const auto v1 = uint8_t(15 + rng.below(90));
    const auto v2 = uint8_t(135 + rng.below(91));
    for (int y = y0; y < std::min(h, y0 + ph); ++y)
      for (int x = x0; x < std::min(w, x0 + pw); ++x)
        img.at(x, y) = (((x - x0) / cell + (y - y0) / cell) % 2 == 0) ? v1 : v2;
  }
  return img;
}

GrayImage perturb(const GrayImage& ref, const Perturbation& p, uint64_t noise_seed) {
  GrayImage out = ref;
  if (p.brightness_delta != 0)
    for (auto& v : out.data) v = clamp_u8(long(v) + p.brightness_delta);
  if (p.shift != 0) {
    GrayImage shifted = out;
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        shifted.at(x, y) = out.at(std::clamp(x - p.shift, 0, out.width - 1), y);
    out = std::move(shifted);
  }
  if (p.noise_sigma > 0.0) {
    // The unit-normal field depends only on the seed, so raising sigma scales
    // the same displacements rather than redrawing them.
    Rng rng(noise_seed);
    for (auto& v : out.data)
      v = clamp_u8(long(v) + std::lround(p.noise_sigma * rng.normal()));
  }
  return out;
}

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d.png", index);
  return buf;
}

}  // namespace

GrayImage decode_image_file(const std::string& path) {
  const cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw FormatError("cannot decode image file '" + path + "'");
  RgbImage rgb{bgr.cols, bgr.rows, std::vector<uint8_t>(size_t(bgr.cols) * bgr.rows * 3)};
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      const size_t i = 3 * (size_t(y) * bgr.cols + x);
      rgb.data[i + 0] = row[x][2];
      rgb.data[i + 1] = row[x][1];
      rgb.data[i + 2] = row[x][0];
    }
  }
  return to_grayscale(rgb);
}

void encode_png(const GrayImage& img, const std::string& path) {
  const cv::Mat mat(img.height, img.width, CV_8UC1, const_cast<uint8_t*>(img.data.data()));
  if (!cv::imwrite(path, mat)) throw InvalidInputError("cannot write image file '" + path + "'");
}

Traversal load_traversal(const std::string& dir) {
  if (!fs::is_directory(dir)) throw InvalidInputError("'" + dir + "' is not a directory");

  struct Entry {
    bool numbered;
    uint64_t number;
    std::string name;
    fs::path path;
  };
  std::vector<Entry> entries;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (!de.is_regular_file() || !has_image_extension(de.path())) continue;
    const auto num = stem_number(de.path().stem().string());
    entries.push_back({num.has_value(), num.value_or(0), de.path().filename().string(), de.path()});
  }
  if (entries.empty())
    throw InvalidInputError("directory '" + dir + "' contains no PNG/JPEG images");

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.numbered != b.numbered) return a.numbered;  // numbered frames first
    if (a.numbered && a.number != b.number) return a.number < b.number;
    return a.name < b.name;
  });

  Traversal t;
  t.images.reserve(entries.size());
  t.names.reserve(entries.size());
  for (const auto& e : entries) {
    t.images.push_back(decode_image_file(e.path.string()));
    t.names.push_back(e.name);
  }
  return t;
}

GroundTruth load_ground_truth(const DatasetSpec& spec, int n_query, int n_ref) {
  if (spec.tolerance < 0) throw InvalidInputError("tolerance must be >= 0");
  if (n_query < 1) throw InvalidInputError("need at least one query");

  GroundTruth gt;
  gt.tolerance = spec.tolerance;

  if (spec.gt_file.empty()) {
    if (n_query > n_ref)
      throw InvalidInputError("identity ground truth needs n_query <= n_ref, got " +
                              std::to_string(n_query) + " > " + std::to_string(n_ref));
    gt.mapping.resize(size_t(n_query));
    for (int i = 0; i < n_query; ++i) gt.mapping[size_t(i)] = i;
    return gt;
  }

  std::ifstream in(spec.gt_file);
  if (!in) throw InvalidInputError("cannot open ground truth file '" + spec.gt_file + "'");
  gt.mapping.assign(size_t(n_query), -1);

  std::string line;
  int line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    trimmed.erase(std::remove(trimmed.begin(), trimmed.end(), ' '), trimmed.end());
    if (trimmed.empty()) continue;
    if (first_data_line && !std::isdigit(static_cast<unsigned char>(trimmed.front()))) {
      first_data_line = false;  // header row
      continue;
    }
    first_data_line = false;

    const auto at_line = [&] { return spec.gt_file + " line " + std::to_string(line_no); };
    const size_t comma = trimmed.find(',');
    if (comma == std::string::npos)
      throw FormatError(at_line() + ": expected 'query_idx,ref_idx'");
    long q = 0, r = 0;
    const auto rq =
        std::from_chars(trimmed.data(), trimmed.data() + comma, q);
    const auto rr =
        std::from_chars(trimmed.data() + comma + 1, trimmed.data() + trimmed.size(), r);
    if (rq.ec != std::errc() || rq.ptr != trimmed.data() + comma || rr.ec != std::errc() ||
        rr.ptr != trimmed.data() + trimmed.size())
      throw FormatError(at_line() + ": expected 'query_idx,ref_idx'");
    if (q < 0 || q >= n_query)
      throw InvalidInputError(at_line() + ": query index " + std::to_string(q) +
                              " out of range [0," + std::to_string(n_query) + ")");
    if (r < 0 || r >= n_ref)
      throw InvalidInputError(at_line() + ": reference index " + std::to_string(r) +
                              " out of range [0," + std::to_string(n_ref) + ")");
    if (gt.mapping[size_t(q)] != -1)
      throw FormatError(at_line() + ": duplicate entry for query " + std::to_string(q));
    gt.mapping[size_t(q)] = int(r);
  }
  for (int qi = 0; qi < n_query; ++qi)
    if (gt.mapping[size_t(qi)] == -1)
      throw InvalidInputError("ground truth file does not cover query " + std::to_string(qi));
  return gt;
}

SynthDataset generate_synthetic(const SynthSpec& spec) {
  if (spec.n_places < 2) throw InvalidInputError("synthetic dataset needs n_places >= 2");
  if (spec.width < 16 || spec.height < 16)
    throw InvalidInputError("synthetic images must be at least 16x16");
  if (spec.perturbation.brightness_delta < 0 || spec.perturbation.shift < 0 ||
      spec.perturbation.noise_sigma < 0)
    throw InvalidInputError("perturbation magnitudes must be >= 0");

  SynthDataset ds;
  ds.reference.images.resize(size_t(spec.n_places));
  ds.reference.names.resize(size_t(spec.n_places));
  ds.query.images.resize(size_t(spec.n_places));
  ds.query.names.resize(size_t(spec.n_places));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < spec.n_places; ++i) {
    GrayImage ref = render_scene(spec.width, spec.height, derive_seed(spec.seed, 0, uint32_t(i)));
    ds.query.images[size_t(i)] =
        perturb(ref, spec.perturbation, derive_seed(spec.seed, 1, uint32_t(i)));
    ds.reference.images[size_t(i)] = std::move(ref);
    ds.reference.names[size_t(i)] = frame_name(i);
    ds.query.names[size_t(i)] = frame_name(i);
  }
  ds.gt.tolerance = 0;
  ds.gt.mapping.resize(size_t(spec.n_places));
  for (int i = 0; i < spec.n_places; ++i) ds.gt.mapping[size_t(i)] = i;
  return ds;
}

void write_dataset(const SynthDataset& ds, const std::string& out_dir) {
  const fs::path root(out_dir);
  std::error_code ec;
  fs::create_directories(root / "reference", ec);
  fs::create_directories(root / "query", ec);
  if (!fs::is_directory(root / "reference") || !fs::is_directory(root / "query"))
    throw InvalidInputError("cannot create output directory '" + out_dir + "'");

  for (size_t i = 0; i < ds.reference.images.size(); ++i)
    encode_png(ds.reference.images[i], (root / "reference" / ds.reference.names[i]).string());
  for (size_t i = 0; i < ds.query.images.size(); ++i)
    encode_png(ds.query.images[i], (root / "query" / ds.query.names[i]).string());

  std::ofstream gt((root / "gt.csv").string());
  if (!gt) throw InvalidInputError("cannot write gt.csv under '" + out_dir + "'");
  gt << "query_idx,ref_idx\n";
  for (size_t q = 0; q < ds.gt.mapping.size(); ++q) gt << q << "," << ds.gt.mapping[q] << "\n";
}

}  // namespace rdnet
