#include "rdnet/ensemble.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <limits>

#include "rdnet/errors.hpp"
#include "rdnet/rng.hpp"

namespace rdnet {

namespace {

constexpr char kMagic[4] = {'R', 'D', 'N', '1'};
constexpr uint16_t kFormatVersion = 1;

// Streaming binary writer with a running CRC32 over everything written.
class CrcWriter {
 public:
  explicit CrcWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw InvalidInputError("cannot open '" + path + "' for writing");
  }

  void bytes(const void* p, size_t len) {
    out_.write(static_cast<const char*>(p), std::streamsize(len));
    crc_ = crc32(crc_, static_cast<const Bytef*>(p), uInt(len));
  }
  void u16(uint16_t v) { bytes(&v, sizeof v); }
  void u32(uint32_t v) { bytes(&v, sizeof v); }
  void u64(uint64_t v) { bytes(&v, sizeof v); }
  void f32(float v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }

  void finish() {
    const uint32_t crc = uint32_t(crc_);
    out_.write(reinterpret_cast<const char*>(&crc), sizeof crc);
    out_.flush();
    if (!out_) throw InvalidInputError("write failure while saving model");
  }

 private:
  std::ofstream out_;
  uLong crc_ = crc32(0L, Z_NULL, 0);
};

// Bounds-checked cursor over the loaded file contents.
class Reader {
 public:
  Reader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

  void bytes(void* p, size_t len) {
    if (pos_ + len > size_) throw FormatError("model file truncated");
    std::memcpy(p, data_ + pos_, len);
    pos_ += len;
  }
  uint16_t u16() { uint16_t v; bytes(&v, sizeof v); return v; }
  uint32_t u32() { uint32_t v; bytes(&v, sizeof v); return v; }
  uint64_t u64() { uint64_t v; bytes(&v, sizeof v); return v; }
  float f32() { float v; bytes(&v, sizeof v); return v; }
  double f64() { double v; bytes(&v, sizeof v); return v; }

 private:
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

}  // namespace

uint64_t drosonet_seed(uint64_t master_seed, int group, int member) {
  return derive_seed(master_seed, uint32_t(group), uint32_t(member));
}

void EnsembleConfig::validate() const {
  partition_count(plan);
  if (z_per_region < 1) throw InvalidInputError("Z must be >= 1");
  if (k_votes < 1) throw InvalidInputError("K must be >= 1");
  DrosoNetConfig probe = drosonet;
  probe.n_places = std::max(probe.n_places, 1);
  probe.validate();
}

Ensemble Ensemble::build(const EnsembleConfig& cfg, int n_places) {
  cfg.validate();
  if (n_places < 1) throw InvalidInputError("n_places must be >= 1");

  Ensemble e;
  e.cfg_ = cfg;
  e.cfg_.drosonet.n_places = n_places;
  e.p_ = partition_count(cfg.plan);
  e.z_ = cfg.z_per_region;
  e.n_places_ = n_places;
  e.nets_.reserve(size_t(e.p_) * e.z_);
  for (int p = 0; p < e.p_; ++p)
    for (int z = 0; z < e.z_; ++z) {
      DrosoNetConfig nc = e.cfg_.drosonet;
      nc.seed = drosonet_seed(cfg.master_seed, p, z);
      e.nets_.emplace_back(nc);
    }
  return e;
}

const DrosoNet& Ensemble::net(int group, int member) const {
  return nets_[size_t(group) * z_ + member];
}

DrosoNet& Ensemble::net(int group, int member) { return nets_[size_t(group) * z_ + member]; }

std::vector<std::vector<InputVector>> make_training_subsets(
    const std::vector<GrayImage>& reference_images, const PartitionPlan& plan) {
  if (reference_images.empty()) throw InvalidInputError("no reference images");
  const int p = partition_count(plan);
  const int n = int(reference_images.size());
  std::vector<std::vector<InputVector>> subsets(size_t(p), std::vector<InputVector>{});
  for (auto& s : subsets) s.resize(size_t(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const auto regions = extract_regions(reference_images[size_t(i)], plan);
    for (int r = 0; r < p; ++r) subsets[size_t(r)][size_t(i)] = flatten(regions[size_t(r)]);
  }
  return subsets;
}

std::vector<TrainStats> Ensemble::train_all(const std::vector<GrayImage>& reference) {
  if (int(reference.size()) != n_places_)
    throw InvalidInputError("reference traversal has " + std::to_string(reference.size()) +
                            " images, ensemble expects " + std::to_string(n_places_));
  const auto subsets = make_training_subsets(reference, cfg_.plan);
  const int t_total = size();
  std::vector<TrainStats> stats(size_t(t_total), TrainStats{});
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < t_total; ++t) stats[size_t(t)] = nets_[size_t(t)].train(subsets[size_t(t / z_)]);
  trained_ = true;
  return stats;
}

std::vector<ScoreVector> Ensemble::infer(const GrayImage& query) const {
  if (!trained_) throw StateError("ensemble is not trained");
  const auto regions = extract_regions(query, cfg_.plan);
  std::vector<InputVector> inputs(regions.size());
  for (size_t r = 0; r < regions.size(); ++r) inputs[r] = flatten(regions[r]);

  std::vector<ScoreVector> out(size_t(size()), ScoreVector{});
  for (int t = 0; t < size(); ++t) out[size_t(t)] = nets_[size_t(t)].scores(inputs[size_t(t / z_)]);
  return out;
}

void Ensemble::save(const std::string& path) const {
  if (!trained_) throw StateError("refusing to save an untrained ensemble");

  CrcWriter w(path);
  w.bytes(kMagic, 4);
  w.u16(kFormatVersion);
  w.u32(uint32_t(n_places_));
  w.u32(uint32_t(cfg_.drosonet.d_in));
  w.u32(uint32_t(cfg_.drosonet.d_hidden));
  w.u32(uint32_t(cfg_.k_votes));
  w.u32(uint32_t(cfg_.z_per_region));
  w.u32(uint32_t(cfg_.plan.grids.size()));
  for (const auto& g : cfg_.plan.grids) {
    w.u32(uint32_t(g.rows));
    w.u32(uint32_t(g.cols));
  }
  w.u64(cfg_.master_seed);
  w.u32(uint32_t(cfg_.drosonet.epochs));
  w.f64(double(cfg_.drosonet.learning_rate));

  for (const auto& net : nets_) {
    for (uint64_t word : net.h_bits()) w.u64(word);
    for (float v : net.weights()) w.f32(v);
    for (float v : net.bias()) w.f32(v);
  }
  w.finish();
}

Ensemble Ensemble::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open model file '" + path + "'");
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 + sizeof(uint16_t) + sizeof(uint32_t))
    throw FormatError("model file truncated");

  const size_t payload = buf.size() - sizeof(uint32_t);
  uint32_t stored_crc;
  std::memcpy(&stored_crc, buf.data() + payload, sizeof stored_crc);
  const uint32_t actual_crc = uint32_t(crc32(crc32(0L, Z_NULL, 0), buf.data(), uInt(payload)));
  if (stored_crc != actual_crc) throw FormatError("model file checksum mismatch");

  Reader r(buf.data(), payload);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a model file (bad magic)");
  const uint16_t version = r.u16();
  if (version != kFormatVersion)
    throw FormatError("unsupported model format version " + std::to_string(version));

  EnsembleConfig cfg;
  const uint32_t n_places = r.u32();
  cfg.drosonet.d_in = int(r.u32());
  cfg.drosonet.d_hidden = int(r.u32());
  cfg.k_votes = int(r.u32());
  cfg.z_per_region = int(r.u32());
  const uint32_t n_grids = r.u32();
  if (n_grids == 0 || n_grids > 4096) throw FormatError("implausible grid count");
  cfg.plan.grids.resize(n_grids);
  for (auto& g : cfg.plan.grids) {
    g.rows = int(r.u32());
    g.cols = int(r.u32());
  }
  cfg.master_seed = r.u64();
  cfg.drosonet.epochs = int(r.u32());
  cfg.drosonet.learning_rate = float(r.f64());
  cfg.drosonet.n_places = int(n_places);

  try {
    cfg.validate();
    if (n_places < 1 || n_places > (1u << 24)) throw InvalidInputError("implausible n_places");

    Ensemble e;
    e.cfg_ = cfg;
    e.p_ = partition_count(cfg.plan);
    e.z_ = cfg.z_per_region;
    e.n_places_ = int(n_places);

    const int wpc = (cfg.drosonet.d_in + 63) / 64;
    const size_t h_words = size_t(wpc) * cfg.drosonet.d_hidden;
    const size_t w_count = size_t(cfg.drosonet.d_hidden) * n_places;
    const int t_total = e.p_ * e.z_;
    e.nets_.reserve(size_t(t_total));
    for (int t = 0; t < t_total; ++t) {
      DrosoNetConfig nc = cfg.drosonet;
      nc.seed = drosonet_seed(cfg.master_seed, t / e.z_, t % e.z_);
      std::vector<uint64_t> h(h_words);
      r.bytes(h.data(), h_words * sizeof(uint64_t));
      std::vector<float> wgt(w_count);
      r.bytes(wgt.data(), w_count * sizeof(float));
      std::vector<float> bias(size_t(n_places), 0.f);
      r.bytes(bias.data(), n_places * sizeof(float));
      e.nets_.emplace_back(nc, std::move(h), std::move(wgt), std::move(bias));
    }
    e.trained_ = true;
    return e;
  } catch (const InvalidInputError& ex) {
    throw FormatError(std::string("model file is inconsistent: ") + ex.what());
  }
}

}  // namespace rdnet
