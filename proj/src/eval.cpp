#include "rdnet/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rdnet/errors.hpp"
#include "rdnet/threads.hpp"

namespace rdnet {

namespace {

using json = nlohmann::ordered_json;

void write_text_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw InvalidInputError("write failure on '" + path + "'");
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const size_t i = size_t(std::lround(q * double(sorted.size() - 1)));
  return sorted[std::min(i, sorted.size() - 1)];
}

}  // namespace

bool check_match(int retrieved, int query, const GroundTruth& gt) {
  if (query < 0 || query >= int(gt.mapping.size()))
    throw InvalidInputError("query index " + std::to_string(query) + " not in ground truth");
  return std::abs(retrieved - gt.mapping[size_t(query)]) <= gt.tolerance;
}

std::vector<PrPoint> pr_curve(const std::vector<MatchRecord>& records) {
  if (records.empty()) throw InvalidInputError("cannot build a PR curve from zero records");

  std::vector<std::pair<double, bool>> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.emplace_back(r.confidence, r.correct);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<PrPoint> points;
  const double total = double(records.size());
  int retrieved = 0, correct = 0;
  size_t i = 0;
  while (i < sorted.size()) {
    const double threshold = sorted[i].first;
    // consume the whole tie group at this confidence
    while (i < sorted.size() && sorted[i].first == threshold) {
      ++retrieved;
      if (sorted[i].second) ++correct;
      ++i;
    }
    points.push_back({threshold, double(correct) / total, double(correct) / double(retrieved)});
  }
  return points;
}

double auc(const std::vector<PrPoint>& points) {
  if (points.empty()) throw InvalidInputError("no PR points");
  std::vector<PrPoint> sorted(points);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
  const double r_min = sorted.front().recall;
  const double r_max = sorted.back().recall;
  if (r_max == r_min) {
    // single attained recall: precision x recall rectangle, using the point
    // with the most inclusive retrieval set
    return sorted.back().precision * r_max;
  }
  double area = 0.0;
  for (size_t i = 1; i < sorted.size(); ++i)
    area += (sorted[i].recall - sorted[i - 1].recall) *
            (sorted[i].precision + sorted[i - 1].precision) * 0.5;
  return area / (r_max - r_min);
}

std::tuple<double, double, double> extended_precision(const std::vector<PrPoint>& points) {
  if (points.empty()) throw InvalidInputError("no PR points");
  std::vector<PrPoint> sorted(points);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
  const double p_r0 = sorted.front().precision;
  double r_p100 = 0.0;
  for (const auto& pt : sorted)
    if (pt.precision == 1.0) r_p100 = std::max(r_p100, pt.recall);
  const double ep = (p_r0 + r_p100) / 2.0;
  return {ep, p_r0, r_p100};
}

Metrics compute_metrics(const std::vector<MatchRecord>& records) {
  Metrics m;
  m.pr = pr_curve(records);
  m.auc = auc(m.pr);
  std::tie(m.ep, m.p_r0, m.r_p100) = extended_precision(m.pr);
  return m;
}

Retrieval match_query(const Ensemble& ensemble, const GrayImage& query,
                      std::optional<int> k_votes) {
  const int k = k_votes.value_or(ensemble.config().k_votes);
  return vote(ensemble.infer(query), k);
}

std::vector<MatchRecord> run_queries(const Ensemble& ensemble,
                                     const std::vector<GrayImage>& queries, const GroundTruth& gt,
                                     std::optional<int> k_votes) {
  if (queries.empty()) throw InvalidInputError("no query images");
  if (gt.mapping.size() != queries.size())
    throw InvalidInputError("ground truth covers " + std::to_string(gt.mapping.size()) +
                            " queries, got " + std::to_string(queries.size()));
  std::vector<MatchRecord> records(queries.size());
#pragma omp parallel for schedule(dynamic)
  for (int q = 0; q < int(queries.size()); ++q) {
    const Retrieval r = match_query(ensemble, queries[size_t(q)], k_votes);
    records[size_t(q)] = {q, r.place, r.confidence, check_match(r.place, q, gt)};
  }
  return records;
}

namespace {

// One inference pass per query; full-system records always, per-region
// records when region_records is non-null.
std::vector<MatchRecord> run_all_records(const Ensemble& ensemble,
                                         const std::vector<GrayImage>& queries,
                                         const GroundTruth& gt,
                                         std::vector<std::vector<MatchRecord>>* region_records) {
  if (queries.empty()) throw InvalidInputError("no query images");
  if (gt.mapping.size() != queries.size())
    throw InvalidInputError("ground truth covers " + std::to_string(gt.mapping.size()) +
                            " queries, got " + std::to_string(queries.size()));

  const int p_total = ensemble.regions();
  const int z = ensemble.group_size();
  const int k = ensemble.config().k_votes;
  const int nq = int(queries.size());

  std::vector<MatchRecord> records(size_t(nq), MatchRecord{});
  if (region_records)
    region_records->assign(size_t(p_total), std::vector<MatchRecord>(size_t(nq)));
#pragma omp parallel for schedule(dynamic)
  for (int q = 0; q < nq; ++q) {
    const auto scores = ensemble.infer(queries[size_t(q)]);
    const Retrieval full = vote(scores, k);
    records[size_t(q)] = {q, full.place, full.confidence, check_match(full.place, q, gt)};
    if (!region_records) continue;
    for (int p = 0; p < p_total; ++p) {
      std::vector<ScoreVector> group(scores.begin() + size_t(p) * z,
                                     scores.begin() + size_t(p + 1) * z);
      const Retrieval r = vote(group, k);
      (*region_records)[size_t(p)][size_t(q)] = {q, r.place, r.confidence,
                                                 check_match(r.place, q, gt)};
    }
  }
  return records;
}

}  // namespace

std::vector<Metrics> per_region_metrics(const Ensemble& ensemble,
                                        const std::vector<GrayImage>& queries,
                                        const GroundTruth& gt) {
  std::vector<std::vector<MatchRecord>> region_records;
  run_all_records(ensemble, queries, gt, &region_records);
  std::vector<Metrics> out;
  out.reserve(region_records.size());
  for (const auto& recs : region_records) out.push_back(compute_metrics(recs));
  return out;
}

EvalBundle evaluate(const Ensemble& ensemble, const std::vector<GrayImage>& queries,
                    const GroundTruth& gt) {
  EvalBundle bundle;
  std::vector<std::vector<MatchRecord>> region_records;
  bundle.records = run_all_records(ensemble, queries, gt, &region_records);
  bundle.metrics = compute_metrics(bundle.records);
  bundle.per_region.reserve(region_records.size());
  for (const auto& recs : region_records) bundle.per_region.push_back(compute_metrics(recs));
  return bundle;
}

TimingStats time_inference(const Ensemble& ensemble, const std::vector<GrayImage>& queries,
                           std::optional<int> k_votes) {
  if (queries.empty()) throw InvalidInputError("no queries to time");
  SingleThreadScope single;

  std::vector<double> ms;
  ms.reserve(queries.size());
  for (const auto& q : queries) {
    const auto t0 = std::chrono::steady_clock::now();
    volatile int sink = match_query(ensemble, q, k_votes).place;
    (void)sink;
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::vector<double> sorted(ms);
  std::sort(sorted.begin(), sorted.end());
  TimingStats stats;
  stats.samples = int(ms.size());
  double sum = 0.0;
  for (double v : ms) sum += v;
  stats.mean_ms = sum / double(ms.size());
  stats.median_ms = quantile_sorted(sorted, 0.5);
  stats.p99_ms = quantile_sorted(sorted, 0.99);
  return stats;
}

void write_matches_json(const std::string& path, const std::vector<MatchRecord>& records) {
  json arr = json::array();
  for (const auto& r : records)
    arr.push_back({{"query", r.query},
                   {"retrieved", r.retrieved},
                   {"confidence", r.confidence},
                   {"correct", r.correct}});
  write_text_file(path, json{{"records", arr}}.dump(2) + "\n");
}

void write_metrics_json(const std::string& path, const Metrics& metrics, int n_queries) {
  const json j{{"auc", metrics.auc},
               {"ep", metrics.ep},
               {"p_r0", metrics.p_r0},
               {"r_p100", metrics.r_p100},
               {"n_queries", n_queries}};
  write_text_file(path, j.dump(2) + "\n");
}

void write_pr_csv(const std::string& path, const std::vector<PrPoint>& points) {
  std::string text = "threshold,recall,precision\n";
  char line[128];
  for (const auto& p : points) {
    std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g\n", p.threshold, p.recall, p.precision);
    text += line;
  }
  write_text_file(path, text);
}

void write_per_region_csv(const std::string& path, const PartitionPlan& plan,
                          const std::vector<Metrics>& per_region) {
  const auto regions = enumerate_regions(plan);
  if (regions.size() != per_region.size())
    throw InvalidInputError("per-region metrics count does not match plan");
  std::string text = "region,grid,auc,ep\n";
  char line[128];
  for (size_t p = 0; p < regions.size(); ++p) {
    std::snprintf(line, sizeof line, "%zu,%s,%.9g,%.9g\n", p,
                  grid_label(regions[p].spec).c_str(), per_region[p].auc, per_region[p].ep);
    text += line;
  }
  write_text_file(path, text);
}

}  // namespace rdnet
