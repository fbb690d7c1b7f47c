#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "rdnet/ensemble.hpp"
#include "rdnet/voting.hpp"

namespace rdnet {

// Query index -> reference index, with a frame tolerance window.
struct GroundTruth {
  std::vector<int> mapping;  // one entry per query
  int tolerance = 0;
};

struct MatchRecord {
  int query = 0;
  int retrieved = 0;
  double confidence = 0.0;
  bool correct = false;
};

struct PrPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct Metrics {
  std::vector<PrPoint> pr;
  double auc = 0.0;
  double ep = 0.0;
  double p_r0 = 0.0;    // precision at minimal attained recall
  double r_p100 = 0.0;  // largest recall with precision == 1, else 0
};

struct TimingStats {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p99_ms = 0.0;
  int samples = 0;

  double fps() const { return 1000.0 / mean_ms; }
};

// True iff |retrieved - mapping[query]| <= tolerance.
bool check_match(int retrieved, int query, const GroundTruth& gt);

// One (recall, precision) point per distinct confidence value, swept in
// descending threshold order. Recall divides by the total record count.
std::vector<PrPoint> pr_curve(const std::vector<MatchRecord>& records);

// Trapezoidal area over the attained recall range, normalized by that range;
// a curve with a single attained recall degenerates to precision * recall.
double auc(const std::vector<PrPoint>& points);

// Returns (ep, p_r0, r_p100) with ep = (p_r0 + r_p100) / 2.
std::tuple<double, double, double> extended_precision(const std::vector<PrPoint>& points);

Metrics compute_metrics(const std::vector<MatchRecord>& records);

// Full pipeline for one query image: partition, classify, vote.
// k_votes overrides the model's configured K when given (K is purely an
// inference-time parameter).
Retrieval match_query(const Ensemble& ensemble, const GrayImage& query,
                      std::optional<int> k_votes = std::nullopt);

// Match every query and score it against the ground truth.
std::vector<MatchRecord> run_queries(const Ensemble& ensemble,
                                     const std::vector<GrayImage>& queries, const GroundTruth& gt,
                                     std::optional<int> k_votes = std::nullopt);

// Metrics per region, each computed from that group's Z score vectors alone,
// in canonical region order.
std::vector<Metrics> per_region_metrics(const Ensemble& ensemble,
                                        const std::vector<GrayImage>& queries,
                                        const GroundTruth& gt);

// Full-system records/metrics and per-region metrics from one inference pass.
struct EvalBundle {
  std::vector<MatchRecord> records;
  Metrics metrics;
  std::vector<Metrics> per_region;
};
EvalBundle evaluate(const Ensemble& ensemble, const std::vector<GrayImage>& queries,
                    const GroundTruth& gt);

// Wall-clock per query from decoded image to retrieval, single-threaded.
TimingStats time_inference(const Ensemble& ensemble, const std::vector<GrayImage>& queries,
                           std::optional<int> k_votes = std::nullopt);

// Result artifacts.
void write_matches_json(const std::string& path, const std::vector<MatchRecord>& records);
void write_metrics_json(const std::string& path, const Metrics& metrics, int n_queries);
void write_pr_csv(const std::string& path, const std::vector<PrPoint>& points);
void write_per_region_csv(const std::string& path, const PartitionPlan& plan,
                          const std::vector<Metrics>& per_region);

}  // namespace rdnet
