#include "rdnet/voting.hpp"

#include <algorithm>
#include <string>

#include "rdnet/errors.hpp"

namespace rdnet {

std::vector<float> top_k_mask(const ScoreVector& s, int k) {
  if (k < 1) throw InvalidInputError("K must be >= 1");
  const int n = int(s.size());
  if (n == 0) throw InvalidInputError("empty score vector");
  if (k >= n) return s;

  std::vector<float> scratch(s);
  std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end(),
                   std::greater<float>());
  const float kth = scratch[k - 1];
  std::vector<float> masked(size_t(n), 0.f);
  for (int i = 0; i < n; ++i)
    if (s[i] >= kth) masked[i] = s[i];
  return masked;
}

std::vector<double> aggregate(const std::vector<std::vector<float>>& masked) {
  if (masked.empty()) throw InvalidInputError("no vectors to aggregate");
  const size_t n = masked[0].size();
  std::vector<double> votes(n, 0.0);
  for (const auto& v : masked) {
    if (v.size() != n)
      throw InvalidInputError("masked vector length mismatch: " + std::to_string(v.size()) +
                              " vs " + std::to_string(n));
    for (size_t i = 0; i < n; ++i) votes[i] += double(v[i]);
  }
  return votes;
}

Retrieval retrieve(const std::vector<double>& votes, int t_total) {
  if (votes.empty()) throw InvalidInputError("empty vote vector");
  if (t_total < 1) throw InvalidInputError("T must be >= 1");
  const auto it = std::max_element(votes.begin(), votes.end());
  const int m = int(it - votes.begin());
  return Retrieval{m, votes[size_t(m)] / double(t_total)};
}

Retrieval vote(const std::vector<ScoreVector>& scores, int k) {
  std::vector<std::vector<float>> masked;
  masked.reserve(scores.size());
  for (const auto& s : scores) masked.push_back(top_k_mask(s, k));
  return retrieve(aggregate(masked), int(scores.size()));
}

}  // namespace rdnet
