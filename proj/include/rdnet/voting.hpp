#pragma once

#include <vector>

#include "rdnet/drosonet.hpp"

namespace rdnet {

// Final place decision for one query.
struct Retrieval {
  int place = 0;            // most voted index
  double confidence = 0.0;  // vote mass of the winner divided by T
};

// Keep every score greater than or equal to the K-th largest, zero the rest.
// Values tying the K-th largest are all kept, so more than K entries may
// survive; with K >= N the vector is returned unchanged.
std::vector<float> top_k_mask(const ScoreVector& s, int k);

// Element-wise sum of the masked vectors; accumulates in double.
std::vector<double> aggregate(const std::vector<std::vector<float>>& masked);

// Argmax of the vote vector (ties to the lowest index); confidence is the
// winning vote mass divided by the number of contributing vectors.
Retrieval retrieve(const std::vector<double>& votes, int t_total);

// mask + aggregate + retrieve over all T score vectors.
Retrieval vote(const std::vector<ScoreVector>& scores, int k);

}  // namespace rdnet
