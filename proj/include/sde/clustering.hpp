#pragma once

#include <string>
#include <vector>

#include "sde/executor.hpp"

namespace sde {

struct Cluster {
  std::vector<int> members;  // ascending candidate ranks
  ExecutionSignature representative;

  int size() const { return static_cast<int>(members.size()); }
};

/// Semantic clusters of one task's candidates. Clusters are ordered by
/// descending size, then ascending smallest member rank.
struct ClusterPartition {
  std::string task_id;
  std::vector<Cluster> clusters;
  int dominant_index = 0;  // cluster holding rank 1
  int total = 0;           // K

  int count() const { return static_cast<int>(clusters.size()); }
  /// size / K
  double probability(int i) const;
  std::vector<double> probabilities() const;
  std::vector<int> sizes() const;
};

/// Groups candidates with identical execution signatures. Throws
/// LengthMismatch when signatures disagree on N and InvalidArgument when
/// the input is empty or rank 1 is missing.
ClusterPartition partition(const std::vector<ExecutionSignature>& signatures);

}  // namespace sde
