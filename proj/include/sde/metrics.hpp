#pragma once

#include <vector>

#include "sde/clustering.hpp"
#include "sde/executor.hpp"

namespace sde {

/// Graded costs for abnormal disagreement: `a` when exactly one outcome is
/// abnormal, `b` when both are abnormal with different error types, `c`
/// when both are abnormal with the same error type.
struct DistanceWeights {
  double a = 1.0;
  double b = 0.8;
  double c = 0.6;

  static DistanceWeights defaults() { return {}; }
  /// Throws InvalidArgument unless every weight lies in [0, 1].
  void validate() const;
  bool operator==(const DistanceWeights&) const = default;
};

/// Symmetric M x M matrix with zero diagonal and entries in [0, 1].
class DistanceMatrix {
 public:
  explicit DistanceMatrix(int m = 0) : m_(m), d_(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0) {}

  int size() const { return m_; }
  double operator()(int i, int j) const { return d_[index(i, j)]; }
  /// Sets both (i, j) and (j, i).
  void set(int i, int j, double value);

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(j);
  }
  int m_;
  std::vector<double> d_;
};

struct UncertaintyScores {
  double sde = 0;
  double dsde = 0;
  double sc_entropy = 0;  // nats
};

double per_input_delta(const Outcome& o, const Outcome& o_prime, const DistanceWeights& w);

/// Mean per-input delta, or 0 for behaviourally identical signatures.
/// Throws LengthMismatch on unequal N.
double cluster_distance(const ExecutionSignature& sig_i, const ExecutionSignature& sig_j, const DistanceWeights& w);

DistanceMatrix distance_matrix(const ClusterPartition& partition, const DistanceWeights& w);

/// Sum over i < j of p_i p_j d_ij.
double sde(const ClusterPartition& partition, const DistanceMatrix& dmat);

/// Sum over i != c* of p_i d_{c*,i}.
double dsde(const ClusterPartition& partition, const DistanceMatrix& dmat);

/// Shannon entropy of the cluster distribution: the exact-match
/// self-consistency baseline.
double sc_entropy(const ClusterPartition& partition);

UncertaintyScores score(const ClusterPartition& partition, const DistanceWeights& w);

}  // namespace sde
