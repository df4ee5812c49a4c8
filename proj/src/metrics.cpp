#include "sde/metrics.hpp"

#include <cmath>

#include "sde/error.hpp"

namespace sde {

void DistanceWeights::validate() const {
  for (double v : {a, b, c}) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::InvalidArgument, "distance weights must lie in [0, 1]");
  }
}

void DistanceMatrix::set(int i, int j, double value) {
  d_[index(i, j)] = value;
  d_[index(j, i)] = value;
}

double per_input_delta(const Outcome& o, const Outcome& o_prime, const DistanceWeights& w) {
  const bool normal = o.is_normal();
  const bool normal_prime = o_prime.is_normal();
  if (normal && normal_prime) return o.output() == o_prime.output() ? 0.0 : 1.0;
  if (normal != normal_prime) return w.a;
  return o.error() == o_prime.error() ? w.c : w.b;
}

double cluster_distance(const ExecutionSignature& sig_i, const ExecutionSignature& sig_j, const DistanceWeights& w) {
  const std::size_t n = sig_i.outcomes.size();
  if (sig_j.outcomes.size() != n) throw Error(ErrorKind::LengthMismatch, "signatures of unequal length");
  // a cluster is at distance 0 from itself even when its signature holds
  // abnormal cells, which the per-input rule alone would charge c for
  if (n == 0 || same_behaviour(sig_i, sig_j)) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) total += per_input_delta(sig_i.outcomes[k], sig_j.outcomes[k], w);
  return total / static_cast<double>(n);
}

DistanceMatrix distance_matrix(const ClusterPartition& partition, const DistanceWeights& w) {
  DistanceMatrix d(partition.count());
  for (int i = 0; i < partition.count(); ++i) {
    for (int j = i + 1; j < partition.count(); ++j) {
      d.set(i, j,
            cluster_distance(partition.clusters[static_cast<std::size_t>(i)].representative,
                             partition.clusters[static_cast<std::size_t>(j)].representative, w));
    }
  }
  return d;
}

namespace {
void check_dims(const ClusterPartition& partition, const DistanceMatrix& dmat) {
  if (dmat.size() != partition.count()) {
    throw Error(ErrorKind::DimensionMismatch, "distance matrix is " + std::to_string(dmat.size()) + "x" +
                                                  std::to_string(dmat.size()) + " for " +
                                                  std::to_string(partition.count()) + " clusters");
  }
}
}  // namespace

double sde(const ClusterPartition& partition, const DistanceMatrix& dmat) {
  check_dims(partition, dmat);
  const auto p = partition.probabilities();
  double total = 0.0;
  for (int i = 0; i < partition.count(); ++i) {
    for (int j = i + 1; j < partition.count(); ++j) total += p[i] * p[j] * dmat(i, j);
  }
  return total;
}

double dsde(const ClusterPartition& partition, const DistanceMatrix& dmat) {
  check_dims(partition, dmat);
  const int star = partition.dominant_index;
  if (star < 0 || star >= partition.count()) throw Error(ErrorKind::DimensionMismatch, "dominant index out of range");
  const auto p = partition.probabilities();
  double total = 0.0;
  for (int i = 0; i < partition.count(); ++i) {
    if (i != star) total += p[i] * dmat(star, i);
  }
  return total;
}

double sc_entropy(const ClusterPartition& partition) {
  double h = 0.0;
  for (double p : partition.probabilities()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  // a single cluster gives -1 * log(1) = -0.0
  return h == 0.0 ? 0.0 : h;
}

UncertaintyScores score(const ClusterPartition& partition, const DistanceWeights& w) {
  const DistanceMatrix d = distance_matrix(partition, w);
  return {sde(partition, d), dsde(partition, d), sc_entropy(partition)};
}

}  // namespace sde
