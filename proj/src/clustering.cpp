#include "sde/clustering.hpp"

#include <algorithm>
#include <unordered_map>

#include "sde/error.hpp"

namespace sde {
namespace {

// Length-prefixed, hence injective, encoding of a signature's behaviour.
std::string signature_key(const ExecutionSignature& sig) {
  std::string key;
  for (const auto& o : sig.outcomes) {
    if (o.is_normal()) {
      key += 'N';
      key += std::to_string(o.output().size());
      key += ':';
      key += o.output();
    } else {
      const std::string label = o.error().label();
      key += 'A';
      key += std::to_string(label.size());
      key += ':';
      key += label;
    }
  }
  return key;
}

}  // namespace

double ClusterPartition::probability(int i) const {
  return static_cast<double>(clusters.at(static_cast<std::size_t>(i)).size()) / static_cast<double>(total);
}

std::vector<double> ClusterPartition::probabilities() const {
  std::vector<double> p;
  for (int i = 0; i < count(); ++i) p.push_back(probability(i));
  return p;
}

std::vector<int> ClusterPartition::sizes() const {
  std::vector<int> s;
  for (const auto& c : clusters) s.push_back(c.size());
  return s;
}

ClusterPartition partition(const std::vector<ExecutionSignature>& signatures) {
  if (signatures.empty()) throw Error(ErrorKind::InvalidArgument, "partition of zero signatures");
  const std::size_t n = signatures.front().outcomes.size();
  for (const auto& s : signatures) {
    if (s.outcomes.size() != n) throw Error(ErrorKind::LengthMismatch, "signatures of unequal length");
  }

  ClusterPartition part;
  part.task_id = signatures.front().task_id;
  part.total = static_cast<int>(signatures.size());

  std::unordered_map<std::string, std::size_t> index;
  for (const auto& s : signatures) {
    auto [it, fresh] = index.emplace(signature_key(s), part.clusters.size());
    if (fresh) part.clusters.push_back({{}, s});
    part.clusters[it->second].members.push_back(s.rank);
  }
  for (auto& c : part.clusters) {
    std::sort(c.members.begin(), c.members.end());
    c.representative.rank = c.members.front();
  }
  std::sort(part.clusters.begin(), part.clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.members.front() < b.members.front();
  });

  part.dominant_index = -1;
  for (int i = 0; i < part.count(); ++i) {
    const auto& m = part.clusters[static_cast<std::size_t>(i)].members;
    if (std::find(m.begin(), m.end(), 1) != m.end()) part.dominant_index = i;
  }
  if (part.dominant_index < 0) throw Error(ErrorKind::InvalidArgument, "no candidate with rank 1");
  return part;
}

}  // namespace sde
