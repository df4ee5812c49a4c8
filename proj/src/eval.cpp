#include "sde/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <numeric>
#include <tuple>

#include "sde/error.hpp"
#include "sde/rng.hpp"

namespace sde {
namespace {

// std::vector<bool> has no contiguous storage, so spans over flags need this.
class Flags {
 public:
  Flags() = default;
  explicit Flags(std::size_t n) : data_(new bool[n]()), n_(n) {}
  bool& operator[](std::size_t i) { return data_[i]; }
  std::span<const bool> span() const { return {data_.get(), n_}; }

 private:
  std::unique_ptr<bool[]> data_;
  std::size_t n_ = 0;
};

}  // namespace

nlohmann::json stat_to_json(const Stat& s) {
  if (!s) return "undefined";
  return *s;
}

Stat stat_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string() && j.get<std::string>() == "undefined") return std::nullopt;
  if (j.is_null()) return std::nullopt;
  throw Error(ErrorKind::SchemaMismatch, "statistic must be a number or \"undefined\"");
}

CorrectnessTargets correctness(const Task& task, const std::vector<std::pair<Outcome, nlohmann::json>>& results) {
  if (results.empty()) throw Error(ErrorKind::NoReferenceTests, "task " + task.task_id + " has no reference tests");
  std::size_t passed = 0;
  for (const auto& [outcome, expected] : results) {
    if (outcome.is_normal() && outcome.output() == canonical_expected(expected, task.is_stdin())) ++passed;
  }
  return {passed == results.size(), static_cast<double>(passed) / static_cast<double>(results.size())};
}

std::vector<double> midranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    // positions i..j (0-based) share rank mean((i+1)..(j+1))
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

struct PairCount {
  std::int64_t twice_wins = 0;  // 2 * wins + ties over (failure, success) pairs
  std::int64_t pairs = 0;
};

// Mann-Whitney count via a sort; exact in integers.
PairCount pair_count(std::span<const double> scores, std::span<const bool> failure) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  PairCount pc;
  std::int64_t successes_below = 0;
  std::int64_t n_fail = 0;
  std::int64_t n_succ = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::int64_t f = 0;
    std::int64_t s = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (failure[order[j]] ? f : s) += 1;
      ++j;
    }
    pc.twice_wins += f * (2 * successes_below + s);
    successes_below += s;
    n_fail += f;
    n_succ += s;
    i = j;
  }
  pc.pairs = n_fail * n_succ;
  return pc;
}

void check_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorKind::LengthMismatch, "score and label vectors differ in length");
}

}  // namespace

Stat auroc(std::span<const double> scores, std::span<const bool> failure) {
  check_same_length(scores.size(), failure.size());
  const PairCount pc = pair_count(scores, failure);
  if (pc.pairs == 0) return std::nullopt;
  return static_cast<double>(pc.twice_wins) / (2.0 * static_cast<double>(pc.pairs));
}

Stat pearson(std::span<const double> x, std::span<const double> y) {
  check_same_length(x.size(), y.size());
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Stat spearman(std::span<const double> x, std::span<const double> y) {
  check_same_length(x.size(), y.size());
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  return pearson(rx, ry);
}

// --- weight learning ----------------------------------------------------

namespace {

// DSDE as an exact rational in grid units. For weights (ka, kb, kc)/steps,
//   DSDE = (steps*c1 + ka*ca + kb*cb + kc*cc) / (K * N * steps)
// where the c* are size-weighted counts of each delta case between the
// dominant representative and every other cluster.
struct DsdeCounts {
  std::int64_t unequal_normal = 0;
  std::int64_t one_abnormal = 0;
  std::int64_t both_different = 0;
  std::int64_t both_same = 0;
  std::int64_t denom_base = 1;  // K * N; DSDE is 0 when N == 0
  bool failure = false;
};

DsdeCounts count_cases(const WeightSample& sample) {
  const ClusterPartition& p = sample.partition;
  DsdeCounts c;
  c.failure = sample.partial_pass1 < 1.0;
  if (p.count() == 0) return c;
  const auto& star = p.clusters.at(static_cast<std::size_t>(p.dominant_index)).representative;
  const std::int64_t n = static_cast<std::int64_t>(star.outcomes.size());
  c.denom_base = std::max<std::int64_t>(1, static_cast<std::int64_t>(p.total) * n);
  for (int i = 0; i < p.count(); ++i) {
    if (i == p.dominant_index) continue;
    const auto& cl = p.clusters[static_cast<std::size_t>(i)];
    const auto& other = cl.representative;
    if (static_cast<std::int64_t>(other.outcomes.size()) != n) {
      throw Error(ErrorKind::LengthMismatch, "signatures of unequal length");
    }
    const std::int64_t w = cl.size();
    for (std::int64_t k = 0; k < n; ++k) {
      const Outcome& o = star.outcomes[static_cast<std::size_t>(k)];
      const Outcome& q = other.outcomes[static_cast<std::size_t>(k)];
      if (o.is_normal() && q.is_normal()) {
        if (o.output() != q.output()) c.unequal_normal += w;
      } else if (o.is_normal() != q.is_normal()) {
        c.one_abnormal += w;
      } else if (o.error() == q.error()) {
        c.both_same += w;
      } else {
        c.both_different += w;
      }
    }
  }
  return c;
}

struct GridPoint {
  int a, b, c;
  auto key() const { return std::tie(a, b, c); }
};

}  // namespace

Stat dsde_auroc(const std::vector<WeightSample>& samples, const DistanceWeights& w) {
  std::vector<double> scores;
  Flags fail(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    scores.push_back(score(samples[i].partition, w).dsde);
    fail[i] = samples[i].partial_pass1 < 1.0;
  }
  return auroc(scores, fail.span());
}

LearnedWeights learn_weights(const std::vector<WeightSample>& train, int grid_steps) {
  if (grid_steps < 1) throw Error(ErrorKind::InvalidArgument, "grid_steps must be positive");
  std::vector<DsdeCounts> counts;
  counts.reserve(train.size());
  std::size_t failures = 0;
  for (const auto& s : train) {
    counts.push_back(count_cases(s));
    if (counts.back().failure) ++failures;
  }
  if (failures == 0 || failures == train.size()) {
    throw Error(ErrorKind::DegenerateLabels, "weight learning needs both passing and failing tasks");
  }

  const std::int64_t steps = grid_steps;
  const auto to_grid = [&](double v) { return static_cast<int>(std::lround(v * static_cast<double>(steps))); };
  const DistanceWeights def = DistanceWeights::defaults();
  const GridPoint target{to_grid(def.a), to_grid(def.b), to_grid(def.c)};

  std::vector<double> scores(counts.size());
  Flags fail(counts.size());
  for (std::size_t t = 0; t < counts.size(); ++t) fail[t] = counts[t].failure;
  const std::span<const bool> fail_span = fail.span();

  auto evaluate = [&](const GridPoint& g) {
    for (std::size_t t = 0; t < counts.size(); ++t) {
      const auto& c = counts[t];
      const std::int64_t num =
          steps * c.unequal_normal + g.a * c.one_abnormal + g.b * c.both_different + g.c * c.both_same;
      // Same rational -> same double, so ties in DSDE stay ties.
      scores[t] = static_cast<double>(num) / static_cast<double>(c.denom_base * steps);
    }
    return pair_count(scores, fail_span);
  };

  auto l1 = [&](const GridPoint& g) {
    return std::abs(g.a - target.a) + std::abs(g.b - target.b) + std::abs(g.c - target.c);
  };

  GridPoint best{};
  PairCount best_pc{-1, 1};
  for (int a = 0; a <= grid_steps; ++a) {
    for (int b = 0; b <= grid_steps; ++b) {
      for (int c = 0; c <= grid_steps; ++c) {
        const GridPoint g{a, b, c};
        const PairCount pc = evaluate(g);
        // pairs is the same for every grid point, so compare numerators.
        bool better = pc.twice_wins > best_pc.twice_wins;
        if (!better && pc.twice_wins == best_pc.twice_wins) {
          const int d = l1(g);
          const int bd = l1(best);
          better = d < bd || (d == bd && g.key() < best.key());
        }
        if (better) {
          best = g;
          best_pc = pc;
        }
      }
    }
  }

  const auto as_weight = [&](int k) { return static_cast<double>(k) / static_cast<double>(steps); };
  LearnedWeights out;
  out.weights = {as_weight(best.a), as_weight(best.b), as_weight(best.c)};
  out.train_auroc = static_cast<double>(best_pc.twice_wins) / (2.0 * static_cast<double>(best_pc.pairs));
  const PairCount def_pc = evaluate(target);
  out.default_train_auroc = static_cast<double>(def_pc.twice_wins) / (2.0 * static_cast<double>(def_pc.pairs));
  return out;
}

// --- abstention ---------------------------------------------------------

std::string to_string(UncertaintyMetric m) {
  switch (m) {
    case UncertaintyMetric::SDE: return "sde";
    case UncertaintyMetric::DSDE: return "dsde";
    case UncertaintyMetric::SCEntropy: return "sc_entropy";
  }
  return "dsde";
}

UncertaintyMetric parse_metric(std::string_view text) {
  if (text == "sde") return UncertaintyMetric::SDE;
  if (text == "dsde") return UncertaintyMetric::DSDE;
  if (text == "sc_entropy" || text == "sc-entropy") return UncertaintyMetric::SCEntropy;
  throw Error(ErrorKind::InvalidArgument, "unknown metric '" + std::string(text) + "'");
}

std::pair<double, double> accuracy_and_fpr(std::span<const double> scores, std::span<const bool> pass1, double tau) {
  check_same_length(scores.size(), pass1.size());
  if (scores.empty()) return {0.0, 0.0};
  std::size_t right = 0;
  std::size_t incorrect = 0;
  std::size_t incorrect_accepted = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool accepted = scores[i] <= tau;
    if (pass1[i]) {
      if (accepted) ++right;
    } else {
      ++incorrect;
      if (accepted) {
        ++incorrect_accepted;
      } else {
        ++right;
      }
    }
  }
  const double acc = static_cast<double>(right) / static_cast<double>(scores.size());
  const double fpr = incorrect == 0 ? 0.0 : static_cast<double>(incorrect_accepted) / static_cast<double>(incorrect);
  return {acc, fpr};
}

ThresholdChoice choose_threshold(std::span<const double> scores, std::span<const bool> pass1, double fpr_cap) {
  check_same_length(scores.size(), pass1.size());
  if (!(fpr_cap >= 0.0 && fpr_cap <= 1.0)) throw Error(ErrorKind::InvalidArgument, "fpr cap must lie in [0, 1]");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> distinct(scores.begin(), scores.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> taus{-inf};
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) taus.push_back(distinct[i] + (distinct[i + 1] - distinct[i]) / 2);
  taus.push_back(inf);

  constexpr double slack = 1e-12;
  ThresholdChoice best{-inf, false, -1.0, 0.0};
  bool other_feasible = false;
  for (double tau : taus) {
    const auto [acc, fpr] = accuracy_and_fpr(scores, pass1, tau);
    if (fpr > fpr_cap + slack) continue;
    if (tau != -inf) other_feasible = true;
    if (acc > best.accuracy) best = {tau, false, acc, fpr};
  }
  const bool any_correct = std::find(pass1.begin(), pass1.end(), true) != pass1.end();
  best.infeasible = !other_feasible && any_correct;
  if (best.accuracy < 0) best.accuracy = 0;
  return best;
}

namespace {
MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(v.size()));
  return m;
}
}  // namespace

AbstentionResult calibrate_abstention(std::span<const double> scores, std::span<const bool> pass1, double fpr_cap,
                                      int folds, std::uint64_t split_seed) {
  check_same_length(scores.size(), pass1.size());
  if (folds < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 folds");
  if (scores.size() < static_cast<std::size_t>(folds)) {
    throw Error(ErrorKind::InvalidArgument, "fewer tasks than folds");
  }

  // Stratified assignment: shuffle each class, then deal round-robin.
  // The second class continues where the first stopped so fold sizes
  // differ by at most one.
  Rng rng(split_seed);
  std::vector<int> fold_of(scores.size());
  std::size_t dealt = 0;
  for (bool cls : {false, true}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (pass1[i] == cls) idx.push_back(i);
    }
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    for (std::size_t i : idx) fold_of[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
  }

  AbstentionResult out;
  std::vector<double> accs;
  std::vector<double> fprs;
  for (int f = 0; f < folds; ++f) {
    const auto n_test = static_cast<std::size_t>(std::count(fold_of.begin(), fold_of.end(), f));
    std::vector<double> tr_s, te_s;
    Flags tr_p(scores.size() - n_test), te_p(n_test);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (fold_of[i] == f) {
        te_p[te_s.size()] = pass1[i];
        te_s.push_back(scores[i]);
      } else {
        tr_p[tr_s.size()] = pass1[i];
        tr_s.push_back(scores[i]);
      }
    }
    const ThresholdChoice choice = choose_threshold(tr_s, tr_p.span(), fpr_cap);
    const auto [acc, fpr] = accuracy_and_fpr(te_s, te_p.span(), choice.tau);
    out.folds.push_back({choice.tau, choice.infeasible, acc, fpr});
    accs.push_back(acc);
    fprs.push_back(fpr);
  }
  out.accuracy = mean_std(accs);
  out.fpr = mean_std(fprs);
  const ThresholdChoice all = choose_threshold(scores, pass1, fpr_cap);
  out.tau = all.tau;
  out.infeasible = all.infeasible;
  return out;
}

// --- summaries ----------------------------------------------------------

MetricStats evaluate_metric(std::span<const double> scores, std::span<const bool> pass1,
                            std::span<const double> partial_pass1) {
  check_same_length(scores.size(), pass1.size());
  check_same_length(scores.size(), partial_pass1.size());
  Flags fail(pass1.size());
  for (std::size_t i = 0; i < pass1.size(); ++i) fail[i] = !pass1[i];
  MetricStats s;
  s.n = scores.size();
  s.auroc = auroc(scores, fail.span());
  s.pearson = pearson(scores, partial_pass1);
  s.spearman = spearman(scores, partial_pass1);
  return s;
}

nlohmann::json metric_stats_to_json(const MetricStats& s) {
  return {{"auroc", stat_to_json(s.auroc)},
          {"pearson_r", stat_to_json(s.pearson)},
          {"spearman_rho", stat_to_json(s.spearman)},
          {"n_tasks", s.n}};
}

}  // namespace sde
