#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sde/clustering.hpp"
#include "sde/corpus.hpp"
#include "sde/executor.hpp"
#include "sde/metrics.hpp"

namespace sde {

/// A statistic that may be undefined (single-class labels, zero variance).
using Stat = std::optional<double>;

/// Serialises a Stat as a number or the string "undefined".
nlohmann::json stat_to_json(const Stat& s);
Stat stat_from_json(const nlohmann::json& j);

struct CorrectnessTargets {
  bool pass1 = false;
  double partial_pass1 = 0.0;
};

/// `results` pairs the rank-1 candidate's outcome on each reference test
/// with that test's expected output. Throws NoReferenceTests when empty.
CorrectnessTargets correctness(const Task& task, const std::vector<std::pair<Outcome, nlohmann::json>>& results);

/// P(score_failure > score_success) + 0.5 P(tie). nullopt unless both
/// classes are present.
Stat auroc(std::span<const double> scores, std::span<const bool> failure);

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> x);

Stat pearson(std::span<const double> x, std::span<const double> y);
Stat spearman(std::span<const double> x, std::span<const double> y);

// --- weight learning ----------------------------------------------------

struct WeightSample {
  ClusterPartition partition;
  double partial_pass1 = 0.0;
};

struct LearnedWeights {
  DistanceWeights weights;
  double train_auroc = 0.0;
  double default_train_auroc = 0.0;
};

/// Exhaustive search over {0, 1/steps, ..., 1}^3 maximising the training
/// AUROC of DSDE, failure = partial_pass1 < 1. Ties go to the point closest
/// (L1) to the default weights, then to the lexicographically smallest.
/// Throws DegenerateLabels when only one class is present.
LearnedWeights learn_weights(const std::vector<WeightSample>& train, int grid_steps = 20);

/// AUROC of DSDE under `w` for the given samples (failure = partial < 1).
Stat dsde_auroc(const std::vector<WeightSample>& samples, const DistanceWeights& w);

// --- abstention ---------------------------------------------------------

enum class UncertaintyMetric { SDE, DSDE, SCEntropy };
std::string to_string(UncertaintyMetric m);
UncertaintyMetric parse_metric(std::string_view text);

/// Accept the top-ranked output iff its uncertainty <= tau.
struct AbstentionPolicy {
  double tau = 0.0;
  UncertaintyMetric metric = UncertaintyMetric::DSDE;
  double fpr_cap = 0.05;

  bool accept(double uncertainty) const { return uncertainty <= tau; }
};

struct ThresholdChoice {
  double tau = 0.0;
  bool infeasible = false;  // only the abstain-everything threshold met the cap
  double accuracy = 0.0;
  double fpr = 0.0;
};

/// Candidate thresholds are -inf, +inf and midpoints between consecutive
/// distinct scores. Picks the highest-accuracy threshold whose FPR is within
/// the cap; ties go to the smaller threshold.
ThresholdChoice choose_threshold(std::span<const double> scores, std::span<const bool> pass1, double fpr_cap);

/// Accuracy = (correct accepted + incorrect abstained) / n.
/// FPR = incorrect accepted / incorrect (0 when there are none).
std::pair<double, double> accuracy_and_fpr(std::span<const double> scores, std::span<const bool> pass1, double tau);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over folds
};

struct FoldResult {
  double tau = 0.0;
  bool infeasible = false;
  double accuracy = 0.0;  // held-out
  double fpr = 0.0;       // held-out
};

struct AbstentionResult {
  double tau = 0.0;  // fitted on all data
  bool infeasible = false;
  MeanStd accuracy;
  MeanStd fpr;
  std::vector<FoldResult> folds;
};

/// Stratified k-fold calibration. Fold membership is a seeded shuffle of
/// each class, so results are reproducible for a given `split_seed`.
AbstentionResult calibrate_abstention(std::span<const double> scores, std::span<const bool> pass1, double fpr_cap,
                                      int folds, std::uint64_t split_seed = 0);

// --- summaries ----------------------------------------------------------

struct MetricStats {
  Stat auroc;     // failure = !pass1
  Stat pearson;   // against partial_pass1
  Stat spearman;  // against partial_pass1
  std::size_t n = 0;
};

MetricStats evaluate_metric(std::span<const double> scores, std::span<const bool> pass1,
                            std::span<const double> partial_pass1);

nlohmann::json metric_stats_to_json(const MetricStats& s);

}  // namespace sde
