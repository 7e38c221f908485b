#pragma once

#include <span>
#include <vector>

namespace splitlab::metrics {

/// Scores in [0,1] with binary labels. A score >= threshold is a positive call.
struct ScoredPredictions {
  std::vector<double> scores;
  std::vector<double> labels;
  double threshold = 0.5;

  /// Throws ValidationError on empty input, length mismatch, labels outside
  /// {0,1} or scores outside [0,1].
  void validate() const;
};

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(const ScoredPredictions& preds);

/// Area under the ROC curve by trapezoidal integration over distinct score
/// thresholds. Tied scores between classes earn half credit.
/// Throws UndefinedMetricError unless both classes are present.
double auroc(const ScoredPredictions& preds);

/// Step-wise area under the precision-recall curve:
///   sum_k (R_k - R_{k-1}) * P_k
/// over distinct score thresholds in descending order.
/// Throws UndefinedMetricError when there are no positives.
double auprc(const ScoredPredictions& preds);

struct F1Kappa {
  double f1 = 0.0;
  double kappa = 0.0;
  /// Expected agreement was 1 (both raters constant and identical); kappa set to 0.
  bool kappa_degenerate = false;
  /// No positives predicted or present; F1 set to 0.
  bool f1_undefined = false;
};

F1Kappa f1_and_kappa(const ConfusionMatrix& cm);
F1Kappa f1_and_kappa(const ScoredPredictions& preds);

}  // namespace splitlab::metrics
