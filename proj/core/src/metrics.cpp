#include "splitlab/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "splitlab/errors.hpp"

namespace splitlab::metrics {

void ScoredPredictions::validate() const {
  if (scores.empty()) throw ValidationError("metrics: no samples");
  if (scores.size() != labels.size()) throw ValidationError("metrics: scores/labels length mismatch");
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) throw ValidationError("metrics: label not in {0,1}");
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("metrics: score outside [0,1]");
  }
}

ConfusionMatrix confusion(const ScoredPredictions& preds) {
  preds.validate();
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.scores.size(); ++i) {
    const bool called = preds.scores[i] >= preds.threshold;
    const bool actual = preds.labels[i] == 1.0;
    if (called && actual) ++cm.tp;
    else if (called) ++cm.fp;
    else if (actual) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

namespace {

// Indices sorted by descending score.
std::vector<std::size_t> descending_order(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

// Walks distinct thresholds from high to low, calling fn(tp, fp) after each
// group of tied scores has been absorbed.
template <class Fn>
void sweep_thresholds(const ScoredPredictions& preds, Fn&& fn) {
  const auto order = descending_order(preds.scores);
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = preds.scores[order[i]];
    for (; i < order.size() && preds.scores[order[i]] == s; ++i) {
      if (preds.labels[order[i]] == 1.0) ++tp;
      else ++fp;
    }
    fn(tp, fp);
  }
}

}  // namespace

double auroc(const ScoredPredictions& preds) {
  preds.validate();
  const auto pos = static_cast<std::size_t>(std::count(preds.labels.begin(), preds.labels.end(), 1.0));
  const std::size_t neg = preds.labels.size() - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetricError("auroc needs both classes present");

  double area = 0.0;
  std::size_t prev_tp = 0;
  std::size_t prev_fp = 0;
  sweep_thresholds(preds, [&](std::size_t tp, std::size_t fp) {
    // Trapezoid between consecutive ROC points, in count units.
    area += static_cast<double>(fp - prev_fp) * static_cast<double>(tp + prev_tp) / 2.0;
    prev_tp = tp;
    prev_fp = fp;
  });
  return area / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auprc(const ScoredPredictions& preds) {
  preds.validate();
  const auto pos = static_cast<std::size_t>(std::count(preds.labels.begin(), preds.labels.end(), 1.0));
  if (pos == 0) throw UndefinedMetricError("auprc needs at least one positive");

  double area = 0.0;
  std::size_t prev_tp = 0;
  sweep_thresholds(preds, [&](std::size_t tp, std::size_t fp) {
    if (tp == prev_tp) return;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += static_cast<double>(tp - prev_tp) / static_cast<double>(pos) * precision;
    prev_tp = tp;
  });
  return area;
}

F1Kappa f1_and_kappa(const ConfusionMatrix& cm) {
  F1Kappa r;
  const double tp = static_cast<double>(cm.tp);
  const double fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn);
  const double tn = static_cast<double>(cm.tn);
  const double n = tp + fp + fn + tn;
  if (n == 0.0) throw ValidationError("metrics: empty confusion matrix");

  const double f1_denominator = 2.0 * tp + fp + fn;
  if (f1_denominator == 0.0) {
    r.f1_undefined = true;
  } else {
    r.f1 = 2.0 * tp / f1_denominator;
  }

  // (p_o - p_e) / (1 - p_e) with the n^2 factors cancelled, so a single
  // division of integers is the only rounding.
  const auto a = static_cast<std::int64_t>(cm.tp), b = static_cast<std::int64_t>(cm.fp);
  const auto c = static_cast<std::int64_t>(cm.fn), d = static_cast<std::int64_t>(cm.tn);
  const std::int64_t numerator = 2 * (a * d - b * c);
  const std::int64_t denominator = (a + b) * (b + d) + (a + c) * (c + d);
  if (denominator == 0) {
    r.kappa_degenerate = true;
  } else {
    r.kappa = static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  return r;
}

F1Kappa f1_and_kappa(const ScoredPredictions& preds) { return f1_and_kappa(confusion(preds)); }

}  // namespace splitlab::metrics
