#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "splitlab/metrics/metrics.hpp"

namespace oracle {

struct HandCase {
  splitlab::metrics::ConfusionMatrix cm;  // tp, fp, fn, tn
  double f1;
  double kappa;
};

// Worked with exact fractions by hand.
inline const std::vector<HandCase>& hand_cases() {
  static const std::vector<HandCase> cases = {
      {{1, 1, 1, 1}, 1.0 / 2, 0.0},          {{10, 0, 0, 10}, 1.0, 1.0},
      {{0, 0, 5, 5}, 0.0, 0.0},              {{3, 2, 1, 4}, 2.0 / 3, 2.0 / 5},
      {{8, 1, 2, 89}, 16.0 / 19, 71.0 / 86}, {{0, 3, 0, 7}, 0.0, 0.0},
      {{5, 5, 5, 5}, 1.0 / 2, 0.0},          {{20, 10, 5, 65}, 8.0 / 11, 5.0 / 8},
      {{1, 0, 9, 90}, 2.0 / 11, 1.0 / 6},    {{7, 3, 0, 0}, 14.0 / 17, 0.0},
  };
  return cases;
}

inline splitlab::metrics::ScoredPredictions random_preds(std::mt19937_64& rng, std::size_t n,
                                                          bool coarse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  splitlab::metrics::ScoredPredictions p;
  for (std::size_t i = 0; i < n; ++i) {
    double s = u(rng);
    if (coarse) s = std::round(s * 20.0) / 20.0;  // many ties
    p.scores.push_back(s);
    p.labels.push_back(static_cast<double>(rng() % 2));
  }
  p.labels[0] = 0.0;
  p.labels[1] = 1.0;
  return p;
}

}  // namespace oracle
