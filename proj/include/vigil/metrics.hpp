#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "vigil/errors.hpp"

namespace vigil {

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }

  double accuracy_pct() const {
    return total() == 0 ? 0.0 : 100.0 * static_cast<double>(tp + tn) / static_cast<double>(total());
  }

  // predictions/labels: 1 = abnormal (positive), 0 = normal
  static Confusion from(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
      throw ShapeMismatch("confusion: prediction/label count mismatch");
    Confusion c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      if (labels[i] == 1)
        predictions[i] == 1 ? ++c.tp : ++c.fn;
      else
        predictions[i] == 1 ? ++c.fp : ++c.tn;
    }
    return c;
  }
};

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

// Threshold sweep over every distinct score plus +/-inf sentinels; an item is
// predicted positive when score >= threshold. The curve is a step function
// from (0,0) to (1,1), non-decreasing in both coordinates. Needs both classes
// present.
inline std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                       const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw ShapeMismatch("roc: score/label count mismatch");
  if (scores.empty()) throw EmptyDataset("roc over empty score set");
  std::size_t pos = 0, neg = 0;
  for (int l : labels) l == 1 ? ++pos : ++neg;
  if (pos == 0 || neg == 0)
    throw EmptyDataset("roc needs both classes present");

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<RocPoint> points;
  points.push_back(RocPoint{inf, 0.0, 0.0});

  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      labels[order[i]] == 1 ? ++tp : ++fp;
      ++i;
    }
    points.push_back(RocPoint{s, static_cast<double>(fp) / static_cast<double>(neg),
                              static_cast<double>(tp) / static_cast<double>(pos)});
  }
  points.push_back(RocPoint{-inf, 1.0, 1.0});
  return points;
}

inline double auc_trapezoid(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
  return area;
}

// Table-style overall column: unweighted mean of the two term accuracies.
inline double overall_accuracy(double midterm_pct, double finalterm_pct) {
  return (midterm_pct + finalterm_pct) / 2.0;
}

}  // namespace vigil
