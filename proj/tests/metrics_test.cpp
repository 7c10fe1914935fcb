#include "vigil/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "vigil/rng.hpp"

namespace {

using namespace vigil;

// Independent all-thresholds oracle: for every candidate threshold count the
// confusion directly, sort the points, integrate with the trapezoid rule.
double brute_force_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::size_t pos = 0, neg = 0;
  for (int l : labels) l == 1 ? ++pos : ++neg;

  std::vector<double> thresholds = scores;
  thresholds.push_back(std::numeric_limits<double>::infinity());
  thresholds.push_back(-std::numeric_limits<double>::infinity());

  std::vector<std::pair<double, double>> points;  // (fpr, tpr)
  for (double t : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= t) labels[i] == 1 ? ++tp : ++fp;
    points.emplace_back(double(fp) / double(neg), double(tp) / double(pos));
  }
  std::sort(points.begin(), points.end());
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += (points[i].first - points[i - 1].first) *
            (points[i].second + points[i - 1].second) * 0.5;
  return area;
}

TEST(Confusion, CountsAndAccuracy) {
  const Confusion c = Confusion::from({1, 1, 0, 0, 1}, {1, 0, 0, 1, 1});
  EXPECT_EQ(c.tp, 2u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.tn, 1u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_DOUBLE_EQ(c.accuracy_pct(), 60.0);
  EXPECT_THROW(Confusion::from({1}, {1, 0}), ShapeMismatch);
}

TEST(Roc, PerfectSeparationIsUnitArea) {
  const std::vector<double> scores{0.9, 0.8, 0.4, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  const auto points = roc_curve(scores, labels);
  EXPECT_DOUBLE_EQ(auc_trapezoid(points), 1.0);
  EXPECT_DOUBLE_EQ(points.front().fpr, 0.0);
  EXPECT_DOUBLE_EQ(points.front().tpr, 0.0);
  EXPECT_DOUBLE_EQ(points.back().fpr, 1.0);
  EXPECT_DOUBLE_EQ(points.back().tpr, 1.0);
}

TEST(Roc, HandCaseSwappedPair) {
  const std::vector<double> scores{0.9, 0.4, 0.8, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(auc_trapezoid(roc_curve(scores, labels)), 0.75);
}

TEST(Roc, AllScoresEqualIsDiagonal) {
  const std::vector<double> scores{0.5, 0.5, 0.5, 0.5};
  const std::vector<int> labels{1, 0, 1, 0};
  const auto points = roc_curve(scores, labels);
  EXPECT_DOUBLE_EQ(auc_trapezoid(points), 0.5);
  // One interior point where everything turns positive at once.
  ASSERT_EQ(points.size(), 3u);
  EXPECT_DOUBLE_EQ(points[1].fpr, 1.0);
  EXPECT_DOUBLE_EQ(points[1].tpr, 1.0);
}

TEST(Roc, MonotoneFromOriginToOne) {
  Rng rng(17);
  std::vector<double> scores(50);
  std::vector<int> labels(50);
  for (std::size_t i = 0; i < 50; ++i) {
    scores[i] = rng.uniform_index(10) / 10.0;  // many ties
    labels[i] = rng.bernoulli(0.3) ? 1 : 0;
  }
  const auto points = roc_curve(scores, labels);
  EXPECT_DOUBLE_EQ(points.front().fpr, 0.0);
  EXPECT_DOUBLE_EQ(points.front().tpr, 0.0);
  EXPECT_DOUBLE_EQ(points.back().fpr, 1.0);
  EXPECT_DOUBLE_EQ(points.back().tpr, 1.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    EXPECT_GE(points[i].fpr, points[i - 1].fpr);
    EXPECT_GE(points[i].tpr, points[i - 1].tpr);
  }
}

TEST(Roc, MatchesBruteForceOnRandomSets) {
  Rng rng(99);
  for (int round = 0; round < 100; ++round) {
    std::vector<double> scores(20);
    std::vector<int> labels(20);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < 20; ++i) {
      // Quantized scores produce plenty of ties.
      scores[i] = double(rng.uniform_index(8)) / 8.0;
      labels[i] = rng.bernoulli(0.4) ? 1 : 0;
      (labels[i] == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[1] = 0;
    const double fast = auc_trapezoid(roc_curve(scores, labels));
    const double slow = brute_force_auc(scores, labels);
    EXPECT_NEAR(fast, slow, 1e-12) << "round " << round;
  }
}

TEST(Roc, LabelInversionComplementsAuc) {
  Rng rng(123);
  std::vector<double> scores(40);
  std::vector<int> labels(40), flipped(40);
  for (std::size_t i = 0; i < 40; ++i) {
    scores[i] = rng.uniform();
    labels[i] = rng.bernoulli(0.5) ? 1 : 0;
    flipped[i] = 1 - labels[i];
  }
  labels[0] = 1;
  labels[1] = 0;
  flipped[0] = 0;
  flipped[1] = 1;
  const double auc = auc_trapezoid(roc_curve(scores, labels));
  const double inv = auc_trapezoid(roc_curve(scores, flipped));
  EXPECT_NEAR(auc + inv, 1.0, 1e-12);
}

TEST(Roc, SingleClassRejected) {
  EXPECT_THROW(roc_curve({0.5, 0.7}, {1, 1}), EmptyDataset);
  EXPECT_THROW(roc_curve({}, {}), EmptyDataset);
}

TEST(OverallAccuracy, TableArithmetic) {
  EXPECT_NEAR(overall_accuracy(82.74, 52.68), 67.71, 0.005 + 1e-12);
  EXPECT_NEAR(overall_accuracy(94.49, 89.29), 91.89, 0.005 + 1e-12);
  EXPECT_NEAR(overall_accuracy(87.20, 85.02), 86.11, 0.005 + 1e-12);
  EXPECT_NEAR(overall_accuracy(97.77, 92.86), 95.32, 0.005 + 1e-12);
}

}  // namespace
