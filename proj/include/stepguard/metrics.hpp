#pragma once

// Threshold-free (ROC-AUC, PR-AUC) and threshold-sweep classification metrics
// over (label, score) pairs.

#include <span>
#include <vector>

namespace stepguard {

struct EvalSample {
  int label = 0;  // 1 = violating, 0 = unrelated
  double score = 0.0;
};

/// One ROC/PR operating point: predict positive when score >= threshold.
struct CurvePoint {
  double threshold;
  double tpr;
  double fpr;
  double precision;
  double recall;
  double accuracy;
};

struct CurveSummary {
  double roc_auc = 0.0;
  double pr_auc = 0.0;
  std::vector<CurvePoint> curve_points;  // one per distinct score, descending threshold
};

struct ThresholdAccuracy {
  double threshold;
  double accuracy;
};

/// Trapezoidal area under the ROC curve. Tied scores form one ROC segment,
/// which is the Mann-Whitney U / (n+ * n-) with ties counted as 1/2.
/// Throws InvalidArgument when either class is absent.
double roc_auc(std::span<const EvalSample> samples);

/// Step-wise precision-recall integral (average precision): the sum of
/// (R_k - R_{k-1}) * P_k over distinct descending thresholds. No linear
/// interpolation between PR points.
double pr_auc(std::span<const EvalSample> samples);

CurveSummary summarize(std::span<const EvalSample> samples);

/// Accuracy of the rule "reject iff score > threshold" at each grid value.
std::vector<ThresholdAccuracy> threshold_sweep(std::span<const EvalSample> samples,
                                               std::span<const double> grid);

/// 0.1, 0.2, ..., 0.9.
std::vector<double> default_threshold_grid();

}  // namespace stepguard
