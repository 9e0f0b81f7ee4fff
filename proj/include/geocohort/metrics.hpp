#pragma once

#include <span>
#include <vector>

#include "geocohort/forest.hpp"

namespace geocohort {

/// ROC AUC from the Mann-Whitney rank statistic; tied scores share their
/// average rank. Throws Error(SingleClass) unless both classes are present.
double evaluate_auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double threshold;
  double false_positive_rate;
  double true_positive_rate;
};

struct PrPoint {
  double threshold;
  double precision;
  double recall;
};

/// One point per distinct score (descending), predicting positive when
/// score >= threshold. The ROC curve starts at (0, 0).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);
std::vector<PrPoint> precision_recall_curve(std::span<const double> scores,
                                            std::span<const int> labels);

/// Partial and full guesses count as correct.
std::vector<int> binarize_labels(std::span<const TrainingLabel> labels);

}  // namespace geocohort
