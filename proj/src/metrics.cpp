#include "geocohort/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "geocohort/errors.hpp"

namespace geocohort {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::InvalidArgument, "scores and labels differ in length");
  }
  bool pos = false, neg = false;
  for (int l : labels) {
    if (l != 0 && l != 1) throw Error(ErrorKind::InvalidArgument, "binary labels must be 0 or 1");
    (l == 1 ? pos : neg) = true;
  }
  if (!pos || !neg) throw Error(ErrorKind::SingleClass, "both classes must be present");
}

std::vector<std::size_t> order_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double evaluate_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the average rank keeps ranks integral.
  std::vector<long long> rank2(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) rank2[order[k]] = static_cast<long long>(i + j + 1);
    i = j;
  }
  long long n_pos = 0, rank2_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 1) {
      ++n_pos;
      rank2_pos += rank2[i];
    }
  }
  const long long n_neg = static_cast<long long>(n) - n_pos;
  const long long u2 = rank2_pos - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto order = order_descending(scores);
  const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  std::vector<RocPoint> curve{{scores[order[0]] + 1.0, 0.0, 0.0}};
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (labels[order[i]] == 1 ? tp : fp) += 1;
    if (i + 1 < order.size() && scores[order[i + 1]] == scores[order[i]]) continue;
    curve.push_back({scores[order[i]], fp / n_neg, tp / n_pos});
  }
  return curve;
}

std::vector<PrPoint> precision_recall_curve(std::span<const double> scores,
                                            std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto order = order_descending(scores);
  const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  std::vector<PrPoint> curve;
  double tp = 0, predicted = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    predicted += 1;
    if (labels[order[i]] == 1) tp += 1;
    if (i + 1 < order.size() && scores[order[i + 1]] == scores[order[i]]) continue;
    curve.push_back({scores[order[i]], tp / predicted, tp / n_pos});
  }
  return curve;
}

std::vector<int> binarize_labels(std::span<const TrainingLabel> labels) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(l.value() > 0.0 ? 1 : 0);
  return out;
}

}  // namespace geocohort
