#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "geocohort/features.hpp"

namespace geocohort {

/// Regression target restricted to miss (0), partial (0.5) and full (1).
class TrainingLabel {
 public:
  /// Throws Error(InvalidLabel) for anything but 0, 0.5 or 1.
  explicit TrainingLabel(double value);

  double value() const { return value_; }
  bool operator==(const TrainingLabel&) const = default;

 private:
  double value_;
};

struct TrainingRow {
  FeatureVector features;
  TrainingLabel label;
};

struct ForestParams {
  int n_trees = 200;
  int max_depth = 8;
  int min_leaf = 3;
  int features_per_split = 0;  // 0 selects ceil(sqrt(d))
  std::uint64_t seed = 0;

  bool operator==(const ForestParams&) const = default;
};

/// Flat node array; `feature < 0` marks a leaf. Samples with
/// value <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  bool operator==(const RegressionTree&) const = default;
};

struct Forest {
  ForestParams params;
  ModelVariant variant = ModelVariant::positive;
  std::vector<RegressionTree> trees;
  std::vector<double> feature_importances;

  bool operator==(const Forest&) const = default;
};

/// Fewest rows train_forest accepts.
inline constexpr std::size_t kMinTrainingRows = 10;

/// Bagged CART regression with an MSE split criterion. Each tree draws its
/// own bootstrap sample and per-node feature subsets from a generator seeded
/// by (seed, tree index), so the result does not depend on `workers`.
/// Importances are total SSE reduction per feature, normalized to sum to 1
/// (uniform when no split was made).
/// Throws Error(TooFewRows) for fewer than 10 rows and Error(SchemaMismatch)
/// when a row does not fit `variant`.
Forest train_forest(std::span<const TrainingRow> rows, ModelVariant variant,
                    const ForestParams& params, int workers = 1);

/// Mean of tree predictions clamped to [0, 1].
double predict(const Forest& forest, const FeatureVector& features);

nlohmann::json forest_to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& j);
void save_forest(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

/// Deterministic shuffle split; returns (train indices, test indices) with
/// round(n * fraction) rows held out.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_holdout(std::size_t n,
                                                                            double fraction,
                                                                            std::uint64_t seed);

}  // namespace geocohort
