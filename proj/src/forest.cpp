#include "geocohort/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "geocohort/errors.hpp"
#include "geocohort/rng.hpp"

namespace geocohort {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

class TreeBuilder {
 public:
  TreeBuilder(std::span<const TrainingRow> rows, const ForestParams& params, int mtry,
              std::size_t n_features, Rng& rng)
      : rows_(rows), params_(params), mtry_(mtry), importance_(n_features, 0.0), rng_(rng) {}

  RegressionTree build(std::vector<std::size_t> sample) {
    tree_.nodes.clear();
    grow(std::move(sample), 0);
    return std::move(tree_);
  }

  const std::vector<double>& importance() const { return importance_; }

 private:
  double label(std::size_t i) const { return rows_[i].label.value(); }
  double x(std::size_t i, int f) const { return rows_[i].features.values[static_cast<std::size_t>(f)]; }

  int grow(std::vector<std::size_t> idx, int depth) {
    const int node_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    double sum = 0.0, sumsq = 0.0;
    for (auto i : idx) {
      sum += label(i);
      sumsq += label(i) * label(i);
    }
    const double n = static_cast<double>(idx.size());
    const double mean = sum / n;
    const double sse = std::max(0.0, sumsq - sum * sum / n);
    tree_.nodes[node_id].value = std::clamp(mean, 0.0, 1.0);

    const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf));
    if (depth >= params_.max_depth || idx.size() < 2 * min_leaf || sse <= 0.0) return node_id;

    // Sample mtry distinct features (partial Fisher-Yates).
    std::vector<int> features(importance_.size());
    std::iota(features.begin(), features.end(), 0);
    for (int k = 0; k < mtry_; ++k) {
      const auto j = static_cast<std::size_t>(k) + rng_.below(features.size() - static_cast<std::size_t>(k));
      std::swap(features[static_cast<std::size_t>(k)], features[j]);
    }

    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 0.0;
    std::vector<std::pair<double, double>> column(idx.size());
    for (int k = 0; k < mtry_; ++k) {
      const int f = features[static_cast<std::size_t>(k)];
      for (std::size_t r = 0; r < idx.size(); ++r) column[r] = {x(idx[r], f), label(idx[r])};
      std::sort(column.begin(), column.end());
      double left_sum = 0.0, left_sq = 0.0;
      for (std::size_t r = 0; r + 1 < column.size(); ++r) {
        left_sum += column[r].second;
        left_sq += column[r].second * column[r].second;
        const std::size_t nl = r + 1, nr = column.size() - nl;
        if (column[r].first == column[r + 1].first) continue;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = sum - left_sum, right_sq = sumsq - left_sq;
        const double sse_l = left_sq - left_sum * left_sum / static_cast<double>(nl);
        const double sse_r = right_sq - right_sum * right_sum / static_cast<double>(nr);
        const double gain = sse - sse_l - sse_r;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = f;
          const double mid = 0.5 * (column[r].first + column[r + 1].first);
          best_threshold = mid < column[r + 1].first ? mid : column[r].first;
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (x(i, best_feature) <= best_threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    importance_[static_cast<std::size_t>(best_feature)] += best_gain;

    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[node_id];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return node_id;
  }

  std::span<const TrainingRow> rows_;
  const ForestParams& params_;
  int mtry_;
  std::vector<double> importance_;
  Rng& rng_;
  RegressionTree tree_;
};

void check_params(const ForestParams& p, std::size_t n_features) {
  if (p.n_trees < 1 || p.max_depth < 0 || p.min_leaf < 1 || p.features_per_split < 0 ||
      static_cast<std::size_t>(p.features_per_split) > n_features) {
    throw Error(ErrorKind::InvalidArgument, "invalid forest parameters");
  }
}

}  // namespace

TrainingLabel::TrainingLabel(double value) : value_(value) {
  if (value != 0.0 && value != 0.5 && value != 1.0) {
    throw Error(ErrorKind::InvalidLabel,
                "training labels must be 0, 0.5 or 1, got " + std::to_string(value));
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

Forest train_forest(std::span<const TrainingRow> rows, ModelVariant variant,
                    const ForestParams& params, int workers) {
  if (rows.size() < kMinTrainingRows) {
    throw Error(ErrorKind::TooFewRows, "need at least " + std::to_string(kMinTrainingRows) +
                                           " training rows, got " + std::to_string(rows.size()));
  }
  for (const auto& row : rows) {
    if (row.features.variant != variant) {
      throw Error(ErrorKind::SchemaMismatch, "training row is not a " +
                                                 std::string(to_string(variant)) + " feature vector");
    }
    row.features.check_schema();
  }
  const std::size_t d = feature_names(variant).size();
  check_params(params, d);
  const int mtry = params.features_per_split > 0
                       ? params.features_per_split
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  Forest forest;
  forest.params = params;
  forest.variant = variant;
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));
  std::vector<std::vector<double>> tree_importance(static_cast<std::size_t>(params.n_trees));

  auto build_tree = [&](std::size_t t) {
    Rng rng(params.seed ^ splitmix64(static_cast<std::uint64_t>(t) + 1));
    std::vector<std::size_t> sample(rows.size());
    for (auto& s : sample) s = rng.below(rows.size());
    TreeBuilder builder(rows, params, mtry, d, rng);
    forest.trees[t] = builder.build(std::move(sample));
    tree_importance[t] = builder.importance();
  };

  const auto n_workers = static_cast<std::size_t>(std::clamp(workers, 1, params.n_trees));
  if (n_workers == 1) {
    for (std::size_t t = 0; t < forest.trees.size(); ++t) build_tree(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < forest.trees.size(); t += n_workers) build_tree(t);
      });
    }
  }

  forest.feature_importances.assign(d, 0.0);
  for (const auto& imp : tree_importance) {
    for (std::size_t f = 0; f < d; ++f) forest.feature_importances[f] += imp[f];
  }
  const double total = std::accumulate(forest.feature_importances.begin(),
                                       forest.feature_importances.end(), 0.0);
  for (auto& v : forest.feature_importances) {
    v = total > 0.0 ? v / total : 1.0 / static_cast<double>(d);
  }
  return forest;
}

double predict(const Forest& forest, const FeatureVector& features) {
  if (features.variant != forest.variant) {
    throw Error(ErrorKind::SchemaMismatch, "a " + std::string(to_string(forest.variant)) +
                                               " model cannot score " +
                                               std::string(to_string(features.variant)) + " features");
  }
  features.check_schema();
  if (forest.trees.empty()) throw Error(ErrorKind::InvalidArgument, "forest has no trees");
  double sum = 0.0;
  for (const auto& tree : forest.trees) sum += tree.predict(features.values);
  return std::clamp(sum / static_cast<double>(forest.trees.size()), 0.0, 1.0);
}

json forest_to_json(const Forest& forest) {
  json trees = json::array();
  for (const auto& tree : forest.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) {
        nodes.push_back(json{{"leaf", n.value}});
      } else {
        nodes.push_back(json{{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"value", n.value}});
      }
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }
  json names = json::array();
  for (auto n : feature_names(forest.variant)) names.push_back(std::string(n));
  return json{{"format", "geocohort-forest"},
              {"version", kFormatVersion},
              {"variant", std::string(to_string(forest.variant))},
              {"feature_names", std::move(names)},
              {"params",
               {{"n_trees", forest.params.n_trees},
                {"max_depth", forest.params.max_depth},
                {"min_leaf", forest.params.min_leaf},
                {"features_per_split", forest.params.features_per_split},
                {"seed", forest.params.seed}}},
              {"feature_importances", forest.feature_importances},
              {"trees", std::move(trees)}};
}

Forest forest_from_json(const json& j) {
  try {
    if (j.at("format") != "geocohort-forest" || j.at("version") != kFormatVersion) {
      throw Error(ErrorKind::SchemaMismatch, "not a version 1 forest file");
    }
    Forest f;
    f.variant = model_variant_from_string(j.at("variant").get<std::string>());
    const auto& p = j.at("params");
    f.params.n_trees = p.at("n_trees").get<int>();
    f.params.max_depth = p.at("max_depth").get<int>();
    f.params.min_leaf = p.at("min_leaf").get<int>();
    f.params.features_per_split = p.at("features_per_split").get<int>();
    f.params.seed = p.at("seed").get<std::uint64_t>();
    f.feature_importances = j.at("feature_importances").get<std::vector<double>>();
    const auto d = static_cast<int>(feature_names(f.variant).size());
    for (const auto& t : j.at("trees")) {
      RegressionTree tree;
      for (const auto& n : t.at("nodes")) {
        TreeNode node;
        if (n.contains("leaf")) {
          node.value = n.at("leaf").get<double>();
        } else {
          node.feature = n.at("feature").get<int>();
          node.threshold = n.at("threshold").get<double>();
          node.left = n.at("left").get<int>();
          node.right = n.at("right").get<int>();
          node.value = n.at("value").get<double>();
        }
        tree.nodes.push_back(node);
      }
      const auto size = static_cast<int>(tree.nodes.size());
      for (const auto& node : tree.nodes) {
        if (!node.is_leaf() && (node.feature >= d || node.left <= 0 || node.left >= size ||
                                node.right <= 0 || node.right >= size)) {
          throw Error(ErrorKind::SchemaMismatch, "forest file has an invalid node");
        }
      }
      if (tree.nodes.empty()) throw Error(ErrorKind::SchemaMismatch, "forest file has an empty tree");
      f.trees.push_back(std::move(tree));
    }
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("forest file: ") + e.what());
  }
}

void save_forest(const Forest& forest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << forest_to_json(forest).dump() << '\n';
}

Forest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::SchemaMismatch, "unparseable forest file " + path.string());
  return forest_from_json(j);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_holdout(std::size_t n,
                                                                            double fraction,
                                                                            std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "holdout fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed ^ 0x5EEDF00DULL);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(test)};
}

}  // namespace geocohort
