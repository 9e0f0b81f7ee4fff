#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace geocohort {

/// Positive: users with a location guess. Negative: users without one.
enum class ModelVariant { positive, negative };

std::string_view to_string(ModelVariant v);
ModelVariant model_variant_from_string(std::string_view s);

/// Feature names in column order for a variant.
std::span<const std::string_view> feature_names(ModelVariant v);

struct FeatureVector {
  ModelVariant variant = ModelVariant::negative;
  std::vector<double> values;

  static FeatureVector positive(double cluster_size_fraction, std::int64_t total_entities,
                                bool is_us, std::int64_t total_posts, double history_duration_days,
                                std::int64_t guess_population);
  static FeatureVector negative(std::int64_t total_entities, std::int64_t total_posts,
                                double history_duration_days);

  /// Throws Error(SchemaMismatch) when the column count does not fit the variant.
  void check_schema() const;

  bool operator==(const FeatureVector&) const = default;
};

nlohmann::json features_to_json(const FeatureVector& f);
FeatureVector features_from_json(const nlohmann::json& j);

}  // namespace geocohort
