#include "geocohort/features.hpp"

#include <array>
#include <string>

#include "geocohort/errors.hpp"

namespace geocohort {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kPositiveNames = {
    "cluster_size_fraction", "total_entities",        "is_us",
    "total_posts",           "history_duration_days", "guess_population",
};
constexpr std::array<std::string_view, 3> kNegativeNames = {
    "total_entities",
    "total_posts",
    "history_duration_days",
};

}  // namespace

std::string_view to_string(ModelVariant v) {
  return v == ModelVariant::positive ? "positive" : "negative";
}

ModelVariant model_variant_from_string(std::string_view s) {
  if (s == "positive") return ModelVariant::positive;
  if (s == "negative") return ModelVariant::negative;
  throw Error(ErrorKind::SchemaMismatch, "unknown model variant '" + std::string(s) + "'");
}

std::span<const std::string_view> feature_names(ModelVariant v) {
  if (v == ModelVariant::positive) return kPositiveNames;
  return kNegativeNames;
}

FeatureVector FeatureVector::positive(double cluster_size_fraction, std::int64_t total_entities,
                                      bool is_us, std::int64_t total_posts,
                                      double history_duration_days,
                                      std::int64_t guess_population) {
  return FeatureVector{ModelVariant::positive,
                       {cluster_size_fraction, static_cast<double>(total_entities),
                        is_us ? 1.0 : 0.0, static_cast<double>(total_posts),
                        history_duration_days, static_cast<double>(guess_population)}};
}

FeatureVector FeatureVector::negative(std::int64_t total_entities, std::int64_t total_posts,
                                      double history_duration_days) {
  return FeatureVector{ModelVariant::negative,
                       {static_cast<double>(total_entities), static_cast<double>(total_posts),
                        history_duration_days}};
}

void FeatureVector::check_schema() const {
  const auto expected = feature_names(variant).size();
  if (values.size() != expected) {
    throw Error(ErrorKind::SchemaMismatch,
                std::string(to_string(variant)) + " features need " + std::to_string(expected) +
                    " values, got " + std::to_string(values.size()));
  }
}

json features_to_json(const FeatureVector& f) {
  json values = json::object();
  const auto names = feature_names(f.variant);
  for (std::size_t i = 0; i < names.size() && i < f.values.size(); ++i) {
    values[std::string(names[i])] = f.values[i];
  }
  return json{{"variant", std::string(to_string(f.variant))}, {"values", std::move(values)}};
}

FeatureVector features_from_json(const json& j) {
  try {
    FeatureVector f;
    f.variant = model_variant_from_string(j.at("variant").get<std::string>());
    const auto& values = j.at("values");
    for (auto name : feature_names(f.variant)) {
      f.values.push_back(values.at(std::string(name)).get<double>());
    }
    if (values.size() != f.values.size()) {
      throw Error(ErrorKind::SchemaMismatch, "unexpected extra feature columns");
    }
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("feature record: ") + e.what());
  }
}

}  // namespace geocohort
