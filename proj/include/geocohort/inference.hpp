#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "geocohort/corpus.hpp"
#include "geocohort/dbscan.hpp"
#include "geocohort/entities.hpp"
#include "geocohort/features.hpp"
#include "geocohort/gazetteer.hpp"

namespace geocohort {

/// One pooled geocode. `candidate` indexes the gazetteer and `mention`
/// indexes the user's mention list.
struct CoordPoint {
  double latitude = 0.0;
  double longitude = 0.0;
  CandidateId candidate = 0;
  std::uint32_t mention = 0;

  bool operator==(const CoordPoint&) const = default;
};

struct InferenceOptions {
  double eps = 2.5;
  int min_pts = 2;
  /// A mention counted k times contributes its geocodes k times.
  bool duplicate_by_count = true;
};

/// One point per (normalized name, candidate) pair, repeated `count` times
/// when duplication is enabled.
std::vector<CoordPoint> pool_coordinates(std::span<const EntityMention> mentions,
                                         const GazetteerIndex& index,
                                         bool duplicate_by_count = true);

/// Sum of mention counts behind each distinct candidate among `members`;
/// a mention contributes once per candidate regardless of duplication.
std::int64_t candidate_mention_count(std::span<const CoordPoint> members, CandidateId candidate,
                                     std::span<const EntityMention> mentions);

/// Orders distinct candidates by granularity (city first), user mention
/// count, population, then gazetteer id, and returns the first.
CandidateId cluster_representative(std::span<const CoordPoint> members,
                                   std::span<const EntityMention> mentions,
                                   const GazetteerIndex& index);

struct Cluster {
  std::vector<CoordPoint> members;  // empty when restored from a record
  std::size_t point_count = 0;
  CandidateId representative = 0;
  double size_fraction = 0.0;
};

/// Per-user facts the features need beyond the mentions themselves.
struct UserStats {
  std::string author;
  std::int64_t post_count = 0;
  std::int64_t first_post = 0;
  std::int64_t last_post = 0;

  static UserStats of(const UserHistory& history);
  double duration_days() const { return static_cast<double>(last_post - first_post) / 86400.0; }
  bool operator==(const UserStats&) const = default;
};

struct LocationGuess {
  std::string user;
  std::optional<GeoCandidate> candidate;  // absent for a no-guess record
  std::optional<Cluster> cluster;
  FeatureVector features;
  std::optional<double> confidence;

  bool has_guess() const { return candidate.has_value(); }
};

/// One unscored guess per cluster ordered by size fraction (descending), or
/// a single no-guess record carrying negative-model features.
std::vector<LocationGuess> rank_user_locations(const UserStats& user,
                                               std::span<const EntityMention> mentions,
                                               const GazetteerIndex& index,
                                               const InferenceOptions& options = {});

inline std::vector<LocationGuess> rank_user_locations(const UserHistory& history,
                                                      std::span<const EntityMention> mentions,
                                                      const GazetteerIndex& index,
                                                      const InferenceOptions& options = {}) {
  return rank_user_locations(UserStats::of(history), mentions, index, options);
}

/// Highest-confidence guess; earlier (larger cluster) wins ties. All guesses
/// must be scored.
const LocationGuess& select_best(std::span<const LocationGuess> guesses);

/// Flat record: author, rank, candidate fields, cluster size, features,
/// optional confidence.
nlohmann::json guess_to_json(const LocationGuess& guess, int rank);
/// Inverse of guess_to_json; cluster members are not serialized, so the
/// restored cluster only carries its size fraction and representative.
LocationGuess guess_from_json(const nlohmann::json& j);

nlohmann::json candidate_to_json(const GeoCandidate& c);
GeoCandidate candidate_from_json(const nlohmann::json& j);

}  // namespace geocohort
