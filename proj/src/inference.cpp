#include "geocohort/inference.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "geocohort/errors.hpp"

namespace geocohort {

using nlohmann::json;

std::vector<CoordPoint> pool_coordinates(std::span<const EntityMention> mentions,
                                         const GazetteerIndex& index, bool duplicate_by_count) {
  std::vector<CoordPoint> points;
  for (std::size_t m = 0; m < mentions.size(); ++m) {
    const auto& mention = mentions[m];
    const int copies = duplicate_by_count ? mention.count : 1;
    for (const auto& name : mention.normalized_names) {
      for (CandidateId id : index.lookup_ids(name)) {
        const auto& c = index.candidate(id);
        for (int k = 0; k < copies; ++k) {
          points.push_back(CoordPoint{c.latitude, c.longitude, id, static_cast<std::uint32_t>(m)});
        }
      }
    }
  }
  return points;
}

std::int64_t candidate_mention_count(std::span<const CoordPoint> members, CandidateId candidate,
                                     std::span<const EntityMention> mentions) {
  std::set<std::uint32_t> seen;
  std::int64_t total = 0;
  for (const auto& p : members) {
    if (p.candidate != candidate || !seen.insert(p.mention).second) continue;
    total += mentions[p.mention].count;
  }
  return total;
}

CandidateId cluster_representative(std::span<const CoordPoint> members,
                                   std::span<const EntityMention> mentions,
                                   const GazetteerIndex& index) {
  if (members.empty()) {
    throw Error(ErrorKind::InvalidArgument, "cluster_representative needs at least one member");
  }
  std::map<CandidateId, std::int64_t> counts;
  std::set<std::pair<CandidateId, std::uint32_t>> seen;
  for (const auto& p : members) {
    if (seen.insert({p.candidate, p.mention}).second) counts[p.candidate] += mentions[p.mention].count;
  }
  auto rank_key = [&](CandidateId id) {
    const auto& c = index.candidate(id);
    // Smaller is better in every slot.
    return std::make_tuple(static_cast<int>(c.granularity), -counts.at(id), -c.population,
                           c.gazetteer_id);
  };
  CandidateId best = counts.begin()->first;
  for (const auto& [id, count] : counts) {
    if (rank_key(id) < rank_key(best)) best = id;
  }
  return best;
}

UserStats UserStats::of(const UserHistory& history) {
  return UserStats{history.author, static_cast<std::int64_t>(history.post_count),
                   history.first_post, history.last_post};
}

std::vector<LocationGuess> rank_user_locations(const UserStats& user,
                                               std::span<const EntityMention> mentions,
                                               const GazetteerIndex& index,
                                               const InferenceOptions& options) {
  std::int64_t total_entities = 0;
  for (const auto& m : mentions) total_entities += m.count;

  const auto points = pool_coordinates(mentions, index, options.duplicate_by_count);
  std::vector<LatLon> coords;
  coords.reserve(points.size());
  for (const auto& p : points) coords.push_back({p.latitude, p.longitude});
  const auto labels = dbscan(coords, options.eps, options.min_pts);

  int n_clusters = 0;
  for (int l : labels) n_clusters = std::max(n_clusters, l + 1);
  std::vector<Cluster> clusters(static_cast<std::size_t>(n_clusters));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] != kNoise) clusters[static_cast<std::size_t>(labels[i])].members.push_back(points[i]);
  }

  // Clusters are numbered by first member; a stable sort on size keeps that
  // order among equal sizes.
  std::vector<std::size_t> order(clusters.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    order[k] = k;
    clusters[k].point_count = clusters[k].members.size();
    clusters[k].size_fraction =
        static_cast<double>(clusters[k].members.size()) / static_cast<double>(points.size());
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return clusters[a].size_fraction > clusters[b].size_fraction;
  });

  std::vector<LocationGuess> guesses;
  for (std::size_t k : order) {
    auto& cluster = clusters[k];
    cluster.representative = cluster_representative(cluster.members, mentions, index);
    const auto& c = index.candidate(cluster.representative);
    LocationGuess g;
    g.user = user.author;
    g.candidate = c;
    g.features = FeatureVector::positive(cluster.size_fraction, total_entities,
                                         c.country_code == "US", user.post_count,
                                         user.duration_days(), c.population);
    g.cluster = std::move(cluster);
    guesses.push_back(std::move(g));
  }
  if (guesses.empty()) {
    LocationGuess none;
    none.user = user.author;
    none.features = FeatureVector::negative(total_entities, user.post_count, user.duration_days());
    guesses.push_back(std::move(none));
  }
  return guesses;
}

const LocationGuess& select_best(std::span<const LocationGuess> guesses) {
  if (guesses.empty()) throw Error(ErrorKind::EmptyInput, "no guesses to select from");
  const LocationGuess* best = nullptr;
  for (const auto& g : guesses) {
    if (!g.confidence) {
      throw Error(ErrorKind::InvalidArgument, "guess for '" + g.user + "' is unscored");
    }
    if (!best || *g.confidence > *best->confidence) best = &g;
  }
  return *best;
}

json candidate_to_json(const GeoCandidate& c) {
  json j{{"gazetteer_id", c.gazetteer_id},
         {"name", c.primary_name},
         {"lat", c.latitude},
         {"lon", c.longitude},
         {"country", c.country_code},
         {"population", c.population},
         {"granularity", std::string(to_string(c.granularity))}};
  j["admin1"] = c.admin1 ? json(*c.admin1) : json(nullptr);
  j["city"] = c.city ? json(*c.city) : json(nullptr);
  return j;
}

GeoCandidate candidate_from_json(const json& j) {
  GeoCandidate c;
  c.gazetteer_id = j.at("gazetteer_id").get<std::int64_t>();
  c.primary_name = j.at("name").get<std::string>();
  c.latitude = j.at("lat").get<double>();
  c.longitude = j.at("lon").get<double>();
  c.country_code = j.at("country").get<std::string>();
  c.population = j.at("population").get<std::int64_t>();
  c.granularity = granularity_from_string(j.at("granularity").get<std::string>());
  if (!j.at("admin1").is_null()) c.admin1 = j.at("admin1").get<std::string>();
  if (!j.at("city").is_null()) c.city = j.at("city").get<std::string>();
  return c;
}

json guess_to_json(const LocationGuess& guess, int rank) {
  json j{{"author", guess.user}, {"rank", rank}};
  j["candidate"] = guess.candidate ? candidate_to_json(*guess.candidate) : json(nullptr);
  if (guess.cluster) {
    j["cluster_size_fraction"] = guess.cluster->size_fraction;
    j["cluster_size"] = guess.cluster->point_count;
  } else {
    j["cluster_size_fraction"] = nullptr;
    j["cluster_size"] = 0;
  }
  j["features"] = features_to_json(guess.features);
  j["confidence"] = guess.confidence ? json(*guess.confidence) : json(nullptr);
  return j;
}

LocationGuess guess_from_json(const json& j) {
  try {
    LocationGuess g;
    g.user = j.at("author").get<std::string>();
    if (!j.at("candidate").is_null()) {
      g.candidate = candidate_from_json(j.at("candidate"));
      Cluster cluster;
      cluster.size_fraction = j.at("cluster_size_fraction").get<double>();
      cluster.point_count = j.at("cluster_size").get<std::size_t>();
      g.cluster = std::move(cluster);
    }
    g.features = features_from_json(j.at("features"));
    if (auto it = j.find("confidence"); it != j.end() && !it->is_null()) {
      g.confidence = it->get<double>();
    }
    if (g.has_guess() != (g.features.variant == ModelVariant::positive)) {
      throw Error(ErrorKind::SchemaMismatch, "guess for '" + g.user + "' has mismatched features");
    }
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, std::string("guess record: ") + e.what());
  }
}

}  // namespace geocohort
