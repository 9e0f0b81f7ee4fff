#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "geocohort/corpus.hpp"
#include "geocohort/evaluation.hpp"
#include "geocohort/gazetteer.hpp"
#include "geocohort/tables.hpp"
#include "geocohort/topics.hpp"

namespace geocohort {

struct SyntheticOptions {
  std::size_t users = 200;
  int min_posts = 20;
  int max_posts = 40;
  double none_fraction = 0.12;     // users who never name a place
  double foreign_fraction = 0.06;  // homes outside the US
  MonthRange months{{2019, 1}, {2021, 12}};
  std::uint64_t seed = 1;
};

/// Planted home for one synthetic user; `home` is absent for users with no
/// findable location.
struct PlantedUser {
  std::string author;
  std::optional<GeoCandidate> home;
  int home_mentions = 0;
};

struct SyntheticCohort {
  std::vector<Post> posts;  // sorted by (created_utc, id)
  std::vector<PlantedUser> users;
  std::vector<Annotation> annotations;  // one per user, sorted by author
};

/// Users name their home city several times and their state once or twice
/// (sometimes as an uppercase postal code), and may mention a homonym or a
/// faraway city once as a distractor. Filler text carries topic keywords
/// with a step up in covid talk from March 2020. Homes are drawn from the
/// index's city entries, so `index` must hold US cities with states.
SyntheticCohort generate_cohort(const GazetteerIndex& index, const NormalizationTables& tables,
                                const SyntheticOptions& options);

/// One serialized post per line.
std::string corpus_jsonl(const SyntheticCohort& cohort);
/// Annotation rows in the format load_annotations reads.
std::string annotations_tsv(const SyntheticCohort& cohort);
/// Writes corpus.jsonl and annotations.tsv into `dir`, creating it.
void write_cohort(const SyntheticCohort& cohort, const std::filesystem::path& dir);

struct PlantedTopicPosts {
  std::vector<Post> posts;
  std::map<std::string, MonthlyVolume> truth;  // topic -> month -> planted hits
};

/// `n` posts of neutral filler with zero to three keywords each, spread
/// uniformly over `months`. Ground truth counts every planted keyword once
/// for each topic listing it.
PlantedTopicPosts generate_topic_posts(std::size_t n, const TopicMap& topics, MonthRange months,
                                       std::uint64_t seed);

/// Words the generators use as filler; none of them names a place or
/// lemmatizes to a topic keyword.
const std::vector<std::string>& neutral_words();

}  // namespace geocohort
