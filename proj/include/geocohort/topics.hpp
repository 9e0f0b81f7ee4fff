#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geocohort/corpus.hpp"
#include "geocohort/inference.hpp"

namespace geocohort {

/// Topic name -> keyword lemmas, kept in insertion order.
class TopicMap {
 public:
  TopicMap() = default;
  explicit TopicMap(std::vector<std::pair<std::string, std::set<std::string>>> topics);

  /// The nine opioid-discussion topics and their keywords.
  static TopicMap defaults();

  const std::vector<std::pair<std::string, std::set<std::string>>>& topics() const { return topics_; }
  /// Topics containing `lemma`; empty when none.
  std::span<const std::size_t> topics_for(std::string_view lemma) const;
  std::set<std::string> all_keywords() const;

 private:
  std::vector<std::pair<std::string, std::set<std::string>>> topics_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_lemma_;
};

/// Rule-based English lemmatizer. Known lemmas (the topic keywords by
/// default) are fixed points and are preferred among suffix-stripping
/// candidates; an exception table covers irregular forms.
class Lemmatizer {
 public:
  explicit Lemmatizer(std::set<std::string> known_lemmas = TopicMap::defaults().all_keywords());

  std::string lemmatize(std::string_view token) const;

  const std::map<std::string, std::string>& exceptions() const { return exceptions_; }

 private:
  std::set<std::string> known_;
  std::map<std::string, std::string> exceptions_;
};

/// Raw keyword hits per month over `range`, keyed by topic name.
std::map<std::string, MonthlyVolume> count_topic_mentions(std::span<const Post> posts,
                                                          const TopicMap& topics,
                                                          MonthRange range,
                                                          const Lemmatizer& lemmatizer);

struct TopicSeries {
  std::string topic;
  std::string cohort;
  std::map<YearMonth, double> points;  // months with zero volume are absent
};

/// scale * raw / volume per month; months with zero volume are left out.
/// Throws Error(InvalidArgument) when raw covers a month volume lacks.
std::map<YearMonth, double> adjusted_counts(const MonthlyVolume& raw, const MonthlyVolume& volume,
                                            double scale = 100000.0);

struct CohortSplit {
  std::vector<LocationGuess> red;   // vote share > threshold
  std::vector<LocationGuess> blue;  // vote share <= threshold
  std::vector<std::string> excluded;  // non-US or unresolved users
};

/// Partitions US users with a resolved state by their state's vote share.
/// Throws Error(MissingState) for a state absent from `vote_shares`.
CohortSplit split_by_cohort(std::span<const LocationGuess> users,
                            const std::map<std::string, double>& vote_shares,
                            double threshold = 0.5);

/// Two-column (state, share in [0, 1]) file.
std::map<std::string, double> load_vote_shares(const std::filesystem::path& path);

}  // namespace geocohort
