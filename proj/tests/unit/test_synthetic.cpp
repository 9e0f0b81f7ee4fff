#include <doctest.h>

#include <algorithm>
#include <set>

#include "geocohort/entities.hpp"
#include "geocohort/synthetic.hpp"
#include "helpers.hpp"

using namespace geocohort;
using testing::fixture_gazetteer;

namespace {

const NormalizationTables& tables() {
  static const auto t = NormalizationTables::defaults();
  return t;
}

const SyntheticCohort& cohort() {
  static const auto c = generate_cohort(fixture_gazetteer(), tables(), SyntheticOptions{});
  return c;
}

}  // namespace

TEST_CASE("cohort shape") {
  const auto& c = cohort();
  CHECK(c.users.size() == 200);
  CHECK(c.annotations.size() == 200);
  CHECK(std::is_sorted(c.annotations.begin(), c.annotations.end(),
                       [](auto& a, auto& b) { return a.author < b.author; }));
  CHECK(std::is_sorted(c.posts.begin(), c.posts.end(), [](const Post& a, const Post& b) {
    return std::tie(a.created_utc, a.id) < std::tie(b.created_utc, b.id);
  }));
  const auto histories = group_by_user(c.posts);
  CHECK(histories.size() == 200);
  const SyntheticOptions o;
  for (const auto& h : histories) {
    CHECK(h.post_count >= static_cast<std::size_t>(o.min_posts));
    CHECK(h.post_count <= static_cast<std::size_t>(o.max_posts));
  }
  for (const auto& p : c.posts) {
    const auto m = YearMonth::from_epoch(p.created_utc);
    CHECK(o.months.first <= m);
    CHECK(m <= o.months.last);
  }
  std::set<std::string> ids;
  for (const auto& p : c.posts) ids.insert(p.id);
  CHECK(ids.size() == c.posts.size());
}

TEST_CASE("annotations agree with planted homes") {
  const auto& c = cohort();
  std::size_t none = 0, foreign = 0;
  for (std::size_t i = 0; i < c.users.size(); ++i) {
    const auto& u = c.users[i];
    const auto& a = c.annotations[i];
    REQUIRE(u.author == a.author);
    CHECK_NOTHROW(a.check());
    if (!u.home) {
      ++none;
      CHECK(a.none_findable);
      continue;
    }
    CHECK(a.country == std::optional<std::string>(u.home->country_code));
    CHECK(u.home_mentions >= 3);
    if (u.home->country_code == "US") {
      CHECK(a.city == u.home->city);
      CHECK(a.admin1 == u.home->admin1);
    } else {
      ++foreign;
    }
  }
  // Fractions are drawn per user; allow sampling slack.
  CHECK(none >= 10);
  CHECK(none <= 40);
  CHECK(foreign >= 3);
  CHECK(foreign <= 25);
}

TEST_CASE("users without a home name at most one ambiguous place, once") {
  const auto& c = cohort();
  std::set<std::string> homeless;
  for (const auto& u : c.users) {
    if (!u.home) homeless.insert(u.author);
  }
  for (const auto& h : group_by_user(c.posts)) {
    if (!homeless.contains(h.author)) continue;
    const auto ms = user_mentions(h, ExtractionMode::gazetteer_scan, tables(), fixture_gazetteer());
    REQUIRE(ms.size() <= 1);
    for (const auto& m : ms) {
      CHECK(m.count == 1);
      REQUIRE(m.normalized_names.size() == 1);
      CHECK(fixture_gazetteer().lookup(m.normalized_names[0]).size() >= 2);
    }
  }
}

TEST_CASE("the home is the most mentioned place") {
  const auto& c = cohort();
  std::map<std::string, const PlantedUser*> by_author;
  for (const auto& u : c.users) by_author[u.author] = &u;
  for (const auto& h : group_by_user(c.posts)) {
    const auto& u = *by_author.at(h.author);
    if (!u.home) continue;
    const auto ms = user_mentions(h, ExtractionMode::gazetteer_scan, tables(), fixture_gazetteer());
    int home_count = 0, other_max = 0;
    for (const auto& m : ms) {
      const bool names_home = std::any_of(m.normalized_names.begin(), m.normalized_names.end(), [&](auto& n) {
        const auto hits = fixture_gazetteer().lookup(n);
        return std::find(hits.begin(), hits.end(), *u.home) != hits.end();
      });
      if (names_home) {
        home_count += m.count;
      } else {
        other_max = std::max(other_max, m.count);
      }
    }
    CHECK(home_count >= u.home_mentions);
    CHECK(home_count > other_max);
  }
}

TEST_CASE("generation is deterministic per seed") {
  const auto again = generate_cohort(fixture_gazetteer(), tables(), SyntheticOptions{});
  CHECK(again.posts == cohort().posts);
  CHECK(corpus_jsonl(again) == corpus_jsonl(cohort()));
  CHECK(annotations_tsv(again) == annotations_tsv(cohort()));
  SyntheticOptions other;
  other.seed = 2;
  CHECK_FALSE(generate_cohort(fixture_gazetteer(), tables(), other).posts == cohort().posts);
}

TEST_CASE("written cohorts read back") {
  const auto dir = testing::scratch_dir("synthetic");
  write_cohort(cohort(), dir);
  IngestReport report;
  const auto posts = read_posts_file(dir / "corpus.jsonl", true, report);
  CHECK(posts == cohort().posts);
  const auto annotations = load_annotations(dir / "annotations.tsv", tables());
  REQUIRE(annotations.size() == cohort().annotations.size());
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    CHECK(annotations[i].author == cohort().annotations[i].author);
    CHECK(annotations[i].city == cohort().annotations[i].city);
    CHECK(annotations[i].none_findable == cohort().annotations[i].none_findable);
  }
}

TEST_CASE("filler words are inert") {
  const Lemmatizer lemmatizer;
  const auto keywords = TopicMap::defaults().all_keywords();
  for (const auto& w : neutral_words()) {
    CHECK_FALSE(fixture_gazetteer().contains(w));
    CHECK_FALSE(tables().aliases.contains(w));
    CHECK_FALSE(keywords.contains(lemmatizer.lemmatize(w)));
  }
}
