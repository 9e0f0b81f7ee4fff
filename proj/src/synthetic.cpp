#include "geocohort/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "geocohort/errors.hpp"
#include "geocohort/pipeline.hpp"
#include "geocohort/rng.hpp"

namespace geocohort {

namespace {

constexpr double kDistractorSpread = 5.0;  // degrees between homonym candidates

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = y - era * 400;
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + doe - 719468;
}

std::int64_t month_start(YearMonth m) { return days_from_civil(m.year, m.month, 1) * 86400; }

/// Uniform timestamp inside `months`.
std::int64_t random_time(Rng& rng, MonthRange months) {
  const auto lo = month_start(months.first);
  const auto hi = month_start(months.last.next()) - 1;
  return rng.between(lo, hi);
}

std::string title_case(std::string_view s) {
  std::string out(s);
  bool start = true;
  for (char& ch : out) {
    if (start && ch >= 'a' && ch <= 'z') ch = static_cast<char>(ch - 'a' + 'A');
    start = ch == ' ' || ch == '-';
  }
  return out;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

double distance(const GeoCandidate& a, const GeoCandidate& b) {
  return std::hypot(a.latitude - b.latitude, a.longitude - b.longitude);
}

const std::vector<std::string> kSubreddits = {"opiates", "opiatesrecovery", "drugs", "heroin"};

const std::vector<std::string> kCityTemplates = {
    "just got back to {} after a long shift",
    "traffic in {} was terrible again today",
    "anyone know a good meeting near downtown {}",
    "{} weather has been strange this week",
    "born and raised in {} and still here",
};

const std::vector<std::string> kStateTemplates = {
    "everything is slow here in {} right now",
    "the clinics in {} keep changing their hours",
};

const std::vector<std::string> kDistractorTemplates = {
    "my cousin once went to {} for a week",
    "saw a documentary about {} last night",
};

// Keyword sentences: "{}" takes a keyword as written in the topic table.
const std::vector<std::string> kKeywordTemplates = {
    "honestly the {} thing is on my mind",
    "talked with my friend about {} today",
    "not sure what to think about {} lately",
};

std::string fill(std::string_view pattern, std::string_view value) {
  std::string out(pattern);
  const auto at = out.find("{}");
  out.replace(at, 2, value);
  return out;
}

std::string filler_sentence(Rng& rng, int words) {
  const auto& vocab = neutral_words();
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += pick(rng, vocab);
  }
  return out;
}

struct Pools {
  std::vector<CandidateId> us_homes;
  std::vector<CandidateId> foreign_homes;
  std::vector<std::string> distractors;
};

Pools build_pools(const GazetteerIndex& index) {
  Pools pools;
  const auto all = index.candidates();
  for (CandidateId id = 0; id < all.size(); ++id) {
    const auto& c = all[id];
    if (c.granularity != Granularity::city) continue;
    if (c.country_code == "US") {
      if (c.admin1) pools.us_homes.push_back(id);
    } else if (index.lookup_ids(c.primary_name).size() == 1) {
      pools.foreign_homes.push_back(id);
    }
  }
  // Homonyms whose candidates are far apart stay noise when named once.
  std::vector<std::string> names;
  for (const auto& c : all) names.push_back(c.primary_name);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  for (const auto& name : names) {
    const auto ids = index.lookup_ids(name);
    if (ids.size() < 2) continue;
    bool spread = true;
    for (std::size_t i = 0; i < ids.size() && spread; ++i) {
      for (std::size_t j = i + 1; j < ids.size() && spread; ++j) {
        spread = distance(index.candidate(ids[i]), index.candidate(ids[j])) > kDistractorSpread;
      }
    }
    if (spread) pools.distractors.push_back(name);
  }
  if (pools.us_homes.empty()) {
    throw Error(ErrorKind::InvalidArgument, "gazetteer has no US cities to plant homes in");
  }
  return pools;
}

}  // namespace

const std::vector<std::string>& neutral_words() {
  static const std::vector<std::string> words = {
      "the",   "a",     "today", "went",  "store",  "with",   "friend", "and",   "then",
      "we",    "talked", "about", "weather", "it",  "was",    "nice",   "after", "lunch",
      "some",  "people", "think", "maybe", "later", "tonight", "coffee", "music", "movie",
      "just",  "really", "good",  "time",  "work",  "dog",    "cat",    "game",  "book",
  };
  return words;
}

SyntheticCohort generate_cohort(const GazetteerIndex& index, const NormalizationTables& tables,
                                const SyntheticOptions& options) {
  if (options.min_posts < 1 || options.max_posts < options.min_posts) {
    throw Error(ErrorKind::InvalidArgument, "synthetic post counts must satisfy 1 <= min <= max");
  }
  const Pools pools = build_pools(index);
  Rng rng(options.seed);
  const YearMonth cutoff{2020, 3};

  std::map<std::string, std::string> abbrev_of;  // state -> postal code
  for (const auto& [code, state] : tables.state_abbrev) abbrev_of[state] = code;
  std::map<std::string, std::vector<std::string>> alias_of;
  for (const auto& [alias, target] : tables.aliases) alias_of[target].push_back(alias);
  std::map<std::string, std::vector<std::string>> subreddits_of;
  for (const auto& [sub, target] : tables.location_subreddits) subreddits_of[target].push_back(sub);

  std::vector<std::string> covid_words, other_words;
  const auto topics = TopicMap::defaults();
  for (const auto& [name, keywords] : topics.topics()) {
    auto& bucket = name == "covid-19" ? covid_words : other_words;
    bucket.insert(bucket.end(), keywords.begin(), keywords.end());
  }

  SyntheticCohort out;
  char author_buf[32];
  for (std::size_t u = 0; u < options.users; ++u) {
    std::snprintf(author_buf, sizeof author_buf, "synth_%05zu", u);
    PlantedUser user{author_buf, std::nullopt, 0};

    // Location sentences this user will scatter over their posts, each as
    // (subreddit override, text).
    std::vector<std::pair<std::string, std::string>> located;
    const double draw = rng.unit();
    if (draw >= options.none_fraction) {
      const bool foreign = draw < options.none_fraction + options.foreign_fraction &&
                           !pools.foreign_homes.empty();
      const auto& home = index.candidate(pick(rng, foreign ? pools.foreign_homes : pools.us_homes));
      user.home = home;
      user.home_mentions = static_cast<int>(rng.between(3, 6));
      for (int k = 0; k < user.home_mentions; ++k) {
        std::string name = title_case(home.primary_name);
        if (auto it = alias_of.find(home.primary_name); it != alias_of.end() && rng.chance(0.3)) {
          name = pick(rng, it->second);
          if (!tables.state_abbrev.contains(name) && rng.chance(0.5)) {
            std::transform(name.begin(), name.end(), name.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
          }
        }
        located.emplace_back("", fill(pick(rng, kCityTemplates), name));
      }
      if (!foreign && home.admin1) {
        const int state_mentions = static_cast<int>(rng.between(1, 2));
        for (int k = 0; k < state_mentions; ++k) {
          std::string state = title_case(*home.admin1);
          if (auto it = abbrev_of.find(*home.admin1); it != abbrev_of.end() && rng.chance(0.5)) {
            state = it->second;
            std::transform(state.begin(), state.end(), state.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
          }
          located.emplace_back("", fill(pick(rng, kStateTemplates), state));
        }
      }
      if (auto it = subreddits_of.find(home.primary_name); it != subreddits_of.end() && rng.chance(0.5)) {
        located.emplace_back(pick(rng, it->second), filler_sentence(rng, 8));
      }
      if (rng.chance(0.3)) {
        // A faraway city named once stays noise.
        for (int attempt = 0; attempt < 8; ++attempt) {
          const auto& other = index.candidate(pick(rng, pools.us_homes));
          if (distance(other, home) > kDistractorSpread &&
              index.lookup_ids(other.primary_name).size() == 1) {
            located.emplace_back("", fill(pick(rng, kDistractorTemplates), title_case(other.primary_name)));
            break;
          }
        }
      }
    }
    if (!pools.distractors.empty() && rng.chance(0.4)) {
      located.emplace_back("", fill(pick(rng, kDistractorTemplates),
                                    title_case(pick(rng, pools.distractors))));
    }

    const int n_posts =
        std::max(static_cast<int>(rng.between(options.min_posts, options.max_posts)),
                 static_cast<int>(located.size()));
    std::vector<std::int64_t> times(static_cast<std::size_t>(n_posts));
    for (auto& t : times) t = random_time(rng, options.months);
    std::sort(times.begin(), times.end());
    // Which posts carry the location sentences.
    std::vector<int> slots(static_cast<std::size_t>(n_posts));
    for (int i = 0; i < n_posts; ++i) slots[static_cast<std::size_t>(i)] = i;
    for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);
    std::vector<int> sentence_at(static_cast<std::size_t>(n_posts), -1);
    for (std::size_t s = 0; s < located.size(); ++s) sentence_at[static_cast<std::size_t>(slots[s])] = static_cast<int>(s);

    for (int i = 0; i < n_posts; ++i) {
      Post post;
      char id_buf[48];
      std::snprintf(id_buf, sizeof id_buf, "%s_p%03d", author_buf, i);
      post.id = id_buf;
      post.author = user.author;
      post.created_utc = times[static_cast<std::size_t>(i)];
      post.subreddit = pick(rng, kSubreddits);
      std::string body = filler_sentence(rng, static_cast<int>(rng.between(4, 10)));
      if (int s = sentence_at[static_cast<std::size_t>(i)]; s >= 0) {
        const auto& [sub, text] = located[static_cast<std::size_t>(s)];
        if (!sub.empty()) post.subreddit = sub;
        body += ". " + text;
      }
      const bool post_covid = YearMonth::from_epoch(post.created_utc) >= cutoff;
      if (rng.chance(post_covid ? 0.25 : 0.05)) {
        body += ". " + fill(pick(rng, kKeywordTemplates), pick(rng, covid_words));
      }
      if (rng.chance(0.3)) body += ". " + fill(pick(rng, kKeywordTemplates), pick(rng, other_words));
      if (rng.chance(0.3)) {
        post.kind = PostKind::submission;
        post.title = filler_sentence(rng, 5);
      }
      post.body = std::move(body);
      out.posts.push_back(std::move(post));
    }

    Annotation a;
    a.author = user.author;
    if (user.home) {
      a.country = user.home->country_code;
      if (user.home->country_code == "US") {
        a.city = user.home->primary_name;
        a.admin1 = user.home->admin1;
      } else {
        a.city = user.home->primary_name;
      }
    } else {
      a.none_findable = true;
    }
    out.annotations.push_back(std::move(a));
    out.users.push_back(std::move(user));
  }
  std::sort(out.posts.begin(), out.posts.end(), [](const Post& a, const Post& b) {
    return std::tie(a.created_utc, a.id) < std::tie(b.created_utc, b.id);
  });
  return out;
}

PlantedTopicPosts generate_topic_posts(std::size_t n, const TopicMap& topics, MonthRange months,
                                       std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> keywords;
  for (const auto& k : topics.all_keywords()) keywords.push_back(k);
  PlantedTopicPosts out;
  for (const auto& [name, _] : topics.topics()) {
    for (YearMonth m : months.months()) out.truth[name][m] = 0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    Post post;
    post.id = "tp" + std::to_string(i);
    post.author = "topic_user_" + std::to_string(i % 37);
    post.subreddit = "opiates";
    post.created_utc = random_time(rng, months);
    const auto month = YearMonth::from_epoch(post.created_utc);
    std::string body = filler_sentence(rng, static_cast<int>(rng.between(3, 8)));
    const auto planted = rng.below(4);
    for (std::size_t k = 0; k < planted; ++k) {
      std::string word = pick(rng, keywords);
      for (std::size_t t : topics.topics_for(word)) ++out.truth[topics.topics()[t].first][month];
      if (rng.chance(0.3)) word = title_case(word);
      body += ' ' + word + ' ' + filler_sentence(rng, 2);
    }
    post.body = std::move(body);
    out.posts.push_back(std::move(post));
  }
  return out;
}

std::string corpus_jsonl(const SyntheticCohort& cohort) {
  std::string out;
  for (const auto& p : cohort.posts) out += serialize_post(p) + '\n';
  return out;
}

std::string annotations_tsv(const SyntheticCohort& cohort) {
  std::string out = "author\tcity\tadmin1\tcountry\tnone_findable\n";
  for (const auto& a : cohort.annotations) {
    out += a.author + '\t' + a.city.value_or("") + '\t' + a.admin1.value_or("") + '\t' +
           a.country.value_or("") + '\t' + (a.none_findable ? "1" : "0") + '\n';
  }
  return out;
}

void write_cohort(const SyntheticCohort& cohort, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "corpus.jsonl", corpus_jsonl(cohort));
  write_file_atomic(dir / "annotations.tsv", annotations_tsv(cohort));
}

}  // namespace geocohort
