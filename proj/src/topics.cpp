#include "geocohort/topics.hpp"

#include <fstream>

#include "geocohort/errors.hpp"
#include "geocohort/text.hpp"

namespace geocohort {

TopicMap::TopicMap(std::vector<std::pair<std::string, std::set<std::string>>> topics)
    : topics_(std::move(topics)) {
  std::set<std::string> names;
  for (std::size_t t = 0; t < topics_.size(); ++t) {
    const auto& [name, keywords] = topics_[t];
    if (!names.insert(name).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate topic '" + name + "'");
    }
    if (keywords.empty()) throw Error(ErrorKind::InvalidArgument, "topic '" + name + "' has no keywords");
    for (const auto& k : keywords) by_lemma_[k].push_back(t);
  }
}

TopicMap TopicMap::defaults() {
  return TopicMap({
      {"covid-19", {"covid", "virus", "expose", "pandemic", "quarantine", "corona", "vaccination"}},
      {"crime", {"arrest", "bust", "narc", "nark"}},
      {"drug", {"heroin", "oxy", "dope", "fent", "stimulant", "diacetylmorphine"}},
      {"government money", {"unemployment", "irs", "stimulus"}},
      {"money",
       {"money", "pay", "spend", "account", "bill", "bank", "broke", "fund", "payment", "finance",
        "wage", "salary", "bankrupt", "skint"}},
      {"narcan", {"narcan", "naloxone"}},
      {"overdose and death", {"die", "overdose", "death", "dying", "o.d."}},
      {"physical",
       {"pain", "withdrawal", "tolerance", "addict", "sick", "junkie", "hurt", "mental", "health",
        "ill", "hook", "withdraw", "puke", "suicide", "vomit", "nauseous", "dopesick", "junky"}},
      {"recovery prescriptions", {"methadone", "suboxone", "buprenorphine", "subutex"}},
  });
}

std::span<const std::size_t> TopicMap::topics_for(std::string_view lemma) const {
  auto it = by_lemma_.find(std::string(lemma));
  if (it == by_lemma_.end()) return {};
  return it->second;
}

std::set<std::string> TopicMap::all_keywords() const {
  std::set<std::string> out;
  for (const auto& [name, keywords] : topics_) out.insert(keywords.begin(), keywords.end());
  return out;
}

std::map<std::string, MonthlyVolume> count_topic_mentions(std::span<const Post> posts,
                                                          const TopicMap& topics,
                                                          MonthRange range,
                                                          const Lemmatizer& lemmatizer) {
  if (range.last < range.first) {
    throw Error(ErrorKind::InvalidArgument, "month range start is after its end");
  }
  std::vector<MonthlyVolume> counts(topics.topics().size());
  for (auto& c : counts) {
    for (YearMonth m : range.months()) c[m] = 0;
  }
  auto count_text = [&](std::string_view text, YearMonth month) {
    for (const auto& token : tokenize(text)) {
      for (std::size_t t : topics.topics_for(lemmatizer.lemmatize(token.lower))) ++counts[t][month];
    }
  };
  for (const auto& post : posts) {
    const auto month = YearMonth::from_epoch(post.created_utc);
    if (!range.contains(month)) continue;
    if (post.title) count_text(*post.title, month);
    count_text(post.body, month);
  }
  std::map<std::string, MonthlyVolume> out;
  for (std::size_t t = 0; t < counts.size(); ++t) out[topics.topics()[t].first] = std::move(counts[t]);
  return out;
}

std::map<YearMonth, double> adjusted_counts(const MonthlyVolume& raw, const MonthlyVolume& volume,
                                            double scale) {
  std::map<YearMonth, double> out;
  for (const auto& [month, hits] : raw) {
    auto it = volume.find(month);
    if (it == volume.end()) {
      throw Error(ErrorKind::InvalidArgument, "no volume for month " + month.to_string());
    }
    if (it->second == 0) continue;
    out[month] = scale * static_cast<double>(hits) / static_cast<double>(it->second);
  }
  return out;
}

CohortSplit split_by_cohort(std::span<const LocationGuess> users,
                            const std::map<std::string, double>& vote_shares, double threshold) {
  CohortSplit split;
  for (const auto& u : users) {
    if (!u.has_guess() || u.candidate->country_code != "US" || !u.candidate->admin1) {
      split.excluded.push_back(u.user);
      continue;
    }
    auto it = vote_shares.find(*u.candidate->admin1);
    if (it == vote_shares.end()) {
      throw Error(ErrorKind::MissingState, "no vote share for state '" + *u.candidate->admin1 + "'");
    }
    (it->second > threshold ? split.red : split.blue).push_back(u);
  }
  return split;
}

std::map<std::string, double> load_vote_shares(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  std::map<std::string, double> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const char sep = text.find('\t') != std::string::npos ? '\t' : ',';
    const auto cols = split(text, sep);
    if (cols.size() != 2) {
      throw Error(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(n) + ": expected two columns");
    }
    const auto value = trim(cols[1]);
    char* end = nullptr;
    const double share = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size()) {
      if (n == 1) continue;  // header row
      throw Error(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(n) + ": bad share");
    }
    if (share < 0.0 || share > 1.0) {
      throw Error(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(n) + ": share outside [0, 1]");
    }
    out[to_lower_ascii(trim(cols[0]))] = share;
  }
  return out;
}

}  // namespace geocohort
