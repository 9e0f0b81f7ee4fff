#include "geocohort/entities.hpp"

#include <algorithm>
#include <map>

#include "geocohort/errors.hpp"
#include "geocohort/text.hpp"

namespace geocohort {

using nlohmann::json;

std::string_view to_string(ExtractionMode mode) {
  return mode == ExtractionMode::pretagged ? "pretagged" : "gazetteer_scan";
}

ExtractionMode extraction_mode_from_string(std::string_view s) {
  if (s == "gazetteer_scan") return ExtractionMode::gazetteer_scan;
  if (s == "pretagged") return ExtractionMode::pretagged;
  throw Error(ErrorKind::InvalidArgument, "unknown extraction mode '" + std::string(s) + "'");
}

std::string_view to_string(MentionSource source) {
  switch (source) {
    case MentionSource::text: return "text";
    case MentionSource::pretagged: return "pretagged";
    case MentionSource::subreddit: return "subreddit";
  }
  return "text";
}

MentionSource mention_source_from_string(std::string_view s) {
  if (s == "text") return MentionSource::text;
  if (s == "pretagged") return MentionSource::pretagged;
  if (s == "subreddit") return MentionSource::subreddit;
  throw Error(ErrorKind::InvalidArgument, "unknown mention source '" + std::string(s) + "'");
}

json mention_to_json(const EntityMention& m) {
  return json{{"surface", m.surface},
              {"normalized_names", m.normalized_names},
              {"source", std::string(to_string(m.source))},
              {"count", m.count}};
}

EntityMention mention_from_json(const json& j) {
  try {
    EntityMention m;
    m.surface = j.at("surface").get<std::string>();
    m.normalized_names = j.at("normalized_names").get<std::vector<std::string>>();
    m.source = mention_source_from_string(j.at("source").get<std::string>());
    m.count = j.at("count").get<int>();
    if (m.count < 1 || m.normalized_names.empty()) {
      throw Error(ErrorKind::MalformedRecord, "mention '" + m.surface + "' is empty");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, std::string("mention record: ") + e.what());
  }
}

namespace {

bool is_scan_hit(const std::string& lower, bool all_upper, const GazetteerIndex& index,
                 const NormalizationTables& tables) {
  if (index.contains(lower) || tables.aliases.contains(lower)) return true;
  return all_upper && tables.state_abbrev.contains(lower);
}

void scan_text(std::string_view text, const GazetteerIndex& index,
               const NormalizationTables& tables, std::vector<RawEntity>& out) {
  const auto tokens = tokenize(text);
  std::size_t i = 0;
  std::string gram;
  while (i < tokens.size()) {
    std::size_t matched = 0;
    bool upper = true;
    for (std::size_t n = std::min(kMaxNgram, tokens.size() - i); n >= 1; --n) {
      gram = tokens[i].lower;
      upper = tokens[i].all_upper;
      for (std::size_t k = 1; k < n; ++k) {
        gram += ' ';
        gram += tokens[i + k].lower;
        upper = upper && tokens[i + k].all_upper;
      }
      if (is_scan_hit(gram, upper, index, tables)) {
        matched = n;
        break;
      }
    }
    if (matched == 0) {
      ++i;
      continue;
    }
    out.push_back(RawEntity{gram, upper});
    i += matched;
  }
}

}  // namespace

std::vector<RawEntity> extract_raw_entities(const Post& post, ExtractionMode mode,
                                            const GazetteerIndex& index,
                                            const NormalizationTables& tables) {
  std::vector<RawEntity> out;
  if (mode == ExtractionMode::pretagged) {
    if (!post.pretagged_entities) {
      throw Error(ErrorKind::MissingPretags, "post " + post.id + " has no pretagged entities");
    }
    for (const auto& span : *post.pretagged_entities) {
      const auto t = trim(span);
      if (t.empty()) continue;
      out.push_back(RawEntity{to_lower_ascii(t), is_all_upper(t)});
    }
    return out;
  }
  if (post.title) scan_text(*post.title, index, tables, out);
  scan_text(post.body, index, tables, out);
  return out;
}

std::vector<std::string> normalize_and_expand(std::string_view surface,
                                              const NormalizationTables& tables,
                                              const GazetteerIndex& index,
                                              bool original_all_upper) {
  std::string name(surface);
  if (tables.blocklist.contains(name)) return {};

  if (original_all_upper) {
    if (auto it = tables.state_abbrev.find(name); it != tables.state_abbrev.end()) {
      name = it->second;
    }
  }
  if (auto it = tables.aliases.find(name); it != tables.aliases.end()) name = it->second;

  std::vector<std::string> expanded;
  if (const auto* regions = tables.regions_for(name)) {
    expanded = *regions;
  } else {
    expanded.push_back(std::move(name));
  }
  std::erase_if(expanded, [&](const std::string& n) { return !index.contains(n); });
  return expanded;
}

std::optional<EntityMention> subreddit_entity(const Post& post, const NormalizationTables& tables,
                                              const GazetteerIndex& index) {
  auto it = tables.location_subreddits.find(post.subreddit);
  if (it == tables.location_subreddits.end()) return std::nullopt;
  auto names = normalize_and_expand(it->second, tables, index, false);
  if (names.empty()) return std::nullopt;
  return EntityMention{it->second, std::move(names), MentionSource::subreddit, 1};
}

std::vector<EntityMention> user_mentions(const UserHistory& history, ExtractionMode mode,
                                         const NormalizationTables& tables,
                                         const GazetteerIndex& index) {
  std::map<std::string, EntityMention> by_surface;
  auto add = [&](EntityMention m) {
    auto [it, inserted] = by_surface.try_emplace(m.surface, m);
    if (inserted) return;
    it->second.count += m.count;
    it->second.source = std::min(it->second.source, m.source);
    // Only the uppercase guard can make one surface expand two ways ("MA" vs
    // "ma"); the union is sorted so the result does not depend on post order.
    if (it->second.normalized_names != m.normalized_names) {
      auto& names = it->second.normalized_names;
      for (auto& n : m.normalized_names) {
        if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(std::move(n));
      }
      std::sort(names.begin(), names.end());
    }
  };

  const auto text_source =
      mode == ExtractionMode::pretagged ? MentionSource::pretagged : MentionSource::text;
  for (const auto& post : history.posts) {
    for (auto& raw : extract_raw_entities(post, mode, index, tables)) {
      auto names = normalize_and_expand(raw.surface, tables, index, raw.all_upper);
      if (names.empty()) continue;
      add(EntityMention{std::move(raw.surface), std::move(names), text_source, 1});
    }
    if (auto m = subreddit_entity(post, tables, index)) add(std::move(*m));
  }

  std::vector<EntityMention> out;
  out.reserve(by_surface.size());
  for (auto& [surface, m] : by_surface) out.push_back(std::move(m));
  return out;
}

}  // namespace geocohort
