#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geocohort/corpus.hpp"
#include "geocohort/gazetteer.hpp"
#include "geocohort/tables.hpp"

namespace geocohort {

enum class ExtractionMode { gazetteer_scan, pretagged };

std::string_view to_string(ExtractionMode mode);
ExtractionMode extraction_mode_from_string(std::string_view s);

/// Declaration order is the precedence used when one surface arrives from
/// several sources.
enum class MentionSource { text, pretagged, subreddit };

std::string_view to_string(MentionSource source);
MentionSource mention_source_from_string(std::string_view s);

struct EntityMention {
  std::string surface;                        // lowercase
  std::vector<std::string> normalized_names;  // post-expansion, never empty
  MentionSource source = MentionSource::text;
  int count = 1;

  bool operator==(const EntityMention&) const = default;
};

nlohmann::json mention_to_json(const EntityMention& m);
EntityMention mention_from_json(const nlohmann::json& j);

struct RawEntity {
  std::string surface;     // lowercase
  bool all_upper = false;  // original span was fully uppercase
};

/// Longest n-gram window used by the gazetteer scan.
inline constexpr std::size_t kMaxNgram = 3;

/// Scans title and body for leftmost-longest n-grams (n <= 3) that name a
/// gazetteer entry, an alias key, or an uppercase state abbreviation; or, in
/// pretagged mode, returns the supplied spans lowercased.
/// Throws Error(MissingPretags) in pretagged mode when the post has none.
std::vector<RawEntity> extract_raw_entities(const Post& post, ExtractionMode mode,
                                            const GazetteerIndex& index,
                                            const NormalizationTables& tables);

/// Blocklist, uppercase-guarded abbreviation expansion, alias substitution,
/// large-state region expansion, then a gazetteer existence filter.
std::vector<std::string> normalize_and_expand(std::string_view surface,
                                              const NormalizationTables& tables,
                                              const GazetteerIndex& index,
                                              bool original_all_upper);

std::optional<EntityMention> subreddit_entity(const Post& post, const NormalizationTables& tables,
                                              const GazetteerIndex& index);

/// Per-user mentions deduplicated by surface, sorted by surface.
std::vector<EntityMention> user_mentions(const UserHistory& history, ExtractionMode mode,
                                         const NormalizationTables& tables,
                                         const GazetteerIndex& index);

}  // namespace geocohort
