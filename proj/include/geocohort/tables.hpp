#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace geocohort {

class GazetteerIndex;

/// Static entity normalization tables. The defaults carry the blocklist,
/// nickname aliases, US postal abbreviations and large-state region
/// expansions; all of them can be overridden from a JSON config file.
struct NormalizationTables {
  std::set<std::string> blocklist;
  std::map<std::string, std::string> aliases;
  std::map<std::string, std::string> state_abbrev;  // "ma" -> "massachusetts"
  // Ordered pairs so expansion output keeps table order.
  std::vector<std::pair<std::string, std::vector<std::string>>> large_state_regions;
  std::map<std::string, std::string> location_subreddits;

  static NormalizationTables defaults();
  static NormalizationTables from_json(const nlohmann::json& j);
  static NormalizationTables load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const std::vector<std::string>* regions_for(const std::string& state) const;
};

/// Two-column (subreddit, place name) file, tab or comma separated.
std::map<std::string, std::string> load_location_subreddits(const std::filesystem::path& path);

/// Human-readable problems: alias targets and region names with no
/// gazetteer entry.
std::vector<std::string> validate_tables(const NormalizationTables& tables,
                                         const GazetteerIndex& index);

}  // namespace geocohort
