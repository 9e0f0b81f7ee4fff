#include "geocohort/tables.hpp"

#include <fstream>

#include "geocohort/errors.hpp"
#include "geocohort/gazetteer.hpp"
#include "geocohort/text.hpp"

namespace geocohort {

using nlohmann::json;

NormalizationTables NormalizationTables::defaults() {
  NormalizationTables t;
  t.blocklist = {"china", "russia", "turkey", "op"};
  t.aliases = {
      {"vegas", "las vegas"},
      {"nyc", "new york city"},
      {"l.a.", "los angeles"},
  };
  for (const auto& [code, name] : us_admin1_names()) {
    t.state_abbrev.emplace(to_lower_ascii(code.substr(3)), name);
  }
  t.large_state_regions = {
      {"california", {"central california", "southern california", "northern california"}},
      {"texas", {"el paso", "houston", "dallas"}},
      {"florida", {"tallahassee", "miami"}},
      {"alaska", {"juneau", "anchorage", "fairbanks"}},
  };
  t.location_subreddits = {
      {"boston", "boston"},           {"nyc", "new york city"},
      {"newyorkcity", "new york city"}, {"losangeles", "los angeles"},
      {"chicago", "chicago"},         {"seattle", "seattle"},
      {"philadelphia", "philadelphia"}, {"baltimore", "baltimore"},
      {"pittsburgh", "pittsburgh"},   {"denver", "denver"},
      {"austin", "austin"},           {"houston", "houston"},
      {"dallas", "dallas"},           {"atlanta", "atlanta"},
      {"portland", "portland"},       {"sanfrancisco", "san francisco"},
      {"sandiego", "san diego"},      {"phoenix", "phoenix"},
      {"detroit", "detroit"},         {"cleveland", "cleveland"},
      {"columbus", "columbus"},       {"cincinnati", "cincinnati"},
      {"miami", "miami"},             {"orlando", "orlando"},
      {"vegas", "las vegas"},         {"lasvegas", "las vegas"},
      {"massachusetts", "massachusetts"}, {"ohio", "ohio"},
      {"texas", "texas"},             {"california", "california"},
      {"florida", "florida"},         {"newjersey", "new jersey"},
      {"london", "london"},           {"toronto", "toronto"},
      {"vancouver", "vancouver"},     {"melbourne", "melbourne"},
      {"sydney", "sydney"},           {"ireland", "ireland"},
      {"canada", "canada"},           {"unitedkingdom", "united kingdom"},
      {"australia", "australia"},
  };
  return t;
}

NormalizationTables NormalizationTables::from_json(const json& j) {
  NormalizationTables t = defaults();
  try {
    if (j.contains("blocklist")) {
      t.blocklist.clear();
      for (const auto& s : j.at("blocklist")) t.blocklist.insert(to_lower_ascii(s.get<std::string>()));
    }
    auto read_map = [&](const char* key, std::map<std::string, std::string>& dst) {
      if (!j.contains(key)) return;
      dst.clear();
      for (const auto& [k, v] : j.at(key).items()) {
        dst[to_lower_ascii(k)] = to_lower_ascii(v.get<std::string>());
      }
    };
    read_map("aliases", t.aliases);
    read_map("state_abbrev", t.state_abbrev);
    read_map("location_subreddits", t.location_subreddits);
    if (j.contains("large_state_regions")) {
      // A list of {"state": ..., "regions": [...]} keeps order explicit.
      t.large_state_regions.clear();
      for (const auto& row : j.at("large_state_regions")) {
        std::vector<std::string> regions;
        for (const auto& r : row.at("regions")) regions.push_back(to_lower_ascii(r.get<std::string>()));
        t.large_state_regions.emplace_back(to_lower_ascii(row.at("state").get<std::string>()),
                                           std::move(regions));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("normalization tables: ") + e.what());
  }
  return t;
}

NormalizationTables NormalizationTables::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorKind::ConfigInvalid, "normalization tables are not a JSON object: " + path.string());
  }
  return from_json(j);
}

json NormalizationTables::to_json() const {
  json regions = json::array();
  for (const auto& [state, names] : large_state_regions) {
    regions.push_back(json{{"state", state}, {"regions", names}});
  }
  return json{{"blocklist", blocklist},
              {"aliases", aliases},
              {"state_abbrev", state_abbrev},
              {"large_state_regions", std::move(regions)},
              {"location_subreddits", location_subreddits}};
}

const std::vector<std::string>* NormalizationTables::regions_for(const std::string& state) const {
  for (const auto& [name, regions] : large_state_regions) {
    if (name == state) return &regions;
  }
  return nullptr;
}

std::map<std::string, std::string> load_location_subreddits(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const char sep = text.find('\t') != std::string::npos ? '\t' : ',';
    const auto cols = split(text, sep);
    if (cols.size() != 2) {
      throw Error(ErrorKind::ConfigInvalid,
                  path.string() + ":" + std::to_string(n) + ": expected two columns");
    }
    auto sub = to_lower_ascii(trim(cols[0]));
    if (sub.starts_with("r/")) sub.erase(0, 2);
    out[sub] = to_lower_ascii(trim(cols[1]));
  }
  return out;
}

std::vector<std::string> validate_tables(const NormalizationTables& tables,
                                         const GazetteerIndex& index) {
  std::vector<std::string> problems;
  for (const auto& [nick, proper] : tables.aliases) {
    if (!index.contains(proper)) {
      problems.push_back("alias '" + nick + "' -> '" + proper + "' has no gazetteer entry");
    }
  }
  for (const auto& [state, regions] : tables.large_state_regions) {
    for (const auto& r : regions) {
      if (!index.contains(r)) {
        problems.push_back("region '" + r + "' of '" + state + "' has no gazetteer entry");
      }
    }
  }
  return problems;
}

}  // namespace geocohort
