#include "geocohort/gazetteer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>

#include "geocohort/errors.hpp"
#include "geocohort/text.hpp"

namespace geocohort {

namespace {

// Standard Geonames "geoname" table columns.
enum Column : std::size_t {
  kId = 0,
  kName = 1,
  kAsciiName = 2,
  kAlternateNames = 3,
  kLatitude = 4,
  kLongitude = 5,
  kFeatureClass = 6,
  kFeatureCode = 7,
  kCountry = 8,
  kAdmin1 = 10,
  kPopulation = 14,
  kColumnCount = 19,
};

[[noreturn]] void bad_row(const std::string& why) {
  throw Error(ErrorKind::MalformedGazetteerRow, why);
}

double parse_double(const std::string& s, const char* what) {
  // std::from_chars for double is unavailable on some libstdc++ versions.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    bad_row(std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& s, const char* what) {
  if (s.empty()) return 0;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    bad_row(std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

std::optional<Granularity> classify(const std::string& feature_class,
                                    const std::string& feature_code) {
  if (feature_class == "P") return Granularity::city;
  if (feature_class == "A" && feature_code == "ADM1") return Granularity::admin1;
  if (feature_class == "A" && feature_code.starts_with("PCL")) return Granularity::country;
  // Named regions ("southern california") stand in for part of an admin1 area.
  if (feature_class == "L" && feature_code == "RGN") return Granularity::admin1;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::city: return "city";
    case Granularity::admin1: return "admin1";
    case Granularity::country: return "country";
  }
  return "city";
}

Granularity granularity_from_string(std::string_view s) {
  if (s == "city") return Granularity::city;
  if (s == "admin1") return Granularity::admin1;
  if (s == "country") return Granularity::country;
  throw Error(ErrorKind::InvalidArgument, "unknown granularity '" + std::string(s) + "'");
}

const Admin1Names& us_admin1_names() {
  static const Admin1Names names = [] {
    static constexpr std::pair<const char*, const char*> kStates[] = {
        {"AL", "alabama"},        {"AK", "alaska"},         {"AZ", "arizona"},
        {"AR", "arkansas"},       {"CA", "california"},     {"CO", "colorado"},
        {"CT", "connecticut"},    {"DE", "delaware"},       {"DC", "district of columbia"},
        {"FL", "florida"},        {"GA", "georgia"},        {"HI", "hawaii"},
        {"ID", "idaho"},          {"IL", "illinois"},       {"IN", "indiana"},
        {"IA", "iowa"},           {"KS", "kansas"},         {"KY", "kentucky"},
        {"LA", "louisiana"},      {"ME", "maine"},          {"MD", "maryland"},
        {"MA", "massachusetts"},  {"MI", "michigan"},       {"MN", "minnesota"},
        {"MS", "mississippi"},    {"MO", "missouri"},       {"MT", "montana"},
        {"NE", "nebraska"},       {"NV", "nevada"},         {"NH", "new hampshire"},
        {"NJ", "new jersey"},     {"NM", "new mexico"},     {"NY", "new york"},
        {"NC", "north carolina"}, {"ND", "north dakota"},   {"OH", "ohio"},
        {"OK", "oklahoma"},       {"OR", "oregon"},         {"PA", "pennsylvania"},
        {"RI", "rhode island"},   {"SC", "south carolina"}, {"SD", "south dakota"},
        {"TN", "tennessee"},      {"TX", "texas"},          {"UT", "utah"},
        {"VT", "vermont"},        {"VA", "virginia"},       {"WA", "washington"},
        {"WV", "west virginia"},  {"WI", "wisconsin"},      {"WY", "wyoming"},
    };
    Admin1Names m;
    for (auto [code, name] : kStates) m.emplace(std::string("US.") + code, name);
    return m;
  }();
  return names;
}

Admin1Names load_admin1_names(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  Admin1Names names;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() < 3) continue;
    names[cols[0]] = to_lower_ascii(cols[2].empty() ? cols[1] : cols[2]);
  }
  return names;
}

std::optional<GeoCandidate> parse_gazetteer_row(std::string_view line, const Admin1Names& admin1,
                                                std::vector<std::string>* names_out) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto cols = split(line, '\t');
  if (cols.size() != kColumnCount) {
    bad_row("expected " + std::to_string(kColumnCount) + " columns, got " +
            std::to_string(cols.size()));
  }
  GeoCandidate c;
  c.gazetteer_id = parse_int(cols[kId], "id");
  c.latitude = parse_double(cols[kLatitude], "latitude");
  c.longitude = parse_double(cols[kLongitude], "longitude");
  if (c.latitude < -90.0 || c.latitude > 90.0) bad_row("latitude out of range: " + cols[kLatitude]);
  if (c.longitude < -180.0 || c.longitude > 180.0) {
    bad_row("longitude out of range: " + cols[kLongitude]);
  }
  c.population = parse_int(cols[kPopulation], "population");
  if (c.population < 0) bad_row("negative population");

  const auto granularity = classify(cols[kFeatureClass], cols[kFeatureCode]);
  if (!granularity) return std::nullopt;
  c.granularity = *granularity;
  c.primary_name = to_lower_ascii(cols[kName]);
  c.country_code = cols[kCountry];
  for (char& ch : c.country_code) {
    if (ch >= 'a' && ch <= 'z') ch = static_cast<char>(ch - 'a' + 'A');
  }

  std::optional<std::string> mapped_admin1;
  std::optional<std::string> admin1_name;
  const std::string& code = cols[kAdmin1];
  if (!code.empty() && code != "00") {
    if (auto it = admin1.find(c.country_code + "." + code); it != admin1.end()) {
      mapped_admin1 = it->second;
    }
    admin1_name = mapped_admin1.value_or(to_lower_ascii(code));
  }

  switch (c.granularity) {
    case Granularity::city:
      c.city = c.primary_name;
      c.admin1 = admin1_name;
      break;
    case Granularity::admin1:
      // A first-order division names itself; a region inherits its state.
      c.admin1 = cols[kFeatureClass] == "A" ? mapped_admin1.value_or(c.primary_name)
                                            : admin1_name.value_or(c.primary_name);
      break;
    case Granularity::country:
      break;
  }

  if (names_out) {
    names_out->clear();
    names_out->push_back(c.primary_name);
    names_out->push_back(to_lower_ascii(cols[kAsciiName]));
    for (const auto& alt : split(cols[kAlternateNames], ',')) {
      names_out->push_back(to_lower_ascii(trim(alt)));
    }
    // Also key each name as the text scan sees it, so "st. louis" is found
    // from the tokens "st" "louis".
    const std::size_t given = names_out->size();
    for (std::size_t i = 0; i < given; ++i) {
      std::string joined;
      for (const auto& token : tokenize((*names_out)[i])) {
        if (!joined.empty()) joined += ' ';
        joined += token.lower;
      }
      names_out->push_back(std::move(joined));
    }
    std::erase_if(*names_out, [](const std::string& s) { return s.empty(); });
    std::sort(names_out->begin(), names_out->end());
    names_out->erase(std::unique(names_out->begin(), names_out->end()), names_out->end());
  }
  return c;
}

GazetteerIndex GazetteerIndex::load(std::istream& in, const Admin1Names& admin1,
                                    GazetteerLoadReport* report) {
  GazetteerLoadReport local;
  GazetteerLoadReport& rep = report ? *report : local;
  GazetteerIndex index;
  std::set<std::int64_t> seen_ids;
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++rep.rows;
    std::optional<GeoCandidate> c;
    try {
      c = parse_gazetteer_row(line, admin1, &names);
    } catch (const Error& e) {
      ++rep.malformed;
      if (rep.sample_errors.size() < 10) {
        rep.sample_errors.push_back("row " + std::to_string(rep.rows) + ": " + e.what());
      }
      continue;
    }
    if (!c) {
      ++rep.excluded;
      continue;
    }
    if (!seen_ids.insert(c->gazetteer_id).second) {
      ++rep.malformed;
      if (rep.sample_errors.size() < 10) {
        rep.sample_errors.push_back("row " + std::to_string(rep.rows) + ": duplicate id " +
                                    std::to_string(c->gazetteer_id));
      }
      continue;
    }
    ++rep.loaded;
    const auto id = static_cast<CandidateId>(index.candidates_.size());
    index.candidates_.push_back(std::move(*c));
    for (auto& name : names) index.by_name_[std::move(name)].push_back(id);
    index.pair_count_ += names.size();
  }

  for (auto& [name, ids] : index.by_name_) {
    std::sort(ids.begin(), ids.end(), [&](CandidateId a, CandidateId b) {
      const auto& ca = index.candidates_[a];
      const auto& cb = index.candidates_[b];
      if (ca.population != cb.population) return ca.population > cb.population;
      return ca.gazetteer_id < cb.gazetteer_id;
    });
  }
  return index;
}

GazetteerIndex GazetteerIndex::load(const std::filesystem::path& path, const Admin1Names& admin1,
                                    GazetteerLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  return load(in, admin1, report);
}

std::span<const CandidateId> GazetteerIndex::lookup_ids(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return {};
  return it->second;
}

std::vector<GeoCandidate> GazetteerIndex::lookup(std::string_view name) const {
  std::vector<GeoCandidate> out;
  for (CandidateId id : lookup_ids(name)) out.push_back(candidates_[id]);
  return out;
}

bool GazetteerIndex::contains(std::string_view name) const {
  return by_name_.find(std::string(name)) != by_name_.end();
}

}  // namespace geocohort
