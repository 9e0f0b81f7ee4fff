#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace geocohort {

/// Ordered from most to least granular.
enum class Granularity { city = 0, admin1 = 1, country = 2 };

std::string_view to_string(Granularity g);
Granularity granularity_from_string(std::string_view s);

struct GeoCandidate {
  std::int64_t gazetteer_id = 0;
  std::string primary_name;  // lowercase
  double latitude = 0.0;
  double longitude = 0.0;
  std::string country_code;           // ISO-3166 alpha-2, uppercase
  std::optional<std::string> admin1;  // lowercase; US state name for US entries
  std::optional<std::string> city;    // lowercase
  std::int64_t population = 0;
  Granularity granularity = Granularity::city;

  bool operator==(const GeoCandidate&) const = default;
};

/// Index into GazetteerIndex::candidates().
using CandidateId = std::uint32_t;

/// "US.MA" -> "massachusetts" style map from admin1 codes to names.
using Admin1Names = std::map<std::string, std::string>;

/// Admin1 names for the 50 US states and DC keyed by "US.<postal code>".
const Admin1Names& us_admin1_names();

/// Parses a Geonames admin1CodesASCII.txt file (code, name, asciiname, id).
Admin1Names load_admin1_names(const std::filesystem::path& path);

struct GazetteerLoadReport {
  std::size_t rows = 0;
  std::size_t loaded = 0;
  std::size_t excluded = 0;   // feature class/code outside the accepted set
  std::size_t malformed = 0;  // bad column count or coordinates
  std::vector<std::string> sample_errors;
};

/// Parses one Geonames dump row. Returns nullopt for rows whose feature class
/// is not mapped to a granularity; throws Error(MalformedGazetteerRow) for a
/// bad column count, coordinate, or population. `names_out` receives the
/// sorted lookup keys: primary, ASCII and alternate names plus their
/// tokenized spellings ("st. louis" also as "st louis").
std::optional<GeoCandidate> parse_gazetteer_row(std::string_view line, const Admin1Names& admin1,
                                                std::vector<std::string>* names_out);

/// Exact-name index over a Geonames-format dump. Immutable after load.
class GazetteerIndex {
 public:
  GazetteerIndex() = default;

  static GazetteerIndex load(std::istream& in, const Admin1Names& admin1 = us_admin1_names(),
                             GazetteerLoadReport* report = nullptr);
  static GazetteerIndex load(const std::filesystem::path& path,
                             const Admin1Names& admin1 = us_admin1_names(),
                             GazetteerLoadReport* report = nullptr);

  /// Candidates named `name` (primary or alternate), population descending
  /// then gazetteer id ascending.
  std::span<const CandidateId> lookup_ids(std::string_view name) const;
  std::vector<GeoCandidate> lookup(std::string_view name) const;
  bool contains(std::string_view name) const;

  const GeoCandidate& candidate(CandidateId id) const { return candidates_[id]; }
  std::span<const GeoCandidate> candidates() const { return candidates_; }

  /// Number of distinct (name, gazetteer id) pairs.
  std::size_t size() const { return pair_count_; }
  std::size_t key_count() const { return by_name_.size(); }

 private:
  std::vector<GeoCandidate> candidates_;
  std::unordered_map<std::string, std::vector<CandidateId>> by_name_;
  std::size_t pair_count_ = 0;
};

}  // namespace geocohort
