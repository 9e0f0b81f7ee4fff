#include <doctest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "geocohort/errors.hpp"
#include "geocohort/gazetteer.hpp"
#include "geocohort/tables.hpp"
#include "helpers.hpp"

using namespace geocohort;

namespace {

std::string row(std::int64_t id, const std::string& name, const std::string& alts, double lat, double lon,
                const std::string& fclass, const std::string& fcode, const std::string& cc,
                const std::string& admin1, std::int64_t pop) {
  std::ostringstream os;
  os << id << '\t' << name << '\t' << name << '\t' << alts << '\t' << lat << '\t' << lon << '\t' << fclass
     << '\t' << fcode << '\t' << cc << "\t\t" << admin1 << "\t\t\t\t" << pop << "\t\t0\tUTC\t2020-01-01";
  return os.str();
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out(1);
  for (char ch : line) {
    if (ch == '\t') out.emplace_back();
    else out.back() += ch;
  }
  return out;
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace

TEST_CASE("Boston loads as a Massachusetts city") {
  std::istringstream in(row(4930956, "Boston", "Beantown", 42.35843, -71.05977, "P", "PPLA", "US", "MA", 667137));
  auto index = GazetteerIndex::load(in);
  auto hits = index.lookup("boston");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].granularity == Granularity::city);
  CHECK(hits[0].admin1 == std::optional<std::string>("massachusetts"));
  CHECK(hits[0].city == std::optional<std::string>("boston"));
  CHECK(hits[0].population == 667137);
  CHECK(index.lookup("beantown").size() == 1);
  CHECK(index.lookup("Boston").empty());  // lookups are lowercase
}

TEST_CASE("bad rows are malformed and skipped on load") {
  const auto bad_lat = row(1, "Nowhere", "", 91.0, 0.0, "P", "PPL", "US", "MA", 1);
  CHECK_THROWS_AS(parse_gazetteer_row(bad_lat, us_admin1_names(), nullptr), Error);
  try {
    parse_gazetteer_row(bad_lat, us_admin1_names(), nullptr);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedGazetteerRow);
  }
  CHECK_THROWS_AS(parse_gazetteer_row("1\tshort\trow", us_admin1_names(), nullptr), Error);
  CHECK_THROWS_AS(parse_gazetteer_row(row(2, "X", "", 0, 181, "P", "PPL", "US", "", 1), us_admin1_names(), nullptr),
                  Error);

  std::istringstream in(bad_lat + "\n" + row(2, "Lowell", "", 42.6, -71.3, "P", "PPL", "US", "MA", 5) + "\n" +
                        row(3, "Walden Pond", "", 42.4, -71.3, "H", "LK", "US", "MA", 0) + "\n");
  GazetteerLoadReport report;
  auto index = GazetteerIndex::load(in, us_admin1_names(), &report);
  CHECK(report.rows == 3);
  CHECK(report.loaded == 1);
  CHECK(report.malformed == 1);
  CHECK(report.excluded == 1);
  CHECK(index.contains("lowell"));
  CHECK_FALSE(index.contains("walden pond"));
}

TEST_CASE("index size equals distinct (name, id) pairs from a line scan") {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> words = {"spring", "field", "north", "lake", "hill", "river", "port", "glen"};
  const std::vector<std::pair<std::string, std::string>> classes = {
      {"P", "PPL"}, {"P", "PPLA"}, {"A", "ADM1"}, {"A", "PCLI"}, {"H", "STM"}, {"T", "MT"}};
  std::string text;
  for (int i = 0; i < 1000; ++i) {
    auto name = words[rng() % words.size()];
    if (rng() % 2) name += " " + words[rng() % words.size()];
    std::string alts;
    for (std::uint64_t k = rng() % 3; k > 0; --k) alts += (alts.empty() ? "" : ",") + words[rng() % words.size()];
    const double lat = rng() % 50 == 0 ? 95.0 : static_cast<double>(rng() % 170) - 85.0;
    const auto& [fc, code] = classes[rng() % classes.size()];
    // A few duplicated ids exercise the duplicate rule.
    const std::int64_t id = rng() % 100 == 0 ? 1000 : 1000 + i;
    text += row(id, name, alts, lat, 10.0, fc, code, "US", "MA", static_cast<std::int64_t>(rng() % 100000)) + "\n";
  }

  // Oracle: keep rows with an accepted class and valid latitude whose id is
  // not repeated from an earlier kept row, then count (name, id) pairs.
  std::set<std::pair<std::string, std::string>> pairs;
  std::set<std::string> seen_ids;
  std::istringstream scan(text);
  std::string line;
  while (std::getline(scan, line)) {
    const auto cols = split_tabs(line);
    const bool accepted = cols[6] == "P" || (cols[6] == "A" && (cols[7] == "ADM1" || cols[7].rfind("PCL", 0) == 0));
    if (std::stod(cols[4]) > 90.0) continue;
    if (!accepted) continue;
    if (!seen_ids.insert(cols[0]).second) continue;
    pairs.insert({lower(cols[1]), cols[0]});
    pairs.insert({lower(cols[2]), cols[0]});
    for (const auto& alt : split_tabs([&] {
           std::string s = cols[3];
           for (auto& ch : s) if (ch == ',') ch = '\t';
           return s;
         }())) {
      if (!alt.empty()) pairs.insert({lower(alt), cols[0]});
    }
  }
  std::istringstream in(text);
  auto index = GazetteerIndex::load(in);
  CHECK(index.size() == pairs.size());
}

TEST_CASE("fixture lookups") {
  const auto& g = testing::fixture_gazetteer();
  auto springfield = g.lookup("springfield");
  CHECK(springfield.size() == 5);
  std::set<std::string> states;
  for (const auto& c : springfield) states.insert(*c.admin1);
  CHECK(states.size() == 5);
  CHECK(g.lookup("zzzz-not-a-place").empty());

  auto ma = g.lookup("massachusetts");
  REQUIRE(ma.size() == 1);
  CHECK(ma[0].granularity == Granularity::admin1);
  CHECK(ma[0].country_code == "US");

  // Population descending, then id ascending.
  for (const auto& name : {"springfield", "paris", "london", "portland", "washington"}) {
    auto hits = g.lookup(name);
    for (std::size_t i = 1; i < hits.size(); ++i) {
      const bool ordered = hits[i - 1].population > hits[i].population ||
                           (hits[i - 1].population == hits[i].population &&
                            hits[i - 1].gazetteer_id < hits[i].gazetteer_id);
      CHECK(ordered);
    }
  }
  CHECK(g.lookup("st louis").size() == 1);
  CHECK(g.lookup("st. louis").size() == 1);
}

TEST_CASE("fixture candidates satisfy the type invariants") {
  const auto& g = testing::fixture_gazetteer();
  for (const auto& c : g.candidates()) {
    CHECK(c.latitude >= -90.0);
    CHECK(c.latitude <= 90.0);
    CHECK(c.longitude >= -180.0);
    CHECK(c.longitude <= 180.0);
    CHECK(c.population >= 0);
    if (c.granularity == Granularity::city) CHECK(c.city.has_value());
    if (c.granularity == Granularity::country) {
      CHECK_FALSE(c.city.has_value());
      CHECK_FALSE(c.admin1.has_value());
    }
    if (c.country_code == "US" && c.granularity != Granularity::country) CHECK(c.admin1.has_value());
  }
}

TEST_CASE("loading twice gives identical lookups") {
  auto a = GazetteerIndex::load(testing::data_path("gazetteer_fixture.tsv"));
  auto b = GazetteerIndex::load(testing::data_path("gazetteer_fixture.tsv"));
  CHECK(a.size() == b.size());
  for (const auto& c : a.candidates()) CHECK(a.lookup(c.primary_name) == b.lookup(c.primary_name));
}

TEST_CASE("regions load at admin1 granularity within their state") {
  auto hits = testing::fixture_gazetteer().lookup("southern california");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].granularity == Granularity::admin1);
  CHECK(hits[0].admin1 == std::optional<std::string>("california"));
  CHECK_FALSE(hits[0].city.has_value());
}

TEST_CASE("default tables hold the appendix values") {
  const auto t = NormalizationTables::defaults();
  for (const auto& word : {"china", "russia", "turkey", "op"}) CHECK(t.blocklist.contains(word));
  CHECK(t.aliases.at("vegas") == "las vegas");
  CHECK(t.aliases.at("nyc") == "new york city");
  CHECK(t.aliases.at("l.a.") == "los angeles");
  CHECK(*t.regions_for("california") ==
        std::vector<std::string>{"central california", "southern california", "northern california"});
  CHECK(*t.regions_for("texas") == std::vector<std::string>{"el paso", "houston", "dallas"});
  CHECK(*t.regions_for("florida") == std::vector<std::string>{"tallahassee", "miami"});
  CHECK(*t.regions_for("alaska") == std::vector<std::string>{"juneau", "anchorage", "fairbanks"});
  CHECK(t.regions_for("ohio") == nullptr);
  CHECK(t.state_abbrev.size() == 51);
  CHECK(t.state_abbrev.at("ma") == "massachusetts");
  CHECK(validate_tables(t, testing::fixture_gazetteer()).empty());
}

TEST_CASE("tables round-trip through JSON and accept overlays") {
  const auto t = NormalizationTables::defaults();
  const auto back = NormalizationTables::from_json(t.to_json());
  CHECK(back.blocklist == t.blocklist);
  CHECK(back.aliases == t.aliases);
  CHECK(back.state_abbrev == t.state_abbrev);
  CHECK(back.large_state_regions == t.large_state_regions);
  CHECK(back.location_subreddits == t.location_subreddits);

  auto custom = NormalizationTables::from_json(nlohmann::json{{"aliases", {{"beantown", "boston"}}}});
  CHECK(custom.aliases.at("beantown") == "boston");
  CHECK(custom.blocklist == t.blocklist);

  GazetteerIndex empty;
  CHECK_FALSE(validate_tables(custom, empty).empty());
}

TEST_CASE("two-column files load") {
  const auto dir = testing::scratch_dir("gazetteer_files");
  {
    std::ofstream(dir / "subs.tsv") << "subreddit\tplace\nboston\tboston\nbayarea,san francisco\n";
    std::ofstream(dir / "admin1.txt") << "US.MA\tMassachusetts\tMassachusetts\t6254926\n";
  }
  auto subs = load_location_subreddits(dir / "subs.tsv");
  CHECK(subs.at("boston") == "boston");
  CHECK(subs.at("bayarea") == "san francisco");
  auto names = load_admin1_names(dir / "admin1.txt");
  CHECK(names.at("US.MA") == "massachusetts");
}
