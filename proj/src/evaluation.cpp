#include "geocohort/evaluation.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geocohort/errors.hpp"
#include "geocohort/text.hpp"

namespace geocohort {

using nlohmann::json;

namespace {

std::string upper_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return s;
}

std::optional<std::string> cell(const std::vector<std::string>& cols, std::size_t i) {
  if (i >= cols.size()) return std::nullopt;
  auto v = trim(cols[i]);
  if (v.empty()) return std::nullopt;
  return v;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

void Annotation::check() const {
  if (none_findable && (city || admin1 || country)) {
    throw Error(ErrorKind::InvalidArgument,
                "annotation for '" + author + "' is none-findable but names a location");
  }
}

Annotation normalize_annotation(Annotation a, const NormalizationTables& tables) {
  if (a.city) {
    a.city = to_lower_ascii(*a.city);
    if (auto it = tables.aliases.find(*a.city); it != tables.aliases.end()) a.city = it->second;
  }
  if (a.admin1) {
    a.admin1 = to_lower_ascii(*a.admin1);
    if (auto it = tables.state_abbrev.find(*a.admin1); it != tables.state_abbrev.end()) {
      a.admin1 = it->second;
    }
  }
  if (a.country) a.country = upper_ascii(*a.country);
  return a;
}

std::vector<Annotation> load_annotations(const std::filesystem::path& path,
                                         const NormalizationTables& tables) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  std::vector<Annotation> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1 || trim(line).empty()) continue;  // header
    const auto cols = split(line, '\t');
    if (cols.size() != 5) {
      throw Error(ErrorKind::MalformedRecord,
                  path.string() + ":" + std::to_string(n) + ": expected 5 columns");
    }
    Annotation a;
    a.author = trim(cols[0]);
    a.city = cell(cols, 1);
    a.admin1 = cell(cols, 2);
    a.country = cell(cols, 3);
    const auto flag = to_lower_ascii(trim(cols[4]));
    a.none_findable = flag == "1" || flag == "true" || flag == "yes";
    if (!a.none_findable && flag != "0" && flag != "false" && flag != "no" && !flag.empty()) {
      throw Error(ErrorKind::MalformedRecord,
                  path.string() + ":" + std::to_string(n) + ": bad none_findable flag");
    }
    a.check();
    out.push_back(normalize_annotation(std::move(a), tables));
  }
  return out;
}

std::string_view to_string(Grade g) {
  switch (g) {
    case Grade::Full: return "full";
    case Grade::Partial: return "partial";
    case Grade::Miss: return "miss";
    case Grade::CorrectNone: return "correct_none";
    case Grade::MissedNone: return "missed_none";
    case Grade::FalseGuess: return "false_guess";
  }
  return "miss";
}

Grade grade_guess(const LocationGuess* guess, const Annotation& annotation) {
  const bool has_guess = guess && guess->has_guess();
  if (guess && guess->user != annotation.author) {
    throw Error(ErrorKind::AuthorMismatch,
                "guess for '" + guess->user + "' graded against '" + annotation.author + "'");
  }
  if (!has_guess) return annotation.none_findable ? Grade::CorrectNone : Grade::MissedNone;
  if (annotation.none_findable) return Grade::FalseGuess;

  const GeoCandidate& c = *guess->candidate;
  const bool country_match = annotation.country && upper_ascii(c.country_code) == *annotation.country;
  if (annotation.country == "US") {
    const bool admin1_match = c.admin1 == annotation.admin1;
    const bool city_match = c.city == annotation.city;
    if (country_match && admin1_match && city_match) return Grade::Full;
    if (country_match && admin1_match) return Grade::Partial;
    return Grade::Miss;
  }
  return country_match ? Grade::Full : Grade::Miss;
}

TrainingLabel label_for_grade(Grade g) {
  switch (g) {
    case Grade::Full:
    case Grade::CorrectNone: return TrainingLabel(1.0);
    case Grade::Partial: return TrainingLabel(0.5);
    default: return TrainingLabel(0.0);
  }
}

AccuracyReport accuracy_report(std::span<const Grade> grades) {
  if (grades.empty()) throw Error(ErrorKind::EmptyInput, "no grades to report");
  AccuracyReport r;
  r.total = grades.size();
  for (Grade g : kAllGrades) r.counts[g] = 0;
  for (Grade g : grades) ++r.counts[g];
  const double n = static_cast<double>(r.total);
  r.full_rate = static_cast<double>(r.counts[Grade::Full] + r.counts[Grade::CorrectNone]) / n;
  r.partial_rate = static_cast<double>(r.counts[Grade::Partial]) / n;
  r.combined_rate = r.full_rate + r.partial_rate;
  return r;
}

json AccuracyReport::to_json() const {
  json c = json::object();
  for (const auto& [g, n] : counts) c[std::string(to_string(g))] = n;
  return json{{"total", total},
              {"full_rate", full_rate},
              {"partial_rate", partial_rate},
              {"combined_rate", combined_rate},
              {"counts", std::move(c)}};
}

std::string AccuracyReport::to_text() const {
  std::ostringstream os;
  os << "users graded:   " << total << '\n';
  os << "full rate:      " << fmt("%.4f", full_rate) << '\n';
  os << "partial rate:   " << fmt("%.4f", partial_rate) << '\n';
  os << "combined rate:  " << fmt("%.4f", combined_rate) << '\n';
  for (Grade g : kAllGrades) {
    const auto it = counts.find(g);
    os << "  " << to_string(g) << ": " << (it == counts.end() ? 0 : it->second) << '\n';
  }
  return os.str();
}

CohortSummary cohort_summary(std::span<const LocationGuess> guesses, double threshold,
                             const std::map<std::string, std::int64_t>& state_population) {
  CohortSummary s;
  s.threshold = threshold;
  s.users = guesses.size();
  std::map<std::string, std::size_t> state_users;

  auto tally = [](GranularityCounts& counts, const GeoCandidate& c) {
    ++counts.country;
    if (c.admin1) ++counts.admin1;
    if (c.city) ++counts.city;
  };

  for (const auto& g : guesses) {
    if (!g.confidence) throw Error(ErrorKind::InvalidArgument, "guess for '" + g.user + "' is unscored");
    const bool kept = *g.confidence >= threshold;
    if (kept) ++s.retained;
    if (!g.has_guess()) continue;
    const auto& c = *g.candidate;
    tally(s.before, c);
    const bool us_state = c.country_code == "US" && c.admin1.has_value();
    if (us_state) {
      auto it = state_population.find(*c.admin1);
      if (it == state_population.end() || it->second <= 0) {
        throw Error(ErrorKind::MissingPopulation, "no population for state '" + *c.admin1 + "'");
      }
    }
    if (!kept) continue;
    tally(s.after, c);
    if (us_state) ++state_users[*c.admin1];
  }

  for (const auto& [state, users] : state_users) {
    const auto pop = state_population.at(state);
    s.states.push_back(StateRate{state, users, pop,
                                 100000.0 * static_cast<double>(users) / static_cast<double>(pop)});
  }
  return s;
}

json CohortSummary::to_json() const {
  auto counts = [](const GranularityCounts& c) {
    return json{{"city", c.city}, {"admin1", c.admin1}, {"country", c.country}};
  };
  json states_json = json::array();
  for (const auto& st : states) {
    states_json.push_back(json{{"state", st.state},
                               {"users", st.users},
                               {"population", st.population},
                               {"per_100k", st.per_100k}});
  }
  return json{{"threshold", threshold}, {"users", users},        {"retained", retained},
              {"before", counts(before)}, {"after", counts(after)}, {"states", std::move(states_json)}};
}

std::string CohortSummary::to_text() const {
  std::ostringstream os;
  os << "users: " << users << ", retained at confidence >= " << fmt("%.2f", threshold) << ": "
     << retained << '\n';
  os << "resolved before filtering: city " << before.city << ", state " << before.admin1
     << ", country " << before.country << '\n';
  os << "resolved after filtering:  city " << after.city << ", state " << after.admin1
     << ", country " << after.country << '\n';
  return os.str();
}

std::string CohortSummary::states_tsv() const {
  std::ostringstream os;
  os << "state\tusers\tpopulation\tper_100k\n";
  for (const auto& st : states) {
    os << st.state << '\t' << st.users << '\t' << st.population << '\t'
       << fmt("%.6f", st.per_100k) << '\n';
  }
  return os.str();
}

std::map<std::string, std::int64_t> load_state_population(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  std::map<std::string, std::int64_t> out;
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
    std::int64_t pop = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), pop);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      if (n == 1) continue;  // header row
      throw Error(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(n) + ": bad population");
    }
    out[to_lower_ascii(trim(cols[0]))] = pop;
  }
  return out;
}

}  // namespace geocohort
