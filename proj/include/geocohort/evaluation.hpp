#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "geocohort/forest.hpp"
#include "geocohort/inference.hpp"
#include "geocohort/tables.hpp"

namespace geocohort {

struct Annotation {
  std::string author;
  std::optional<std::string> city;     // lowercase
  std::optional<std::string> admin1;   // lowercase
  std::optional<std::string> country;  // ISO alpha-2, uppercase
  bool none_findable = false;

  /// Throws Error(InvalidArgument) when none_findable carries a location.
  void check() const;
};

/// Lowercases names, applies aliases to the city and postal abbreviations to
/// the admin1 field, and uppercases the country, so annotator spellings such
/// as "NYC" or "MA" grade against gazetteer names.
Annotation normalize_annotation(Annotation a, const NormalizationTables& tables);

/// Rows: author, city, admin1, country, none_findable (tab separated, header
/// line required, empty cells for absent fields).
std::vector<Annotation> load_annotations(const std::filesystem::path& path,
                                         const NormalizationTables& tables);

enum class Grade { Full, Partial, Miss, CorrectNone, MissedNone, FalseGuess };

inline constexpr std::array<Grade, 6> kAllGrades = {Grade::Full,        Grade::Partial,
                                                    Grade::Miss,        Grade::CorrectNone,
                                                    Grade::MissedNone,  Grade::FalseGuess};

std::string_view to_string(Grade g);

/// US annotations grade at city level (Partial when only the state and
/// country match); others at country level. Throws Error(AuthorMismatch)
/// when the guess belongs to another user.
Grade grade_guess(const LocationGuess* guess, const Annotation& annotation);

/// Label used to train the confidence models from a grade.
TrainingLabel label_for_grade(Grade g);

struct AccuracyReport {
  std::size_t total = 0;
  std::map<Grade, std::size_t> counts;  // all six grades present
  double full_rate = 0.0;               // (Full + CorrectNone) / N
  double partial_rate = 0.0;            // Partial / N
  double combined_rate = 0.0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Throws Error(EmptyInput) for no grades.
AccuracyReport accuracy_report(std::span<const Grade> grades);

struct GranularityCounts {
  std::size_t city = 0;
  std::size_t admin1 = 0;
  std::size_t country = 0;

  bool operator==(const GranularityCounts&) const = default;
};

struct StateRate {
  std::string state;
  std::size_t users = 0;
  std::int64_t population = 0;
  double per_100k = 0.0;
};

struct CohortSummary {
  double threshold = 0.5;
  std::size_t users = 0;
  std::size_t retained = 0;  // confidence >= threshold
  GranularityCounts before;
  GranularityCounts after;
  std::vector<StateRate> states;  // post-filter US users, sorted by state

  nlohmann::json to_json() const;
  std::string to_text() const;
  /// "state\tusers\tpopulation\tper_100k" rows for choropleth tools.
  std::string states_tsv() const;
};

/// `guesses` holds each user's selected (scored) guess, including no-guess
/// records. A user counts toward city, admin1 and country as far as the
/// guess resolves. Throws Error(MissingPopulation) when a US state of any
/// guess is missing from the table.
CohortSummary cohort_summary(std::span<const LocationGuess> guesses, double threshold,
                             const std::map<std::string, std::int64_t>& state_population);

/// Two-column (state, population) file.
std::map<std::string, std::int64_t> load_state_population(const std::filesystem::path& path);

}  // namespace geocohort
