#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geocohort/corpus.hpp"
#include "geocohort/entities.hpp"
#include "geocohort/errors.hpp"
#include "geocohort/forest.hpp"
#include "geocohort/inference.hpp"

namespace geocohort {

struct PipelineConfig {
  struct Paths {
    std::filesystem::path corpus;  // file or directory of .jsonl shards
    std::filesystem::path gazetteer;
    std::filesystem::path admin1_codes;        // optional; built-in US states otherwise
    std::filesystem::path tables;              // optional JSON overlay on the defaults
    std::filesystem::path location_subreddits; // optional two-column override
    std::filesystem::path annotations;
    std::filesystem::path labels;  // optional (author[, rank], label) rows; wins over annotations
    std::filesystem::path state_population;
    std::filesystem::path vote_shares;
    std::filesystem::path output_dir = "out";
  } paths;

  InferenceOptions inference;
  ForestParams forest;
  double holdout_fraction = 0.33;
  double threshold = 0.5;

  double topic_scale = 100000.0;
  YearMonth covid_cutoff{2020, 3};
  std::optional<MonthRange> topic_months;  // spans the corpus when absent
  double vote_share_threshold = 0.5;

  ExtractionMode extraction_mode = ExtractionMode::gazetteer_scan;
  bool strict = false;
  std::uint64_t seed = 42;
  int workers = 1;

  /// The defaults as a JSON document; also the schema for from_json.
  static nlohmann::json default_json();
  /// Overlays `j` on the defaults and validates. Unknown keys, wrong types
  /// and out-of-range values throw Error(ConfigInvalid).
  static PipelineConfig from_json(const nlohmann::json& j);
  /// Reads a JSON config file (missing file: Error(MissingInput)) and applies
  /// "dotted.key=value" overrides; values parse as JSON, else as strings.
  static PipelineConfig load(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides = {});

  nlohmann::json to_json() const;
};

/// Applies one "a.b.c=value" override to a config document.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Fixed artifact names inside the output directory.
namespace artifacts {
inline constexpr std::string_view kHistories = "histories.jsonl";
inline constexpr std::string_view kVolume = "volume.tsv";
inline constexpr std::string_view kIngestReport = "ingest_report.json";
inline constexpr std::string_view kMentions = "mentions.jsonl";
inline constexpr std::string_view kGuesses = "guesses.jsonl";
inline constexpr std::string_view kModelPositive = "model_positive.json";
inline constexpr std::string_view kModelNegative = "model_negative.json";
inline constexpr std::string_view kConfidenceReport = "confidence_report.json";
inline constexpr std::string_view kScored = "scored.jsonl";
inline constexpr std::string_view kSelected = "selected.jsonl";
inline constexpr std::string_view kGrades = "grades.tsv";
inline constexpr std::string_view kAccuracyJson = "accuracy.json";
inline constexpr std::string_view kAccuracyText = "accuracy.txt";
inline constexpr std::string_view kCohortJson = "cohort.json";
inline constexpr std::string_view kCohortText = "cohort.txt";
inline constexpr std::string_view kTopicCounts = "topic_counts.tsv";
inline constexpr std::string_view kSeries = "series.jsonl";
inline constexpr std::string_view kRegressionText = "regression.txt";
inline constexpr std::string_view kRegressionTsv = "regression.tsv";
inline constexpr std::string_view kRegressionJson = "regression.json";
inline constexpr std::string_view kExportLocations = "locations.tsv";
inline constexpr std::string_view kExportStates = "states.tsv";
}  // namespace artifacts

/// Per-user extraction output: the facts inference needs without re-reading
/// the histories.
struct UserMentions {
  UserStats stats;
  std::vector<EntityMention> mentions;
};

nlohmann::json user_mentions_to_json(const UserMentions& u);
UserMentions user_mentions_from_json(const nlohmann::json& j);

/// The commands, in pipeline order. Each checks all of its inputs before
/// writing anything and writes its outputs atomically; a one-line summary
/// goes to `log`.
void run_ingest(const PipelineConfig& config, std::ostream& log);
void run_extract(const PipelineConfig& config, std::ostream& log);
void run_infer(const PipelineConfig& config, std::ostream& log);
void run_train_confidence(const PipelineConfig& config, std::ostream& log);
void run_score(const PipelineConfig& config, std::ostream& log);
void run_evaluate(const PipelineConfig& config, std::ostream& log);
void run_topics(const PipelineConfig& config, std::ostream& log);
void run_regress(const PipelineConfig& config, std::ostream& log);
void run_export(const PipelineConfig& config, std::ostream& log);

inline constexpr std::array<std::string_view, 9> kCommands = {
    "ingest", "extract", "infer", "train-confidence", "score",
    "evaluate", "topics", "regress", "export"};

/// Exit codes shared by the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMissingInput = 3;
inline constexpr int kExitData = 4;

int exit_code_for(ErrorKind kind);

/// Runs one command, mapping failures to an exit code and a single
/// "error: command=<c> kind=<k> message=<m>" line on `err`.
int run_command(std::string_view command, const PipelineConfig& config, std::ostream& log,
                std::ostream& err);

}  // namespace geocohort
