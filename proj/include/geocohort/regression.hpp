#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geocohort/corpus.hpp"
#include "geocohort/topics.hpp"

namespace geocohort {

/// One (month, cohort) observation of the interaction model
///   y = b0 + b1 post_covid + b2 red_state + b3 post_covid * red_state.
struct DesignRow {
  YearMonth month;
  double y = 0.0;
  int post_covid = 0;
  int red_state = 0;
  int interaction = 0;

  static DesignRow make(YearMonth month, double y, bool post_covid, bool red_state);
};

/// Coefficient order used by every array below.
enum Term : std::size_t { kConstant = 0, kPostCovid = 1, kRedState = 2, kInteraction = 3 };

inline constexpr std::array<std::string_view, 4> kTermNames = {
    "Constant", "Post-covid", "> 0.5 Trump", "Post-covid & > 0.5 Trump"};

struct OlsResult {
  std::array<double, 4> coefficients{};
  std::array<double, 4> standard_errors{};
  std::array<double, 4> t_stats{};
  std::array<double, 4> p_values{};
  std::array<std::string, 4> stars;
  double rss = 0.0;
  std::size_t n = 0;
  int df = 0;
};

/// "***" for p < 0.001, "**" for p < 0.01, "*" for p < 0.05, else "".
std::string significance_stars(double p);

/// One row per month of each series; post_covid = 1 from `covid_cutoff` on.
/// Throws Error(EmptySeries) when either series is empty.
std::vector<DesignRow> build_design(const TopicSeries& red, const TopicSeries& blue,
                                    YearMonth covid_cutoff = {2020, 3});

/// Classical OLS. The design is saturated in the four (post_covid, red)
/// cells, so X factors as (cell indicators) x (4x4 contrast matrix) and the
/// solution is exact cell-mean contrasts; within-cell sums run over sorted
/// values, so row order never changes the result. SE uses
/// sigma^2 = RSS / (n - 4) and p-values are two-tailed Student t.
/// Throws Error(TooFewRows) below 5 rows, Error(RankDeficient) when a cell is
/// empty, Error(InvalidArgument) on malformed indicator columns.
OlsResult ols_fit(std::span<const DesignRow> rows);

using TopicResults = std::vector<std::pair<std::string, OlsResult>>;

/// Plain-text table with one column per topic, rows Post-covid, > 0.5 Trump,
/// interaction and Constant, standard errors in parentheses underneath.
std::string report_table(const TopicResults& results);

/// "topic\tterm\tcoef\tse\tt\tp\tstars" rows.
std::string report_rows_tsv(const TopicResults& results);
nlohmann::json report_json(const TopicResults& results);

}  // namespace geocohort
