#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "geocohort/errors.hpp"
#include "geocohort/regression.hpp"
#include "geocohort/student_t.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace geocohort;

namespace {

bool close(double a, double b, double rel, double abs = 1e-300) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs;
}

// The series fallback cannot resolve tiny p-values relatively.
#ifdef GEOCOHORT_HAVE_BOOST_MATH
constexpr double kPAbs = 1e-300;
#else
constexpr double kPAbs = 1e-14;
#endif

std::vector<DesignRow> random_rows(std::mt19937_64& rng, std::size_t n, double noise) {
  std::normal_distribution<double> eps(0, noise);
  std::vector<DesignRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    // The first four rows cover every cell.
    const bool post = i < 4 ? (i & 1) : rng() % 2;
    const bool red = i < 4 ? (i & 2) : rng() % 2;
    const double y = 100 - 50 * post + 10 * red + 80 * (post && red) + eps(rng);
    rows.push_back(DesignRow::make(YearMonth{2020, 1}, y, post, red));
  }
  return rows;
}

TopicSeries series(const std::string& cohort, const std::vector<std::pair<YearMonth, double>>& pts) {
  TopicSeries s;
  s.topic = "money";
  s.cohort = cohort;
  for (const auto& [m, v] : pts) s.points[m] = v;
  return s;
}

}  // namespace

TEST_CASE("design rows") {
  const auto red = series("red", {{{2020, 4}, 10}, {{2019, 5}, 8}});
  const auto blue = series("blue", {{{2019, 5}, 3}, {{2020, 3}, 4}});
  const auto rows = build_design(red, blue);
  REQUIRE(rows.size() == 4);
  int post = 0, reds = 0, inter = 0;
  for (const auto& r : rows) {
    CHECK(r.interaction == r.post_covid * r.red_state);
    post += r.post_covid;
    reds += r.red_state;
    inter += r.interaction;
  }
  CHECK(post == 2);
  CHECK(reds == 2);
  CHECK(inter == 1);
  CHECK_THROWS_AS(build_design(red, series("blue", {})), Error);

  std::vector<std::pair<YearMonth, double>> pts;
  for (YearMonth m : MonthRange{{2019, 1}, {2021, 12}}.months()) pts.push_back({m, 1.0});
  CHECK(build_design(series("red", pts), series("blue", pts)).size() == 72);
}

TEST_CASE("stars") {
  CHECK(significance_stars(0.0005) == "***");
  CHECK(significance_stars(0.001) == "**");
  CHECK(significance_stars(0.005) == "**");
  CHECK(significance_stars(0.01) == "*");
  CHECK(significance_stars(0.049) == "*");
  CHECK(significance_stars(0.05) == "");
  CHECK(significance_stars(0.7) == "");
}

TEST_CASE("Student t helpers agree with the oracle") {
  for (double df : {1.0, 2.0, 5.0, 30.0, 200.0}) {
    for (double t : {0.0, 0.3, 1.0, 2.5, 6.0, 20.0}) {
      CHECK(close(student_t_two_tailed_p(t, df), oracles::oracle_two_tailed_p(t, df), 1e-8, kPAbs));
      CHECK(student_t_two_tailed_p(-t, df) == student_t_two_tailed_p(t, df));
    }
  }
  // Monotone decreasing in |t|.
  double prev = 2;
  for (int k = 0; k <= 100; ++k) {
    const double p = student_t_two_tailed_p(k * 0.1, 12);
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("the noiseless case is fit exactly") {
  std::vector<DesignRow> rows;
  for (int i = 0; i < 40; ++i) {
    const bool post = i % 2, red = (i / 2) % 2;
    rows.push_back(DesignRow::make({2020, 1}, 2.0 * post, post, red));
  }
  const auto fit = ols_fit(rows);
  CHECK(fit.coefficients == std::array<double, 4>{0, 2, 0, 0});
  CHECK(fit.rss == 0.0);
  CHECK(fit.df == 36);
  CHECK(fit.n == 40);
}

TEST_CASE("OLS matches the normal-equations oracle on random designs") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng() % 496;
    const auto rows = random_rows(rng, n, 1.0 + static_cast<double>(rng() % 400));
    const auto fit = ols_fit(rows);
    const auto oracle = oracles::normal_equations(rows);
    for (int i = 0; i < 4; ++i) {
      CHECK(close(fit.coefficients[i], oracle.beta[i], 1e-8));
      CHECK(close(fit.standard_errors[i], oracle.se[i], 1e-8));
      CHECK(close(fit.t_stats[i], oracle.t[i], 1e-8));
      CHECK(close(fit.p_values[i], oracle.p[i], 1e-8, kPAbs));
      CHECK(fit.stars[i] == significance_stars(fit.p_values[i]));
    }
    CHECK(close(fit.rss, oracle.rss, 1e-8));
  }
}

TEST_CASE("planted coefficients are recovered within 3 SE") {
  std::mt19937_64 rng(1);
  const auto fit = ols_fit(random_rows(rng, 200, 5.0));
  const std::array<double, 4> truth = {100, -50, 10, 80};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(fit.coefficients[i] - truth[i]) <= 3 * fit.standard_errors[i]);
}

TEST_CASE("scaling, permutation and RSS properties") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    auto rows = random_rows(rng, 20 + rng() % 100, 20);
    const auto fit = ols_fit(rows);

    auto scaled = rows;
    for (auto& r : scaled) r.y *= 3.5;
    const auto sfit = ols_fit(scaled);
    for (int i = 0; i < 4; ++i) {
      CHECK(sfit.coefficients[i] == doctest::Approx(3.5 * fit.coefficients[i]).epsilon(1e-10));
      CHECK(sfit.standard_errors[i] == doctest::Approx(3.5 * fit.standard_errors[i]).epsilon(1e-10));
      CHECK(sfit.t_stats[i] == doctest::Approx(fit.t_stats[i]).epsilon(1e-10));
      CHECK(sfit.stars[i] == fit.stars[i]);
    }

    std::shuffle(rows.begin(), rows.end(), rng);
    const auto pfit = ols_fit(rows);
    CHECK(pfit.coefficients == fit.coefficients);
    CHECK(pfit.standard_errors == fit.standard_errors);
    CHECK(pfit.p_values == fit.p_values);

    double mean = 0;
    for (const auto& r : rows) mean += r.y;
    mean /= static_cast<double>(rows.size());
    double tss = 0;
    for (const auto& r : rows) tss += (r.y - mean) * (r.y - mean);
    CHECK(fit.rss <= tss * (1 + 1e-12));
  }
}

TEST_CASE("degenerate designs are rejected") {
  auto kind_of = [](const std::vector<DesignRow>& rows) {
    try {
      ols_fit(rows);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  std::mt19937_64 rng(3);
  CHECK(kind_of(random_rows(rng, 4, 1)) == ErrorKind::TooFewRows);
  std::vector<DesignRow> no_red;
  for (int i = 0; i < 10; ++i) no_red.push_back(DesignRow::make({2020, 1}, i, i % 2, false));
  CHECK(kind_of(no_red) == ErrorKind::RankDeficient);
}

TEST_CASE("report table layout is byte-stable") {
  OlsResult money;
  money.coefficients = {2870.4, -1080.1, -310.2, 420.7};
  money.standard_errors = {150.3, 304.8, 212.6, 431.0};
  money.p_values = {0.0000001, 0.0008, 0.15, 0.33};
  OlsResult narcan;
  narcan.coefficients = {12.5, 3.25, -0.75, 6.0};
  narcan.standard_errors = {1.0, 1.5, 0.4, 2.1};
  narcan.p_values = {0.0001, 0.04, 0.07, 0.006};
  for (auto* r : {&money, &narcan}) {
    for (int i = 0; i < 4; ++i) r->stars[i] = significance_stars(r->p_values[i]);
  }
  const TopicResults results = {{"money", money}, {"narcan", narcan}};
  const auto table = report_table(results);

  std::ifstream golden(testing::data_path("regression_table.txt"));
  REQUIRE(golden.good());
  std::stringstream expected;
  expected << golden.rdbuf();
  CHECK(table == expected.str());
  CHECK(report_table(results) == table);

  const auto empty = report_table({});
  CHECK(empty.find("Post-covid") == std::string::npos);
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 4);

  const auto tsv = report_rows_tsv(results);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 1 + 8);
  CHECK(report_json(results).size() == 2);
}
