#include "geocohort/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "geocohort/errors.hpp"
#include "geocohort/student_t.hpp"

namespace geocohort {

using nlohmann::json;

namespace {

// Cells in the order (post, red) = 00, 10, 01, 11. Row k of X restricted to
// cell k is kCellRows[k]; kContrast is its inverse, so beta = kContrast * m
// for the vector m of cell means.
constexpr std::array<std::array<double, 4>, 4> kContrast = {{
    {1, 0, 0, 0},
    {-1, 1, 0, 0},
    {-1, 0, 1, 0},
    {1, -1, -1, 1},
}};

std::size_t cell_of(const DesignRow& r) {
  return static_cast<std::size_t>(r.post_covid) + 2 * static_cast<std::size_t>(r.red_state);
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string rstrip(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

DesignRow DesignRow::make(YearMonth month, double y, bool post_covid, bool red_state) {
  return DesignRow{month, y, post_covid ? 1 : 0, red_state ? 1 : 0,
                   (post_covid && red_state) ? 1 : 0};
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::vector<DesignRow> build_design(const TopicSeries& red, const TopicSeries& blue,
                                    YearMonth covid_cutoff) {
  if (red.points.empty() || blue.points.empty()) {
    throw Error(ErrorKind::EmptySeries, "both cohorts need at least one month of data");
  }
  std::vector<DesignRow> rows;
  for (const auto& [month, y] : red.points) {
    rows.push_back(DesignRow::make(month, y, month >= covid_cutoff, true));
  }
  for (const auto& [month, y] : blue.points) {
    rows.push_back(DesignRow::make(month, y, month >= covid_cutoff, false));
  }
  return rows;
}

OlsResult ols_fit(std::span<const DesignRow> rows) {
  if (rows.size() < 5) {
    throw Error(ErrorKind::TooFewRows, "OLS needs at least 5 rows, got " + std::to_string(rows.size()));
  }
  std::array<std::vector<double>, 4> cells;
  for (const auto& r : rows) {
    const bool binary = (r.post_covid == 0 || r.post_covid == 1) && (r.red_state == 0 || r.red_state == 1);
    if (!binary || r.interaction != r.post_covid * r.red_state || !std::isfinite(r.y)) {
      throw Error(ErrorKind::InvalidArgument, "design row for " + r.month.to_string() + " is malformed");
    }
    cells[cell_of(r)].push_back(r.y);
  }
  std::array<double, 4> mean{};
  double rss = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    auto& ys = cells[k];
    if (ys.empty()) {
      throw Error(ErrorKind::RankDeficient,
                  "design matrix is rank deficient: a (post-covid, red) cell has no rows");
    }
    std::sort(ys.begin(), ys.end());
    double sum = 0.0;
    for (double y : ys) sum += y;
    mean[k] = sum / static_cast<double>(ys.size());
    for (double y : ys) rss += (y - mean[k]) * (y - mean[k]);
  }

  OlsResult res;
  res.n = rows.size();
  res.df = static_cast<int>(rows.size()) - 4;
  res.rss = rss;
  const double sigma2 = rss / res.df;
  for (std::size_t i = 0; i < 4; ++i) {
    double beta = 0.0, var_unit = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      beta += kContrast[i][k] * mean[k];
      var_unit += kContrast[i][k] * kContrast[i][k] / static_cast<double>(cells[k].size());
    }
    const double se = std::sqrt(var_unit * sigma2);
    double t;
    if (se > 0.0) t = beta / se;
    else t = beta == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), beta);
    res.coefficients[i] = beta;
    res.standard_errors[i] = se;
    res.t_stats[i] = t;
    res.p_values[i] = student_t_two_tailed_p(t, res.df);
    res.stars[i] = significance_stars(res.p_values[i]);
  }
  return res;
}

std::string report_table(const TopicResults& results) {
  constexpr std::size_t kLabel = 16;
  std::size_t col = 18;
  for (const auto& [topic, fit] : results) col = std::max(col, topic.size() + 2);
  const std::size_t width = kLabel + col * results.size();
  std::ostringstream os;
  std::string numbers = pad_right("", kLabel), names = pad_right("", kLabel);
  for (std::size_t c = 0; c < results.size(); ++c) {
    numbers += pad_left("(" + std::to_string(c + 1) + ")", col);
    names += pad_left(results[c].first, col);
  }
  os << std::string(width, '=') << '\n' << rstrip(numbers) << '\n' << rstrip(names) << '\n'
     << std::string(width, '-') << '\n';
  if (results.empty()) return os.str();

  // Table order puts the constant last.
  constexpr std::array<Term, 4> kOrder = {kPostCovid, kRedState, kInteraction, kConstant};
  constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kLabels = {{
      {"Post-covid", ""},
      {"> 0.5 Trump", ""},
      {"Post-covid", "  & > 0.5 Trump"},
      {"Constant", ""},
  }};
  for (std::size_t r = 0; r < kOrder.size(); ++r) {
    const Term term = kOrder[r];
    std::string coef_line = pad_right(std::string(kLabels[r].first), kLabel);
    std::string se_line = pad_right(std::string(kLabels[r].second), kLabel);
    for (const auto& [topic, fit] : results) {
      coef_line += pad_left(fmt("%.1f", fit.coefficients[term]) + pad_right(fit.stars[term], 3), col);
      se_line += pad_left("(" + fmt("%.1f", fit.standard_errors[term]) + ")   ", col);
    }
    os << rstrip(coef_line) << '\n' << rstrip(se_line) << '\n';
    if (r + 1 < kOrder.size()) os << '\n';
  }
  os << std::string(width, '=') << '\n'
     << "Standard errors in parentheses\n"
     << "* p<0.05, ** p<0.01, *** p<0.001\n";
  return os.str();
}

std::string report_rows_tsv(const TopicResults& results) {
  std::ostringstream os;
  os << "topic\tterm\tcoef\tse\tt\tp\tstars\n";
  for (const auto& [topic, fit] : results) {
    for (std::size_t i = 0; i < 4; ++i) {
      os << topic << '\t' << kTermNames[i] << '\t' << fmt("%.17g", fit.coefficients[i]) << '\t'
         << fmt("%.17g", fit.standard_errors[i]) << '\t' << fmt("%.17g", fit.t_stats[i]) << '\t'
         << fmt("%.17g", fit.p_values[i]) << '\t' << fit.stars[i] << '\n';
    }
  }
  return os.str();
}

json report_json(const TopicResults& results) {
  json out = json::array();
  for (const auto& [topic, fit] : results) {
    json terms = json::array();
    for (std::size_t i = 0; i < 4; ++i) {
      terms.push_back(json{{"term", std::string(kTermNames[i])},
                           {"coef", fit.coefficients[i]},
                           {"se", fit.standard_errors[i]},
                           {"t", std::isfinite(fit.t_stats[i]) ? json(fit.t_stats[i]) : json(nullptr)},
                           {"p", fit.p_values[i]},
                           {"stars", fit.stars[i]}});
    }
    out.push_back(json{{"topic", topic}, {"n", fit.n}, {"df", fit.df}, {"rss", fit.rss},
                       {"terms", std::move(terms)}});
  }
  return out;
}

}  // namespace geocohort
