#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace geocohort {

/// Calendar month in UTC.
struct YearMonth {
  int year = 1970;
  int month = 1;  // 1..12

  static YearMonth from_epoch(std::int64_t epoch_seconds);
  /// Parses "YYYY-MM".
  static YearMonth parse(std::string_view text);

  YearMonth next() const;
  std::string to_string() const;
  /// Months since 0000-01, handy for arithmetic on ranges.
  int ordinal() const { return year * 12 + (month - 1); }

  auto operator<=>(const YearMonth&) const = default;
};

/// Inclusive range of months.
struct MonthRange {
  YearMonth first;
  YearMonth last;

  bool contains(YearMonth m) const { return first <= m && m <= last; }
  std::vector<YearMonth> months() const;
};

enum class PostKind { submission, comment };

std::string_view to_string(PostKind kind);

struct Post {
  std::string id;
  std::string author;
  std::string subreddit;  // lowercase, no "r/" prefix
  PostKind kind = PostKind::comment;
  std::int64_t created_utc = 0;
  std::optional<std::string> title;
  std::string body;
  std::optional<std::vector<std::string>> pretagged_entities;

  bool operator==(const Post&) const = default;
};

/// Parses one line-delimited archive record. Accepts Pushshift field names
/// ("selftext" for submission bodies, string or float timestamps).
/// Throws Error(MalformedRecord) on any parse failure or missing field.
Post parse_post_record(std::string_view line);
Post post_from_json(const nlohmann::json& record);
nlohmann::json post_to_json(const Post& post);
/// Single-line record; parse_post_record(serialize_post(p)) == p.
std::string serialize_post(const Post& post);

inline constexpr std::string_view kDeletedAuthor = "[deleted]";

struct UserHistory {
  std::string author;
  std::vector<Post> posts;  // ascending created_utc, ties by id
  std::int64_t first_post = 0;
  std::int64_t last_post = 0;
  std::size_t post_count = 0;

  bool operator==(const UserHistory&) const = default;
};

/// One history per distinct author, sorted by author. Posts by the
/// "[deleted]" pseudo-author are dropped.
std::vector<UserHistory> group_by_user(std::vector<Post> posts);

/// Associative merge of two shard-local groupings.
std::vector<UserHistory> merge_histories(std::vector<UserHistory> a,
                                         std::vector<UserHistory> b);

nlohmann::json history_to_json(const UserHistory& history);
UserHistory history_from_json(const nlohmann::json& record);

using MonthlyVolume = std::map<YearMonth, std::int64_t>;

/// Post counts per UTC month over the inclusive range; months without posts
/// are present with count 0 and posts outside the range are ignored.
MonthlyVolume monthly_volume(std::span<const Post> posts, MonthRange range);

/// Summary of a skip-and-count ingestion pass.
struct IngestReport {
  std::size_t lines = 0;
  std::size_t parsed = 0;
  std::size_t malformed = 0;
  std::size_t blank = 0;
  std::vector<std::string> sample_errors;  // first few, "line N: reason"
};

/// Reads line-delimited records. In strict mode the first malformed line
/// throws; otherwise it is skipped and counted in the report.
std::vector<Post> read_posts(std::istream& in, bool strict, IngestReport& report);
std::vector<Post> read_posts_file(const std::filesystem::path& path, bool strict,
                                  IngestReport& report);

std::vector<UserHistory> read_histories_file(const std::filesystem::path& path);

}  // namespace geocohort
