#include "geocohort/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <tuple>

#include "geocohort/errors.hpp"
#include "geocohort/text.hpp"

namespace geocohort {

using nlohmann::json;

namespace {

// Days since 1970-01-01 to civil date (proleptic Gregorian).
void civil_from_days(std::int64_t z, int& y, int& m) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  const std::int64_t mm = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yoe + era * 400 + (mm <= 2 ? 1 : 0));
  m = static_cast<int>(mm);
}

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorKind::MalformedRecord, why);
}

std::string required_string(const json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) malformed(std::string("missing field '") + key + "'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  malformed(std::string("field '") + key + "' is not text");
}

std::optional<std::string> optional_string(const json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) malformed(std::string("field '") + key + "' is not text");
  return it->get<std::string>();
}

std::int64_t parse_timestamp(const json& value) {
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (!std::isfinite(d)) malformed("created_utc is not finite");
    return static_cast<std::int64_t>(std::floor(d));
  }
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc() && ptr == s.data() + s.size()) return out;
    malformed("created_utc is not an integer: " + s);
  }
  malformed("created_utc has unsupported type");
}

std::string normalize_subreddit(std::string name) {
  name = to_lower_ascii(name);
  if (name.starts_with("/r/")) name.erase(0, 3);
  else if (name.starts_with("r/")) name.erase(0, 2);
  return name;
}

void sort_posts(std::vector<Post>& posts) {
  std::sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) {
    return std::tie(a.created_utc, a.id, a.subreddit, a.body) <
           std::tie(b.created_utc, b.id, b.subreddit, b.body);
  });
}

UserHistory make_history(std::string author, std::vector<Post> posts) {
  sort_posts(posts);
  UserHistory h;
  h.author = std::move(author);
  h.post_count = posts.size();
  if (!posts.empty()) {
    h.first_post = posts.front().created_utc;
    h.last_post = posts.back().created_utc;
  }
  h.posts = std::move(posts);
  return h;
}

}  // namespace

YearMonth YearMonth::from_epoch(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  if (epoch_seconds % 86400 < 0) --days;
  YearMonth ym;
  civil_from_days(days, ym.year, ym.month);
  return ym;
}

YearMonth YearMonth::parse(std::string_view text) {
  YearMonth ym;
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw Error(ErrorKind::InvalidArgument, "month must be YYYY-MM: " + std::string(text));
  }
  auto y = text.substr(0, dash);
  auto m = text.substr(dash + 1);
  auto r1 = std::from_chars(y.data(), y.data() + y.size(), ym.year);
  auto r2 = std::from_chars(m.data(), m.data() + m.size(), ym.month);
  if (r1.ec != std::errc() || r1.ptr != y.data() + y.size() || r2.ec != std::errc() ||
      r2.ptr != m.data() + m.size() || ym.month < 1 || ym.month > 12) {
    throw Error(ErrorKind::InvalidArgument, "month must be YYYY-MM: " + std::string(text));
  }
  return ym;
}

YearMonth YearMonth::next() const {
  return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
}

std::string YearMonth::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

std::vector<YearMonth> MonthRange::months() const {
  std::vector<YearMonth> out;
  for (YearMonth m = first; m <= last; m = m.next()) out.push_back(m);
  return out;
}

std::string_view to_string(PostKind kind) {
  return kind == PostKind::submission ? "submission" : "comment";
}

Post post_from_json(const json& record) {
  if (!record.is_object()) malformed("record is not an object");
  Post post;
  post.id = required_string(record, "id");
  post.author = required_string(record, "author");
  if (post.author.empty()) malformed("author is empty");
  post.subreddit = normalize_subreddit(required_string(record, "subreddit"));
  auto ts = record.find("created_utc");
  if (ts == record.end() || ts->is_null()) malformed("missing field 'created_utc'");
  post.created_utc = parse_timestamp(*ts);
  if (post.created_utc <= 0) malformed("created_utc must be positive");

  post.title = optional_string(record, "title");
  auto body = optional_string(record, "body");
  if (!body) body = optional_string(record, "selftext");
  if (!body && !post.title) malformed("record has neither body nor title");
  post.body = body.value_or("");

  if (auto kind = optional_string(record, "kind")) {
    if (*kind == "submission") post.kind = PostKind::submission;
    else if (*kind == "comment") post.kind = PostKind::comment;
    else malformed("unknown kind '" + *kind + "'");
  } else {
    post.kind = post.title ? PostKind::submission : PostKind::comment;
  }
  if (post.kind == PostKind::comment && post.title) malformed("comment carries a title");

  if (auto it = record.find("pretagged_entities"); it != record.end() && !it->is_null()) {
    if (!it->is_array()) malformed("pretagged_entities is not a list");
    std::vector<std::string> spans;
    for (const auto& span : *it) {
      if (!span.is_string()) malformed("pretagged entity is not text");
      spans.push_back(span.get<std::string>());
    }
    post.pretagged_entities = std::move(spans);
  }
  return post;
}

Post parse_post_record(std::string_view line) {
  json record = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (record.is_discarded()) malformed("unparseable record");
  return post_from_json(record);
}

json post_to_json(const Post& post) {
  json j = json::object();
  j["id"] = post.id;
  j["author"] = post.author;
  j["subreddit"] = post.subreddit;
  j["kind"] = std::string(to_string(post.kind));
  j["created_utc"] = post.created_utc;
  if (post.title) j["title"] = *post.title;
  j["body"] = post.body;
  if (post.pretagged_entities) j["pretagged_entities"] = *post.pretagged_entities;
  return j;
}

std::string serialize_post(const Post& post) { return post_to_json(post).dump(); }

std::vector<UserHistory> group_by_user(std::vector<Post> posts) {
  std::map<std::string, std::vector<Post>> by_author;
  for (auto& post : posts) {
    if (post.author == kDeletedAuthor) continue;
    by_author[post.author].push_back(std::move(post));
  }
  std::vector<UserHistory> out;
  out.reserve(by_author.size());
  for (auto& [author, user_posts] : by_author) {
    out.push_back(make_history(author, std::move(user_posts)));
  }
  return out;
}

std::vector<UserHistory> merge_histories(std::vector<UserHistory> a,
                                         std::vector<UserHistory> b) {
  std::map<std::string, std::vector<Post>> by_author;
  for (auto* side : {&a, &b}) {
    for (auto& h : *side) {
      auto& dst = by_author[h.author];
      std::move(h.posts.begin(), h.posts.end(), std::back_inserter(dst));
    }
  }
  std::vector<UserHistory> out;
  for (auto& [author, user_posts] : by_author) {
    out.push_back(make_history(author, std::move(user_posts)));
  }
  return out;
}

json history_to_json(const UserHistory& history) {
  json posts = json::array();
  for (const auto& p : history.posts) posts.push_back(post_to_json(p));
  return json{{"author", history.author},
              {"post_count", history.post_count},
              {"first_post", history.first_post},
              {"last_post", history.last_post},
              {"posts", std::move(posts)}};
}

UserHistory history_from_json(const json& record) {
  if (!record.is_object() || !record.contains("author") || !record.contains("posts")) {
    malformed("history record needs 'author' and 'posts'");
  }
  std::vector<Post> posts;
  for (const auto& p : record.at("posts")) posts.push_back(post_from_json(p));
  auto author = record.at("author").get<std::string>();
  for (const auto& p : posts) {
    if (p.author != author) malformed("history for '" + author + "' holds a post by '" + p.author + "'");
  }
  return make_history(std::move(author), std::move(posts));
}

MonthlyVolume monthly_volume(std::span<const Post> posts, MonthRange range) {
  if (range.last < range.first) {
    throw Error(ErrorKind::InvalidArgument, "month range start is after its end");
  }
  MonthlyVolume volume;
  for (YearMonth m : range.months()) volume[m] = 0;
  for (const auto& post : posts) {
    const YearMonth m = YearMonth::from_epoch(post.created_utc);
    if (range.contains(m)) ++volume[m];
  }
  return volume;
}

std::vector<Post> read_posts(std::istream& in, bool strict, IngestReport& report) {
  std::vector<Post> posts;
  std::string line;
  while (std::getline(in, line)) {
    ++report.lines;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      ++report.blank;
      continue;
    }
    try {
      posts.push_back(parse_post_record(line));
      ++report.parsed;
    } catch (const Error& e) {
      if (strict) {
        throw Error(e.kind(), "line " + std::to_string(report.lines) + ": " + e.what());
      }
      ++report.malformed;
      if (report.sample_errors.size() < 10) {
        report.sample_errors.push_back("line " + std::to_string(report.lines) + ": " + e.what());
      }
    }
  }
  return posts;
}

std::vector<Post> read_posts_file(const std::filesystem::path& path, bool strict,
                                  IngestReport& report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  return read_posts(in, strict, report);
}

std::vector<UserHistory> read_histories_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  std::vector<UserHistory> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(n) + ": unparseable");
    }
    out.push_back(history_from_json(j));
  }
  return out;
}

}  // namespace geocohort
