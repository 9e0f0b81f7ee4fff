#include "geocohort/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "geocohort/evaluation.hpp"
#include "geocohort/gazetteer.hpp"
#include "geocohort/metrics.hpp"
#include "geocohort/regression.hpp"
#include "geocohort/tables.hpp"
#include "geocohort/text.hpp"
#include "geocohort/topics.hpp"

namespace geocohort {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::ConfigInvalid, what); }

// ---- config -------------------------------------------------------------

void overlay(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object()) config_error((prefix.empty() ? "config" : prefix) + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    auto it = base.find(key);
    if (it == base.end()) config_error("unknown config key '" + name + "'");
    if (it->is_object()) {
      overlay(*it, value, name);
    } else if (it->is_null()) {
      // Optional settings: null or a string.
      if (!value.is_null() && !value.is_string()) config_error(name + " must be a string or null");
      *it = value;
    } else if (it->is_number()) {
      if (!value.is_number()) config_error(name + " must be a number");
      *it = value;
    } else if (it->type() != value.type()) {
      config_error(name + " must be a " + std::string(it->type_name()));
    } else {
      *it = value;
    }
  }
}

double number(const json& doc, const char* section, const char* key) {
  return doc.at(section).at(key).get<double>();
}

int integer(const json& doc, const char* section, const char* key) {
  const auto& v = doc.at(section).at(key);
  const double d = v.get<double>();
  if (!v.is_number_integer() && d != std::floor(d)) {
    config_error(std::string(section) + "." + key + " must be an integer");
  }
  if (d < -1e9 || d > 1e9) config_error(std::string(section) + "." + key + " is out of range");
  return static_cast<int>(d);
}

void check(bool ok, const std::string& what) {
  if (!ok) config_error(what);
}

YearMonth month_setting(const json& v, const std::string& name) {
  try {
    return YearMonth::parse(v.get<std::string>());
  } catch (const Error&) {
    config_error(name + " must be YYYY-MM");
  }
}

// ---- files --------------------------------------------------------------

fs::path artifact(const PipelineConfig& config, std::string_view name) {
  return config.paths.output_dir / std::string(name);
}

const fs::path& required_path(const fs::path& path, const char* key) {
  if (path.empty()) config_error(std::string("paths.") + key + " is not set");
  return path;
}

void require_exists(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::MissingInput, "missing input " + path.string());
}

std::vector<json> read_jsonl(const fs::path& path) {
  require_exists(path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception&) {
      throw Error(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(n) + ": unparseable");
    }
  }
  return out;
}

template <typename Records>
std::string to_jsonl(const Records& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes every output only after all of them are rendered, so a failure
/// part-way leaves earlier artifacts untouched.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void add(std::string_view name, std::string content) {
    files_.emplace_back(dir_ / std::string(name), std::move(content));
  }

  void commit() {
    fs::create_directories(dir_);
    for (const auto& [path, content] : files_) write_file_atomic(path, content);
  }

 private:
  fs::path dir_;
  std::vector<std::pair<fs::path, std::string>> files_;
};

// ---- shared loaders -----------------------------------------------------

NormalizationTables load_tables(const PipelineConfig& config) {
  auto tables = config.paths.tables.empty() ? NormalizationTables::defaults()
                                            : NormalizationTables::load(config.paths.tables);
  if (!config.paths.location_subreddits.empty()) {
    tables.location_subreddits = load_location_subreddits(config.paths.location_subreddits);
  }
  return tables;
}

GazetteerIndex load_gazetteer(const PipelineConfig& config) {
  const auto& path = required_path(config.paths.gazetteer, "gazetteer");
  require_exists(path);
  const Admin1Names admin1 = config.paths.admin1_codes.empty()
                                 ? us_admin1_names()
                                 : load_admin1_names(config.paths.admin1_codes);
  GazetteerLoadReport report;
  auto index = GazetteerIndex::load(path, admin1, &report);
  if (config.strict && report.malformed > 0) {
    throw Error(ErrorKind::MalformedGazetteerRow,
                path.string() + ": " + std::to_string(report.malformed) + " malformed rows" +
                    (report.sample_errors.empty() ? "" : " (" + report.sample_errors.front() + ")"));
  }
  return index;
}

struct RankedGuess {
  int rank = 1;
  LocationGuess guess;
};

std::vector<RankedGuess> read_guesses(const fs::path& path) {
  std::vector<RankedGuess> out;
  for (const auto& j : read_jsonl(path)) {
    try {
      out.push_back(RankedGuess{j.at("rank").get<int>(), guess_from_json(j)});
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedRecord, path.string() + ": " + e.what());
    }
  }
  return out;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must go
/// to per-index slots; the lowest-index failure is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::map<std::pair<std::string, int>, TrainingLabel> load_labels(const fs::path& path) {
  require_exists(path);
  std::ifstream in(path);
  std::map<std::pair<std::string, int>, TrainingLabel> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1 || trim(line).empty()) continue;  // header
    const auto cols = split(line, '\t');
    const auto where = path.string() + ":" + std::to_string(n);
    if (cols.size() != 2 && cols.size() != 3) {
      throw Error(ErrorKind::MalformedRecord, where + ": expected 2 or 3 columns");
    }
    try {
      // Two columns label the user's top-ranked guess.
      const int rank = cols.size() == 3 ? std::stoi(cols[1]) : 1;
      out.insert_or_assign({trim(cols[0]), rank}, TrainingLabel(std::stod(cols.back())));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::MalformedRecord, where + ": bad rank or label");
    }
  }
  return out;
}

std::map<std::string, Annotation> annotations_by_author(const PipelineConfig& config,
                                                        const NormalizationTables& tables) {
  const auto& path = required_path(config.paths.annotations, "annotations");
  require_exists(path);
  std::map<std::string, Annotation> out;
  for (auto& a : load_annotations(path, tables)) {
    const std::string author = a.author;
    if (!out.emplace(author, std::move(a)).second) {
      throw Error(ErrorKind::MalformedRecord, "duplicate annotation for '" + author + "'");
    }
  }
  return out;
}

json auc_or_null(std::span<const double> scores, std::span<const int> labels) {
  try {
    return evaluate_auc(scores, labels);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingleClass || e.kind() == ErrorKind::EmptyInput) return nullptr;
    throw;
  }
}

ModelVariant variant_of(const LocationGuess& g) {
  return g.has_guess() ? ModelVariant::positive : ModelVariant::negative;
}

std::string_view model_artifact(ModelVariant v) {
  return v == ModelVariant::positive ? artifacts::kModelPositive : artifacts::kModelNegative;
}

std::string cell(const std::optional<std::string>& s) { return s.value_or(""); }

}  // namespace

// ---- PipelineConfig -----------------------------------------------------

json PipelineConfig::default_json() {
  const PipelineConfig d;
  return json{
      {"paths",
       {{"corpus", ""},
        {"gazetteer", ""},
        {"admin1_codes", ""},
        {"tables", ""},
        {"location_subreddits", ""},
        {"annotations", ""},
        {"labels", ""},
        {"state_population", ""},
        {"vote_shares", ""},
        {"output_dir", d.paths.output_dir.string()}}},
      {"dbscan",
       {{"eps", d.inference.eps},
        {"min_pts", d.inference.min_pts},
        {"duplicate_by_count", d.inference.duplicate_by_count}}},
      {"confidence",
       {{"n_trees", d.forest.n_trees},
        {"max_depth", d.forest.max_depth},
        {"min_leaf", d.forest.min_leaf},
        {"features_per_split", d.forest.features_per_split},
        {"holdout_fraction", d.holdout_fraction},
        {"threshold", d.threshold}}},
      {"topics",
       {{"scale", d.topic_scale},
        {"covid_cutoff", d.covid_cutoff.to_string()},
        {"first_month", nullptr},
        {"last_month", nullptr},
        {"vote_share_threshold", d.vote_share_threshold}}},
      {"extraction_mode", std::string(to_string(d.extraction_mode))},
      {"strict", d.strict},
      {"seed", d.seed},
      {"workers", d.workers},
  };
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  json doc = default_json();
  overlay(doc, j, "");
  PipelineConfig c;

  const auto& p = doc.at("paths");
  auto path = [&](const char* key) { return fs::path(p.at(key).get<std::string>()); };
  c.paths.corpus = path("corpus");
  c.paths.gazetteer = path("gazetteer");
  c.paths.admin1_codes = path("admin1_codes");
  c.paths.tables = path("tables");
  c.paths.location_subreddits = path("location_subreddits");
  c.paths.annotations = path("annotations");
  c.paths.labels = path("labels");
  c.paths.state_population = path("state_population");
  c.paths.vote_shares = path("vote_shares");
  c.paths.output_dir = path("output_dir");
  check(!c.paths.output_dir.empty(), "paths.output_dir must not be empty");

  c.inference.eps = number(doc, "dbscan", "eps");
  c.inference.min_pts = integer(doc, "dbscan", "min_pts");
  c.inference.duplicate_by_count = doc.at("dbscan").at("duplicate_by_count").get<bool>();
  check(std::isfinite(c.inference.eps) && c.inference.eps > 0, "dbscan.eps must be positive");
  check(c.inference.min_pts >= 1, "dbscan.min_pts must be at least 1");

  c.forest.n_trees = integer(doc, "confidence", "n_trees");
  c.forest.max_depth = integer(doc, "confidence", "max_depth");
  c.forest.min_leaf = integer(doc, "confidence", "min_leaf");
  c.forest.features_per_split = integer(doc, "confidence", "features_per_split");
  c.holdout_fraction = number(doc, "confidence", "holdout_fraction");
  c.threshold = number(doc, "confidence", "threshold");
  check(c.forest.n_trees >= 1, "confidence.n_trees must be at least 1");
  check(c.forest.max_depth >= 0, "confidence.max_depth must be non-negative");
  check(c.forest.min_leaf >= 1, "confidence.min_leaf must be at least 1");
  // The negative model has three features, so a larger subset cannot apply to both.
  const int max_subset = static_cast<int>(feature_names(ModelVariant::negative).size());
  check(c.forest.features_per_split >= 0 && c.forest.features_per_split <= max_subset,
        "confidence.features_per_split must be in [0, " + std::to_string(max_subset) + "]");
  check(c.holdout_fraction > 0 && c.holdout_fraction < 1,
        "confidence.holdout_fraction must be in (0, 1)");
  check(c.threshold >= 0 && c.threshold <= 1, "confidence.threshold must be in [0, 1]");

  const auto& t = doc.at("topics");
  c.topic_scale = number(doc, "topics", "scale");
  check(std::isfinite(c.topic_scale) && c.topic_scale > 0, "topics.scale must be positive");
  c.covid_cutoff = month_setting(t.at("covid_cutoff"), "topics.covid_cutoff");
  const auto& first = t.at("first_month");
  const auto& last = t.at("last_month");
  check(first.is_null() == last.is_null(), "topics.first_month and topics.last_month go together");
  if (!first.is_null()) {
    c.topic_months = MonthRange{month_setting(first, "topics.first_month"),
                                month_setting(last, "topics.last_month")};
    check(c.topic_months->first <= c.topic_months->last,
          "topics.first_month must not be after topics.last_month");
  }
  c.vote_share_threshold = number(doc, "topics", "vote_share_threshold");
  check(c.vote_share_threshold >= 0 && c.vote_share_threshold <= 1,
        "topics.vote_share_threshold must be in [0, 1]");

  try {
    c.extraction_mode = extraction_mode_from_string(doc.at("extraction_mode").get<std::string>());
  } catch (const Error&) {
    config_error("extraction_mode must be gazetteer_scan or pretagged");
  }
  c.strict = doc.at("strict").get<bool>();
  const auto& seed = doc.at("seed");
  check(seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<std::int64_t>() >= 0),
        "seed must be a non-negative integer");
  c.seed = seed.get<std::uint64_t>();
  c.forest.seed = c.seed;
  const auto& workers = doc.at("workers");
  check(workers.is_number_integer(), "workers must be an integer");
  check(workers.get<std::int64_t>() >= 1 && workers.get<std::int64_t>() <= 256,
        "workers must be in [1, 256]");
  c.workers = workers.get<int>();
  return c;
}

json PipelineConfig::to_json() const {
  json doc = default_json();
  auto& p = doc["paths"];
  p["corpus"] = paths.corpus.string();
  p["gazetteer"] = paths.gazetteer.string();
  p["admin1_codes"] = paths.admin1_codes.string();
  p["tables"] = paths.tables.string();
  p["location_subreddits"] = paths.location_subreddits.string();
  p["annotations"] = paths.annotations.string();
  p["labels"] = paths.labels.string();
  p["state_population"] = paths.state_population.string();
  p["vote_shares"] = paths.vote_shares.string();
  p["output_dir"] = paths.output_dir.string();
  doc["dbscan"] = {{"eps", inference.eps},
                   {"min_pts", inference.min_pts},
                   {"duplicate_by_count", inference.duplicate_by_count}};
  doc["confidence"] = {{"n_trees", forest.n_trees},
                       {"max_depth", forest.max_depth},
                       {"min_leaf", forest.min_leaf},
                       {"features_per_split", forest.features_per_split},
                       {"holdout_fraction", holdout_fraction},
                       {"threshold", threshold}};
  auto& t = doc["topics"];
  t["scale"] = topic_scale;
  t["covid_cutoff"] = covid_cutoff.to_string();
  t["first_month"] = topic_months ? json(topic_months->first.to_string()) : json(nullptr);
  t["last_month"] = topic_months ? json(topic_months->last.to_string()) : json(nullptr);
  t["vote_share_threshold"] = vote_share_threshold;
  doc["extraction_mode"] = std::string(to_string(extraction_mode));
  doc["strict"] = strict;
  doc["seed"] = seed;
  doc["workers"] = workers;
  return doc;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    config_error("override must look like key.path=value: " + std::string(assignment));
  }
  const auto keys = split(assignment.substr(0, eq), '.');
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &doc;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (keys[i].empty()) config_error("empty key in override: " + std::string(assignment));
    if (!node->is_object()) config_error("override path crosses a value: " + std::string(assignment));
    node = &(*node)[keys[i]];
    if (node->is_null()) *node = json::object();
  }
  if (keys.back().empty()) config_error("empty key in override: " + std::string(assignment));
  if (!node->is_object()) config_error("override path crosses a value: " + std::string(assignment));
  (*node)[keys.back()] = std::move(value);
}

PipelineConfig PipelineConfig::load(const std::optional<fs::path>& path,
                                    const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorKind::MissingInput, "cannot open config " + path->string());
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      config_error("config " + path->string() + " is not valid JSON: " + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return from_json(doc);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error(ErrorKind::InvalidArgument, "short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

json user_mentions_to_json(const UserMentions& u) {
  json mentions = json::array();
  for (const auto& m : u.mentions) mentions.push_back(mention_to_json(m));
  return json{{"author", u.stats.author},
              {"post_count", u.stats.post_count},
              {"first_post", u.stats.first_post},
              {"last_post", u.stats.last_post},
              {"mentions", std::move(mentions)}};
}

UserMentions user_mentions_from_json(const json& j) {
  try {
    UserMentions u;
    u.stats.author = j.at("author").get<std::string>();
    u.stats.post_count = j.at("post_count").get<std::int64_t>();
    u.stats.first_post = j.at("first_post").get<std::int64_t>();
    u.stats.last_post = j.at("last_post").get<std::int64_t>();
    for (const auto& m : j.at("mentions")) u.mentions.push_back(mention_from_json(m));
    return u;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, std::string("mentions record: ") + e.what());
  }
}

// ---- commands -----------------------------------------------------------

void run_ingest(const PipelineConfig& config, std::ostream& log) {
  const auto& corpus = required_path(config.paths.corpus, "corpus");
  require_exists(corpus);
  std::vector<fs::path> files;
  if (fs::is_directory(corpus)) {
    for (const auto& entry : fs::directory_iterator(corpus)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".jsonl" || ext == ".ndjson" || ext == ".json")) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::MissingInput, "no .jsonl shards in " + corpus.string());
  } else {
    files.push_back(corpus);
  }

  IngestReport total;
  std::vector<UserHistory> histories;
  std::vector<Post> all_posts;
  for (const auto& file : files) {
    IngestReport report;
    auto posts = read_posts_file(file, config.strict, report);
    total.lines += report.lines;
    total.parsed += report.parsed;
    total.malformed += report.malformed;
    total.blank += report.blank;
    for (const auto& e : report.sample_errors) {
      if (total.sample_errors.size() < 10) total.sample_errors.push_back(file.filename().string() + " " + e);
    }
    all_posts.insert(all_posts.end(), posts.begin(), posts.end());
    histories = merge_histories(std::move(histories), group_by_user(std::move(posts)));
  }
  if (all_posts.empty()) throw Error(ErrorKind::EmptyInput, "corpus has no valid posts");

  auto [lo, hi] = std::minmax_element(all_posts.begin(), all_posts.end(), [](const Post& a, const Post& b) {
    return a.created_utc < b.created_utc;
  });
  const MonthRange range{YearMonth::from_epoch(lo->created_utc), YearMonth::from_epoch(hi->created_utc)};
  std::string volume = "month\tposts\n";
  for (const auto& [month, count] : monthly_volume(all_posts, range)) {
    volume += month.to_string() + '\t' + std::to_string(count) + '\n';
  }

  std::size_t retained = 0;
  std::vector<json> records;
  for (const auto& h : histories) {
    retained += h.post_count;
    records.push_back(history_to_json(h));
  }
  json report{{"files", files.size()},
              {"lines", total.lines},
              {"parsed", total.parsed},
              {"malformed", total.malformed},
              {"blank", total.blank},
              {"dropped_deleted", total.parsed - retained},
              {"users", histories.size()},
              {"first_month", range.first.to_string()},
              {"last_month", range.last.to_string()},
              {"sample_errors", total.sample_errors}};

  OutputSet out(config.paths.output_dir);
  out.add(artifacts::kHistories, to_jsonl(records));
  out.add(artifacts::kVolume, std::move(volume));
  out.add(artifacts::kIngestReport, report.dump(2) + '\n');
  out.commit();
  log << "ingest: " << total.parsed << " posts (" << total.malformed << " malformed) from "
      << files.size() << " file(s), " << histories.size() << " users\n";
}

void run_extract(const PipelineConfig& config, std::ostream& log) {
  const auto histories_path = artifact(config, artifacts::kHistories);
  require_exists(histories_path);
  const auto index = load_gazetteer(config);
  const auto tables = load_tables(config);
  const auto histories = read_histories_file(histories_path);

  std::vector<UserMentions> users(histories.size());
  parallel_for(histories.size(), config.workers, [&](std::size_t i) {
    users[i].stats = UserStats::of(histories[i]);
    users[i].mentions = user_mentions(histories[i], config.extraction_mode, tables, index);
  });
  std::size_t mentions = 0;
  std::vector<json> records;
  for (const auto& u : users) {
    mentions += u.mentions.size();
    records.push_back(user_mentions_to_json(u));
  }
  OutputSet out(config.paths.output_dir);
  out.add(artifacts::kMentions, to_jsonl(records));
  out.commit();
  log << "extract: " << users.size() << " users, " << mentions << " distinct mentions\n";
}

void run_infer(const PipelineConfig& config, std::ostream& log) {
  const auto mentions_path = artifact(config, artifacts::kMentions);
  require_exists(mentions_path);
  const auto index = load_gazetteer(config);
  std::vector<UserMentions> users;
  for (const auto& j : read_jsonl(mentions_path)) users.push_back(user_mentions_from_json(j));

  std::vector<std::vector<LocationGuess>> ranked(users.size());
  parallel_for(users.size(), config.workers, [&](std::size_t i) {
    ranked[i] = rank_user_locations(users[i].stats, users[i].mentions, index, config.inference);
  });
  std::vector<json> records;
  std::size_t with_guess = 0;
  for (const auto& guesses : ranked) {
    if (guesses.front().has_guess()) ++with_guess;
    for (std::size_t r = 0; r < guesses.size(); ++r) {
      records.push_back(guess_to_json(guesses[r], static_cast<int>(r + 1)));
    }
  }
  OutputSet out(config.paths.output_dir);
  out.add(artifacts::kGuesses, to_jsonl(records));
  out.commit();
  log << "infer: " << users.size() << " users, " << with_guess << " with a location, "
      << records.size() << " guesses\n";
}

void run_train_confidence(const PipelineConfig& config, std::ostream& log) {
  const auto guesses_path = artifact(config, artifacts::kGuesses);
  require_exists(guesses_path);
  const bool use_labels = !config.paths.labels.empty();
  if (!use_labels && config.paths.annotations.empty()) {
    config_error("train-confidence needs paths.labels or paths.annotations");
  }
  const auto tables = load_tables(config);
  std::map<std::pair<std::string, int>, TrainingLabel> labels;
  std::map<std::string, Annotation> annotations;
  if (use_labels) labels = load_labels(config.paths.labels);
  else annotations = annotations_by_author(config, tables);
  const auto guesses = read_guesses(guesses_path);

  std::array<std::vector<TrainingRow>, 2> rows;
  for (const auto& [rank, g] : guesses) {
    std::optional<TrainingLabel> label;
    if (use_labels) {
      if (auto it = labels.find({g.user, rank}); it != labels.end()) label = it->second;
    } else if (auto it = annotations.find(g.user); it != annotations.end()) {
      label = label_for_grade(grade_guess(&g, it->second));
    }
    if (label) rows[static_cast<std::size_t>(variant_of(g))].push_back(TrainingRow{g.features, *label});
  }

  OutputSet out(config.paths.output_dir);
  json report = json::object();
  for (const auto variant : {ModelVariant::positive, ModelVariant::negative}) {
    const auto& all = rows[static_cast<std::size_t>(variant)];
    json entry{{"rows", all.size()}};
    if (all.empty()) {
      entry["status"] = "skipped: no labeled rows";
      report[std::string(to_string(variant))] = std::move(entry);
      continue;
    }
    const auto [train_idx, test_idx] = split_holdout(all.size(), config.holdout_fraction, config.seed);
    std::vector<TrainingRow> train, test;
    for (auto i : train_idx) train.push_back(all[i]);
    for (auto i : test_idx) test.push_back(all[i]);
    // The holdout AUC is a diagnostic; a split too small to train on leaves it null.
    json holdout_auc = nullptr;
    if (train.size() >= kMinTrainingRows) {
      const auto holdout_model = train_forest(train, variant, config.forest, config.workers);
      std::vector<double> scores;
      std::vector<TrainingLabel> truth;
      for (const auto& r : test) {
        scores.push_back(predict(holdout_model, r.features));
        truth.push_back(r.label);
      }
      holdout_auc = auc_or_null(scores, binarize_labels(truth));
    }

    // The shipped model is refit on every labeled row.
    const auto model = train_forest(all, variant, config.forest, config.workers);
    json importances = json::object();
    const auto names = feature_names(variant);
    for (std::size_t f = 0; f < names.size(); ++f) {
      importances[std::string(names[f])] = model.feature_importances[f];
    }
    entry["status"] = "trained";
    entry["train_rows"] = train.size();
    entry["test_rows"] = test.size();
    entry["holdout_auc"] = std::move(holdout_auc);
    entry["feature_importances"] = std::move(importances);
    report[std::string(to_string(variant))] = std::move(entry);
    out.add(model_artifact(variant), forest_to_json(model).dump() + '\n');
  }
  report["holdout_fraction"] = config.holdout_fraction;
  report["seed"] = config.seed;
  report["label_source"] = use_labels ? "labels" : "annotations";
  out.add(artifacts::kConfidenceReport, report.dump(2) + '\n');
  out.commit();
  log << "train-confidence: " << rows[0].size() << " positive rows, " << rows[1].size()
      << " negative rows\n";
}

void run_score(const PipelineConfig& config, std::ostream& log) {
  const auto guesses_path = artifact(config, artifacts::kGuesses);
  require_exists(guesses_path);
  auto guesses = read_guesses(guesses_path);
  std::array<std::optional<Forest>, 2> models;
  for (const auto& [rank, g] : guesses) {
    auto& slot = models[static_cast<std::size_t>(variant_of(g))];
    if (!slot) slot = load_forest(artifact(config, model_artifact(variant_of(g))));
  }
  for (auto& [rank, g] : guesses) g.confidence = predict(*models[static_cast<std::size_t>(variant_of(g))], g.features);

  std::vector<json> scored, selected;
  for (std::size_t i = 0; i < guesses.size();) {
    std::size_t j = i;
    std::vector<LocationGuess> group;
    while (j < guesses.size() && guesses[j].guess.user == guesses[i].guess.user) {
      group.push_back(guesses[j].guess);
      scored.push_back(guess_to_json(guesses[j].guess, guesses[j].rank));
      ++j;
    }
    const auto& best = select_best(group);
    const auto offset = static_cast<std::size_t>(&best - group.data());
    selected.push_back(guess_to_json(best, guesses[i + offset].rank));
    i = j;
  }
  OutputSet out(config.paths.output_dir);
  out.add(artifacts::kScored, to_jsonl(scored));
  out.add(artifacts::kSelected, to_jsonl(selected));
  out.commit();
  log << "score: " << scored.size() << " guesses, " << selected.size() << " users\n";
}

void run_evaluate(const PipelineConfig& config, std::ostream& log) {
  const auto selected_path = artifact(config, artifacts::kSelected);
  require_exists(selected_path);
  const auto tables = load_tables(config);
  const auto annotations = annotations_by_author(config, tables);
  std::optional<std::map<std::string, std::int64_t>> population;
  if (!config.paths.state_population.empty()) {
    require_exists(config.paths.state_population);
    population = load_state_population(config.paths.state_population);
  }
  std::vector<LocationGuess> selected;
  std::map<std::string, std::size_t> by_author;
  for (auto& [rank, g] : read_guesses(selected_path)) {
    if (!g.confidence) throw Error(ErrorKind::SchemaMismatch, "selected guess for '" + g.user + "' is unscored");
    by_author[g.user] = selected.size();
    selected.push_back(std::move(g));
  }

  std::vector<Grade> grades;
  std::array<std::vector<double>, 2> scores;
  std::array<std::vector<TrainingLabel>, 2> truth;
  std::string grades_tsv = "author\tgrade\tconfidence\tcity\tadmin1\tcountry\n";
  for (const auto& [author, annotation] : annotations) {
    const LocationGuess* g = nullptr;
    if (auto it = by_author.find(author); it != by_author.end()) g = &selected[it->second];
    const Grade grade = grade_guess(g, annotation);
    grades.push_back(grade);
    grades_tsv += author + '\t' + std::string(to_string(grade)) + '\t' +
                  (g ? fmt_double(*g->confidence) : "") + '\t';
    if (g && g->has_guess()) {
      grades_tsv += cell(g->candidate->city) + '\t' + cell(g->candidate->admin1) + '\t' +
                    g->candidate->country_code;
    } else {
      grades_tsv += "\t\t";
    }
    grades_tsv += '\n';
    if (g) {
      const auto v = static_cast<std::size_t>(variant_of(*g));
      scores[v].push_back(*g->confidence);
      truth[v].push_back(label_for_grade(grade));
    }
  }
  const auto report = accuracy_report(grades);
  json report_json = report.to_json();
  for (const auto variant : {ModelVariant::positive, ModelVariant::negative}) {
    const auto v = static_cast<std::size_t>(variant);
    report_json["auc"][std::string(to_string(variant))] = auc_or_null(scores[v], binarize_labels(truth[v]));
  }

  OutputSet out(config.paths.output_dir);
  out.add(artifacts::kGrades, std::move(grades_tsv));
  out.add(artifacts::kAccuracyJson, report_json.dump(2) + '\n');
  out.add(artifacts::kAccuracyText, report.to_text());
  if (population) {
    const auto summary = cohort_summary(selected, config.threshold, *population);
    out.add(artifacts::kCohortJson, summary.to_json().dump(2) + '\n');
    out.add(artifacts::kCohortText, summary.to_text());
  }
  out.commit();
  log << "evaluate: " << report.total << " annotated users, full rate " << fmt_double(report.full_rate)
      << ", partial rate " << fmt_double(report.partial_rate) << "\n";
}

void run_topics(const PipelineConfig& config, std::ostream& log) {
  const auto histories_path = artifact(config, artifacts::kHistories);
  const auto selected_path = artifact(config, artifacts::kSelected);
  require_exists(histories_path);
  require_exists(selected_path);
  const auto& shares_path = required_path(config.paths.vote_shares, "vote_shares");
  require_exists(shares_path);
  const auto shares = load_vote_shares(shares_path);

  std::vector<LocationGuess> kept;
  for (auto& [rank, g] : read_guesses(selected_path)) {
    if (!g.confidence) throw Error(ErrorKind::SchemaMismatch, "selected guess for '" + g.user + "' is unscored");
    if (*g.confidence >= config.threshold) kept.push_back(std::move(g));
  }
  const auto split_users = split_by_cohort(kept, shares, config.vote_share_threshold);
  const auto histories = read_histories_file(histories_path);

  MonthRange range;
  if (config.topic_months) {
    range = *config.topic_months;
  } else {
    bool any = false;
    for (const auto& h : histories) {
      if (h.posts.empty()) continue;
      const auto first = YearMonth::from_epoch(h.first_post), last = YearMonth::from_epoch(h.last_post);
      if (!any || first < range.first) range.first = first;
      if (!any || range.last < last) range.last = last;
      any = true;
    }
    if (!any) throw Error(ErrorKind::EmptyInput, "no posts to count topics over");
  }

  const auto topic_map = TopicMap::defaults();
  const Lemmatizer lemmatizer(topic_map.all_keywords());
  std::map<std::string, const UserHistory*> history_of;
  for (const auto& h : histories) history_of[h.author] = &h;

  struct CohortCounts {
    std::string name;
    MonthlyVolume volume;
    std::map<std::string, MonthlyVolume> raw;
    std::size_t users = 0;
  };
  std::vector<CohortCounts> cohorts;
  for (const auto& [name, members] :
       {std::pair<std::string, const std::vector<LocationGuess>*>{"red", &split_users.red},
        std::pair<std::string, const std::vector<LocationGuess>*>{"blue", &split_users.blue}}) {
    std::vector<Post> posts;
    for (const auto& g : *members) {
      if (auto it = history_of.find(g.user); it != history_of.end()) {
        posts.insert(posts.end(), it->second->posts.begin(), it->second->posts.end());
      }
    }
    cohorts.push_back(CohortCounts{name, monthly_volume(posts, range),
                                   count_topic_mentions(posts, topic_map, range, lemmatizer),
                                   members->size()});
  }

  std::string counts_tsv = "topic\tcohort\tmonth\traw\tvolume\tadjusted\n";
  std::vector<json> series;
  for (const auto& [topic, keywords] : topic_map.topics()) {
    for (const auto& c : cohorts) {
      const auto& raw = c.raw.at(topic);
      const auto adjusted = adjusted_counts(raw, c.volume, config.topic_scale);
      json points = json::object();
      for (const auto& [month, hits] : raw) {
        const auto it = adjusted.find(month);
        counts_tsv += topic + '\t' + c.name + '\t' + month.to_string() + '\t' + std::to_string(hits) +
                      '\t' + std::to_string(c.volume.at(month)) + '\t' +
                      (it == adjusted.end() ? "" : fmt_double(it->second)) + '\n';
        if (it != adjusted.end()) points[month.to_string()] = it->second;
      }
      series.push_back(json{{"topic", topic}, {"cohort", c.name}, {"users", c.users},
                            {"points", std::move(points)}});
    }
  }
  OutputSet out(config.paths.output_dir);
  out.add(artifacts::kTopicCounts, std::move(counts_tsv));
  out.add(artifacts::kSeries, to_jsonl(series));
  out.commit();
  log << "topics: " << split_users.red.size() << " red users, " << split_users.blue.size()
      << " blue users, " << split_users.excluded.size() << " excluded, months "
      << range.first.to_string() << ".." << range.last.to_string() << "\n";
}

void run_regress(const PipelineConfig& config, std::ostream& log) {
  const auto series_path = artifact(config, artifacts::kSeries);
  require_exists(series_path);
  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, TopicSeries>> by_topic;
  for (const auto& j : read_jsonl(series_path)) {
    TopicSeries s;
    try {
      s.topic = j.at("topic").get<std::string>();
      s.cohort = j.at("cohort").get<std::string>();
      for (const auto& [month, v] : j.at("points").items()) s.points[YearMonth::parse(month)] = v.get<double>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedRecord, series_path.string() + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::MalformedRecord, series_path.string() + ": " + e.what());
    }
    if (s.cohort != "red" && s.cohort != "blue") {
      throw Error(ErrorKind::MalformedRecord, "unknown cohort '" + s.cohort + "'");
    }
    if (!by_topic.contains(s.topic)) order.push_back(s.topic);
    by_topic[s.topic][s.cohort] = std::move(s);
  }
  TopicResults results;
  for (const auto& topic : order) {
    const auto& cohorts = by_topic.at(topic);
    if (!cohorts.contains("red") || !cohorts.contains("blue")) {
      throw Error(ErrorKind::EmptySeries, "topic '" + topic + "' lacks a red or blue series");
    }
    try {
      results.emplace_back(topic, ols_fit(build_design(cohorts.at("red"), cohorts.at("blue"),
                                                       config.covid_cutoff)));
    } catch (const Error& e) {
      throw Error(e.kind(), "topic '" + topic + "': " + e.what());
    }
  }
  OutputSet out(config.paths.output_dir);
  out.add(artifacts::kRegressionText, report_table(results));
  out.add(artifacts::kRegressionTsv, report_rows_tsv(results));
  out.add(artifacts::kRegressionJson, report_json(results).dump(2) + '\n');
  out.commit();
  log << "regress: " << results.size() << " topics\n";
}

void run_export(const PipelineConfig& config, std::ostream& log) {
  const auto selected_path = artifact(config, artifacts::kSelected);
  require_exists(selected_path);
  std::optional<std::map<std::string, std::int64_t>> population;
  if (!config.paths.state_population.empty()) {
    require_exists(config.paths.state_population);
    population = load_state_population(config.paths.state_population);
  }
  std::vector<LocationGuess> selected;
  for (auto& [rank, g] : read_guesses(selected_path)) {
    if (!g.confidence) throw Error(ErrorKind::SchemaMismatch, "selected guess for '" + g.user + "' is unscored");
    selected.push_back(std::move(g));
  }
  std::string locations =
      "author\tconfidence\tretained\tgranularity\tcity\tadmin1\tcountry\tlatitude\tlongitude\n";
  for (const auto& g : selected) {
    locations += g.user + '\t' + fmt_double(*g.confidence) + '\t' +
                 (*g.confidence >= config.threshold ? "1" : "0") + '\t';
    if (g.has_guess()) {
      const auto& c = *g.candidate;
      locations += std::string(to_string(c.granularity)) + '\t' + cell(c.city) + '\t' + cell(c.admin1) +
                   '\t' + c.country_code + '\t' + fmt_double(c.latitude) + '\t' + fmt_double(c.longitude);
    } else {
      locations += "none\t\t\t\t\t";
    }
    locations += '\n';
  }
  OutputSet out(config.paths.output_dir);
  out.add(artifacts::kExportLocations, std::move(locations));
  if (population) {
    out.add(artifacts::kExportStates, cohort_summary(selected, config.threshold, *population).states_tsv());
  }
  out.commit();
  log << "export: " << selected.size() << " users\n";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid: return kExitConfig;
    case ErrorKind::MissingInput: return kExitMissingInput;
    default: return kExitData;
  }
}

int run_command(std::string_view command, const PipelineConfig& config, std::ostream& log,
                std::ostream& err) {
  using Fn = void (*)(const PipelineConfig&, std::ostream&);
  static const std::map<std::string_view, Fn> kTable = {
      {"ingest", run_ingest},     {"extract", run_extract},   {"infer", run_infer},
      {"train-confidence", run_train_confidence},             {"score", run_score},
      {"evaluate", run_evaluate}, {"topics", run_topics},     {"regress", run_regress},
      {"export", run_export}};
  auto report = [&](std::string_view kind, const std::string& message) {
    std::string flat = message;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    err << "error: command=" << command << " kind=" << kind << " message=" << flat << '\n';
  };
  const auto it = kTable.find(command);
  if (it == kTable.end()) {
    report(to_string(ErrorKind::ConfigInvalid), "unknown command");
    return kExitConfig;
  }
  try {
    it->second(config, log);
    return kExitOk;
  } catch (const Error& e) {
    report(to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    report("io_error", e.what());
    return kExitData;
  } catch (const json::exception& e) {
    report(to_string(ErrorKind::MalformedRecord), e.what());
    return kExitData;
  }
}

}  // namespace geocohort
