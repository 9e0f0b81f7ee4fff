#pragma once

#include <filesystem>
#include <string>

#include "geocohort/corpus.hpp"
#include "geocohort/gazetteer.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(GEOCOHORT_TEST_DATA) / name;
}

inline const geocohort::GazetteerIndex& fixture_gazetteer() {
  static const auto index = geocohort::GazetteerIndex::load(data_path("gazetteer_fixture.tsv"));
  return index;
}

inline geocohort::Post make_post(std::string id, std::string author, std::int64_t t, std::string body,
                                 std::string subreddit = "opiates") {
  geocohort::Post p;
  p.id = std::move(id);
  p.author = std::move(author);
  p.subreddit = std::move(subreddit);
  p.created_utc = t;
  p.body = std::move(body);
  return p;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("geocohort_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
