// Writes a synthetic corpus and matching annotations for trying the pipeline
// without real data.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "geocohort/errors.hpp"
#include "geocohort/gazetteer.hpp"
#include "geocohort/pipeline.hpp"
#include "geocohort/synthetic.hpp"

namespace gc = geocohort;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic corpus with planted home locations"};
  std::string gazetteer, out_dir = "synthetic";
  gc::SyntheticOptions options;
  app.add_option("-g,--gazetteer", gazetteer, "Geonames-format gazetteer")->required();
  app.add_option("-o,--output-dir", out_dir, "Where corpus.jsonl and annotations.tsv go");
  app.add_option("-n,--users", options.users, "Number of users");
  app.add_option("--min-posts", options.min_posts, "Fewest posts per user");
  app.add_option("--max-posts", options.max_posts, "Most posts per user");
  app.add_option("--seed", options.seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto index = gc::GazetteerIndex::load(fs::path(gazetteer));
    const auto cohort = gc::generate_cohort(index, gc::NormalizationTables::defaults(), options);
    gc::write_cohort(cohort, out_dir);
    std::cout << "synth: " << cohort.posts.size() << " posts, " << cohort.users.size() << " users\n";
  } catch (const gc::Error& e) {
    std::cerr << "error: command=synth kind=" << gc::to_string(e.kind()) << " message=" << e.what() << '\n';
    return gc::exit_code_for(e.kind());
  }
  return 0;
}
