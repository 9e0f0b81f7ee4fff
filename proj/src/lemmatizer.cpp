#include <string>
#include <vector>

#include "geocohort/topics.hpp"

namespace geocohort {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with_double_consonant(const std::string& s) {
  const auto n = s.size();
  return n >= 2 && s[n - 1] == s[n - 2] && !is_vowel(s[n - 1]) && s[n - 1] != 'l' &&
         s[n - 1] != 's' && s[n - 1] != 'z';
}

void push_verb_stem_candidates(const std::string& stem, std::vector<std::string>& out) {
  // Default first: undoubled ("stopped" -> "stop"), then the bare stem, then
  // e-restoration ("overdosed" -> "overdose").
  if (ends_with_double_consonant(stem)) out.push_back(stem.substr(0, stem.size() - 1));
  out.push_back(stem);
  out.push_back(stem + "e");
}

std::vector<std::string> candidates(const std::string& w) {
  std::vector<std::string> out;
  const auto n = w.size();
  if (n > 4 && w.ends_with("ies")) {
    out.push_back(w.substr(0, n - 3) + "y");
    out.push_back(w.substr(0, n - 1));
  } else if (n > 3 && w.ends_with("es")) {
    const auto stem = w.substr(0, n - 2);
    const bool sibilant = stem.ends_with("s") || stem.ends_with("x") || stem.ends_with("z") ||
                          stem.ends_with("ch") || stem.ends_with("sh");
    if (sibilant) {
      out.push_back(stem);
      out.push_back(w.substr(0, n - 1));
    } else {
      out.push_back(w.substr(0, n - 1));
      out.push_back(stem);
    }
  } else if (n > 3 && w.back() == 's' && !w.ends_with("ss") && !w.ends_with("us") &&
             !w.ends_with("is")) {
    out.push_back(w.substr(0, n - 1));
  } else if (n > 4 && w.ends_with("ing")) {
    push_verb_stem_candidates(w.substr(0, n - 3), out);
  } else if (n > 4 && w.ends_with("ied")) {
    out.push_back(w.substr(0, n - 3) + "y");
    out.push_back(w.substr(0, n - 1));
  } else if (n > 4 && w.ends_with("ed")) {
    push_verb_stem_candidates(w.substr(0, n - 2), out);
  }
  return out;
}

}  // namespace

Lemmatizer::Lemmatizer(std::set<std::string> known_lemmas) : known_(std::move(known_lemmas)) {
  exceptions_ = {
      {"paid", "pay"},        {"spent", "spend"},       {"died", "die"},
      {"dies", "die"},        {"withdrew", "withdraw"}, {"withdrawn", "withdraw"},
      {"ods", "o.d."},        {"od", "o.d."},           {"o.d.'d", "o.d."},
      {"busted", "bust"},     {"hurts", "hurt"},        {"hurting", "hurt"},
      {"sicker", "sick"},     {"sickest", "sick"},      {"funding", "fund"},
      {"viruses", "virus"},   {"stimuli", "stimulus"},  {"junkies", "junkie"},
  };
}

std::string Lemmatizer::lemmatize(std::string_view token) const {
  std::string w(token);
  if (w.ends_with("'s")) w.resize(w.size() - 2);
  else if (w.ends_with("'")) w.pop_back();
  if (w.empty() || known_.contains(w)) return w;
  if (auto it = exceptions_.find(w); it != exceptions_.end()) return it->second;

  const auto options = candidates(w);
  for (const auto& c : options) {
    if (known_.contains(c)) return c;
  }
  return options.empty() ? w : options.front();
}

}  // namespace geocohort
