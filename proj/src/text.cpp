#include "geocohort/text.hpp"

namespace geocohort {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c >= 0x80 || c == '\'' || c == '-' || c == '.';
}

bool is_edge_junk(char c) { return c == '\'' || c == '-' || c == '.'; }

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool is_all_upper(std::string_view s) {
  bool any_letter = false;
  for (char c : s) {
    if (c >= 'a' && c <= 'z') return false;
    if (c >= 'A' && c <= 'Z') any_letter = true;
  }
  return any_letter;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < n && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view word = text.substr(i, j - i);
    i = j;

    while (!word.empty() && is_edge_junk(word.front())) word.remove_prefix(1);
    while (!word.empty() && (word.back() == '\'' || word.back() == '-')) word.remove_suffix(1);
    if (!word.empty() && word.back() == '.') {
      std::string_view core = word;
      while (!core.empty() && core.back() == '.') core.remove_suffix(1);
      // Abbreviations keep a single trailing period.
      word = core.find('.') != std::string_view::npos ? word.substr(0, core.size() + 1) : core;
      while (!word.empty() && (word.back() == '\'' || word.back() == '-')) word.remove_suffix(1);
    }
    if (word.empty()) continue;
    tokens.push_back(Token{std::string(word), to_lower_ascii(word), is_all_upper(word)});
  }
  return tokens;
}

}  // namespace geocohort
