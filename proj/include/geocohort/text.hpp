#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace geocohort {

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

struct Token {
  std::string original;
  std::string lower;
  bool all_upper = false;  // at least one letter and no lowercase letters
};

/// Splits on whitespace and punctuation. Letters, digits, bytes >= 0x80,
/// apostrophes, hyphens and periods are word characters. Leading periods and
/// hyphens are dropped. Trailing periods are dropped unless the remaining
/// token already contains a period, so "l.a." and "o.d." survive while
/// "boston." becomes "boston".
std::vector<Token> tokenize(std::string_view text);

bool is_all_upper(std::string_view s);

}  // namespace geocohort
