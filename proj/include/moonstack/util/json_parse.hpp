#pragma once

#include <string_view>
#include <utility>

#include <json.hpp>

#include "moonstack/error.hpp"

namespace moonstack::util {

/// 1-based line and column of the byte nlohmann reports for a parse error.
inline std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

/// Parse JSON text; throws SyntaxError with the position of the first bad token.
inline nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    auto [line, column] = line_column(text, e.byte);
    throw SyntaxError("syntax error", line, column);
  }
}

}  // namespace moonstack::util
