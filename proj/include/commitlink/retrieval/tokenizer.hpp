#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace commitlink::retrieval {

/// Lowercase tokens; none shorter than two characters, none a stopword.
using TokenStream = std::vector<std::string>;

/// Bumped whenever the stopword list changes.
inline constexpr int kStopwordListVersion = 1;

/// Splits on non-alphanumeric characters and on camelCase joints
/// ("parseFile" -> parse|file, "HTTPServer" -> http|server, "utf8Reader" ->
/// utf8|reader), lowercases ASCII letters, then drops tokens shorter than
/// two characters and stopwords. No stemming. Bytes >= 0x80 are treated as
/// letters so UTF-8 words stay whole.
TokenStream tokenize(std::string_view text);

bool is_stopword(std::string_view token);
std::span<const std::string_view> stopwords();

} // namespace commitlink::retrieval
