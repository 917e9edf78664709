#include "commitlink/retrieval/tokenizer.hpp"

#include <algorithm>
#include <array>

namespace commitlink::retrieval {
namespace {

// Sorted for binary search.
constexpr std::array<std::string_view, 52> kStopwords = {
    "about", "after", "all",  "also",  "an",    "and",   "any",  "are",  "as",    "at",   "be",
    "been",  "but",   "by",   "can",   "could", "do",    "does", "for",  "from",  "had",  "has",
    "have",  "if",    "in",   "into",  "is",    "it",    "its",  "more", "no",    "not",  "of",
    "on",    "or",    "so",   "some",  "such",  "than",  "that", "the",  "their", "then", "there",
    "these", "this",  "to",   "was",   "were",  "which", "will", "with",
};

static_assert(std::is_sorted(kStopwords.begin(), kStopwords.end()));

bool is_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(unsigned char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_token_char(unsigned char c) { return is_upper(c) || is_lower(c) || is_digit(c) || c >= 0x80; }

} // namespace

bool is_stopword(std::string_view token) {
    return std::binary_search(kStopwords.begin(), kStopwords.end(), token);
}

std::span<const std::string_view> stopwords() {
    return kStopwords;
}

TokenStream tokenize(std::string_view text) {
    TokenStream tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2 && !is_stopword(current)) {
            tokens.push_back(current);
        }
        current.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (!is_token_char(c)) {
            flush();
            continue;
        }
        if (is_upper(c) && i > 0 && !current.empty()) {
            const auto prev = static_cast<unsigned char>(text[i - 1]);
            const bool next_lower = i + 1 < text.size() && is_lower(static_cast<unsigned char>(text[i + 1]));
            if (is_lower(prev) || is_digit(prev) || (is_upper(prev) && next_lower)) {
                flush();
            }
        }
        current.push_back(is_upper(c) ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    }
    flush();
    return tokens;
}

} // namespace commitlink::retrieval
