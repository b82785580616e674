#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hseq {

// Lowercased alphanumeric word tokens; everything else is a separator.
std::vector<std::string> tokenize_words(std::string_view text);

// Token set form of tokenize_words, for overlap scoring.
std::set<std::string> token_set(std::string_view text);

// tokenize_words minus a fixed stopword list, first occurrence order, deduplicated.
std::vector<std::string> content_words(std::string_view text);

// Truncate to at most max_bytes without splitting a UTF-8 code point.
std::string truncate_utf8(std::string_view text, size_t max_bytes);

// Remove every ASCII whitespace character.
std::string strip_whitespace(std::string_view text);

bool is_stopword(std::string_view word);

}  // namespace hseq
