#include "hseq/text_util.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace hseq {

namespace {

const std::unordered_set<std::string>& stopwords() {
    // Fixed list: articles, auxiliaries, wh-words, and common function words.
    static const std::unordered_set<std::string> kStopwords = {
        "a",    "an",   "the",  "is",   "are",  "was",  "were", "be",   "been",
        "do",   "does", "did",  "can",  "could", "will", "would", "has", "have",
        "had",  "who",  "whom", "which", "where", "when", "what", "why", "how",
        "of",   "in",   "on",   "at",   "to",   "for",  "and",  "or",  "by",
        "with", "from", "that", "this", "it",   "its",  "as",   "not",
    };
    return kStopwords;
}

}  // namespace

bool is_stopword(std::string_view word) {
    return stopwords().count(std::string(word)) > 0;
}

std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char ch : text) {
        if (std::isalnum(ch)) {
            cur.push_back(static_cast<char>(std::tolower(ch)));
        } else {
            if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
        }
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

std::set<std::string> token_set(std::string_view text) {
    auto words = tokenize_words(text);
    return {words.begin(), words.end()};
}

std::vector<std::string> content_words(std::string_view text) {
    std::vector<std::string> out;
    for (auto& word : tokenize_words(text)) {
        if (is_stopword(word)) continue;
        if (std::find(out.begin(), out.end(), word) == out.end()) {
            out.push_back(std::move(word));
        }
    }
    return out;
}

std::string truncate_utf8(std::string_view text, size_t max_bytes) {
    if (text.size() <= max_bytes) return std::string(text);
    size_t end = max_bytes;
    // Back off over UTF-8 continuation bytes so we never split a code point.
    while (end > 0 && (static_cast<unsigned char>(text[end]) & 0xC0) == 0x80) {
        --end;
    }
    return std::string(text.substr(0, end));
}

std::string strip_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (unsigned char ch : text) {
        if (!std::isspace(ch)) out.push_back(static_cast<char>(ch));
    }
    return out;
}

}  // namespace hseq
