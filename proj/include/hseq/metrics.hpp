#pragma once

#include <string>
#include <utility>

namespace hseq {

// Standard extractive-QA normalization: lowercase, delete ASCII punctuation,
// collapse whitespace, drop the articles a/an/the.
std::string normalize_answer(const std::string& text);

// Exact match over normalized strings and token-level F1 over normalized
// token multisets. Both-empty normalizations score (1, 1.0).
std::pair<int, double> em_f1(const std::string& prediction, const std::string& gold);

}  // namespace hseq
