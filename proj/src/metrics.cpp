#include "hseq/metrics.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <vector>

namespace hseq {

std::string normalize_answer(const std::string& text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (unsigned char ch : text) {
        if (std::ispunct(ch)) continue;  // deleted, not replaced: "deco-style" -> "decostyle"
        cleaned.push_back(static_cast<char>(std::tolower(ch)));
    }

    std::istringstream stream(cleaned);
    std::string token;
    std::string out;
    while (stream >> token) {
        if (token == "a" || token == "an" || token == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

std::pair<int, double> em_f1(const std::string& prediction, const std::string& gold) {
    std::string np = normalize_answer(prediction);
    std::string ng = normalize_answer(gold);
    int em = np == ng ? 1 : 0;

    std::vector<std::string> pt, gt;
    {
        std::istringstream sp(np), sg(ng);
        std::string tok;
        while (sp >> tok) pt.push_back(tok);
        while (sg >> tok) gt.push_back(tok);
    }
    if (pt.empty() && gt.empty()) return {1, 1.0};
    if (pt.empty() || gt.empty()) return {em, 0.0};

    std::map<std::string, int> gold_counts;
    for (const auto& tok : gt) ++gold_counts[tok];
    int common = 0;
    for (const auto& tok : pt) {
        auto it = gold_counts.find(tok);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return {em, 0.0};
    double precision = static_cast<double>(common) / pt.size();
    double recall = static_cast<double>(common) / gt.size();
    return {em, 2.0 * precision * recall / (precision + recall)};
}

}  // namespace hseq
