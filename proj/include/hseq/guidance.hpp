#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hseq/llm_client.hpp"

namespace hseq {

enum class GuidanceSource { template_, planner, cache };
enum class QuestionType { numeric, factoid, binary, default_ };

std::string_view guidance_source_name(GuidanceSource source);
std::string_view question_type_name(QuestionType type);
std::optional<QuestionType> question_type_from_name(std::string_view name);

// Short retrieval plan acting as a soft prior over iterator actions. The text
// always ends with an explicit stop condition sentence.
struct Guidance {
    std::string text;
    GuidanceSource source = GuidanceSource::template_;
    QuestionType question_type = QuestionType::default_;
    std::vector<std::string> keywords;

    bool operator==(const Guidance&) const = default;
};

// Coarse pattern classifier. Cue lists are fixed:
//   numeric - "how many"/"how much" or a numeric-operator word (count, total,
//             sum, average, difference, percent, percentage, number)
//   binary  - first word in {is, are, do, does, did, was, were, can}
//   factoid - first word in {who, which, where, when, what}
QuestionType classify_question(const std::string& question);

Guidance template_guidance(const std::string& question, QuestionType type);

struct GuidanceCacheConfig {
    std::string cache_root;             // empty disables the cache
    std::string head_model_id = "template";
    std::string planner_model;
    int min_plan_tokens = 15;           // shorter drafts get one continuation
};

// Cache-first guidance: key is dataset + "/" + sha1(question), stored one
// guidance text per file under <cache_root>/<head_model_id>/<dataset>/.
// On a miss the planner is consulted when given, else the template; planner
// failures fall back to the template and never fail the episode.
Guidance cached_guidance(const GuidanceCacheConfig& config, const std::string& dataset,
                         const std::string& question, ChatClient* planner = nullptr);

}  // namespace hseq
