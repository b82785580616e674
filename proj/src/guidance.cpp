#include "hseq/guidance.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hseq/sha1.hpp"
#include "hseq/text_util.hpp"

namespace hseq {

namespace fs = std::filesystem;

namespace {

constexpr const char* kPlanPrefix =
    "Plan: retrieve a minimal set of highly relevant snippets; prefer concise facts.";

constexpr const char* kPlannerSystem =
    "You are a planning assistant. Given a question, write a short retrieval plan "
    "for an iteration agent selecting evidence snippets. Specify ONLY what to "
    "retrieve first, possible branches, and when to stop (sufficiency condition).";

const char* type_sentence(QuestionType type) {
    switch (type) {
        case QuestionType::numeric:
            return "Look for numeric mentions and table rows; stop when the final number is "
                   "explicit or corroborated.";
        case QuestionType::factoid:
            return "Focus on short spans that directly contain the answer; stop on a clear "
                   "statement.";
        case QuestionType::binary:
            return "Retrieve one-two definitive statements; stop when evidence strongly "
                   "supports yes/no.";
        case QuestionType::default_:
            return "Prefer snippets naming key entities/relations; stop when the answer is "
                   "explicitly stated.";
    }
    return "";
}

bool has_stop_condition(const std::string& text) {
    auto lowered = text;
    for (auto& ch : lowered) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return lowered.find("stop") != std::string::npos ||
           lowered.find("sufficien") != std::string::npos;
}

void write_atomically(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary);
        out << text;
    }
    fs::rename(tmp, path);  // concurrent misses on the same key converge
}

}  // namespace

std::string_view guidance_source_name(GuidanceSource source) {
    switch (source) {
        case GuidanceSource::template_: return "template";
        case GuidanceSource::planner: return "planner";
        case GuidanceSource::cache: return "cache";
    }
    return "template";
}

std::string_view question_type_name(QuestionType type) {
    switch (type) {
        case QuestionType::numeric: return "numeric";
        case QuestionType::factoid: return "factoid";
        case QuestionType::binary: return "binary";
        case QuestionType::default_: return "default";
    }
    return "default";
}

std::optional<QuestionType> question_type_from_name(std::string_view name) {
    if (name == "numeric") return QuestionType::numeric;
    if (name == "factoid") return QuestionType::factoid;
    if (name == "binary") return QuestionType::binary;
    if (name == "default") return QuestionType::default_;
    return std::nullopt;
}

QuestionType classify_question(const std::string& question) {
    if (question.empty()) {
        throw std::invalid_argument("classify_question requires a nonempty question");
    }
    auto tokens = tokenize_words(question);
    for (size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (tokens[i] == "how" && (tokens[i + 1] == "many" || tokens[i + 1] == "much")) {
            return QuestionType::numeric;
        }
    }
    for (const auto& tok : tokens) {
        if (tok == "count" || tok == "total" || tok == "sum" || tok == "average" ||
            tok == "difference" || tok == "percent" || tok == "percentage" || tok == "number") {
            return QuestionType::numeric;
        }
    }
    if (!tokens.empty()) {
        const auto& first = tokens.front();
        if (first == "is" || first == "are" || first == "do" || first == "does" ||
            first == "did" || first == "was" || first == "were" || first == "can") {
            return QuestionType::binary;
        }
        if (first == "who" || first == "which" || first == "where" || first == "when" ||
            first == "what") {
            return QuestionType::factoid;
        }
    }
    return QuestionType::default_;
}

Guidance template_guidance(const std::string& question, QuestionType type) {
    Guidance g;
    g.text = std::string(kPlanPrefix) + " " + type_sentence(type);
    g.source = GuidanceSource::template_;
    g.question_type = type;
    g.keywords = content_words(question);
    return g;
}

Guidance cached_guidance(const GuidanceCacheConfig& config, const std::string& dataset,
                         const std::string& question, ChatClient* planner) {
    QuestionType type = classify_question(question);

    fs::path cache_path;
    if (!config.cache_root.empty()) {
        cache_path = fs::path(config.cache_root) / config.head_model_id / dataset /
                     sha1_hex(question);
        if (fs::exists(cache_path)) {
            std::ifstream in(cache_path, std::ios::binary);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            Guidance g;
            g.text = text;
            g.source = GuidanceSource::cache;
            g.question_type = type;
            g.keywords = content_words(text);
            return g;
        }
    }

    Guidance g;
    if (planner) {
        try {
            ChatRequest req;
            req.system = kPlannerSystem;
            req.user = question;
            req.model = config.planner_model;
            std::string draft = planner->complete(req).text;
            size_t tokens = tokenize_words(draft).size();
            if (tokens < static_cast<size_t>(config.min_plan_tokens) ||
                !has_stop_condition(draft)) {
                ChatRequest cont;
                cont.system = kPlannerSystem;
                cont.user = question + "\n\nDraft plan:\n" + draft +
                            "\n\nContinue the plan and end with an explicit stop condition.";
                cont.model = config.planner_model;
                std::string extra = planner->complete(cont).text;
                draft += draft.empty() || draft.back() == ' ' ? "" : " ";
                draft += extra;
            }
            if (!has_stop_condition(draft)) {
                draft += " ";
                draft += type_sentence(type);
            }
            g.text = draft;
            g.source = GuidanceSource::planner;
            g.question_type = type;
            g.keywords = content_words(draft);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "hseq: planner failed (%s); using template guidance\n",
                         e.what());
            g = template_guidance(question, type);
        }
    } else {
        g = template_guidance(question, type);
    }

    if (!config.cache_root.empty()) {
        write_atomically(cache_path, g.text);
    }
    return g;
}

}  // namespace hseq
