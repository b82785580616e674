#include "hseq/head.hpp"

#include <sstream>

#include "hseq/metrics.hpp"
#include "json.hpp"

namespace hseq {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kAnswerSystemPrompt =
    "You answer questions using ONLY the evidence snippets provided.\n"
    "Reply with a single line \"ANSWER: <short span, number, or yes/no>\".\n"
    "Optionally add a second line \"SUPPORT: <id> <id> ...\" naming the snippet ids "
    "your answer is grounded in.\n"
    "Do not explain. If the evidence does not support an answer, reply "
    "\"ANSWER: unknown\".";

}  // namespace

std::pair<std::string, std::string> build_answer_prompt(const std::string& question,
                                                        const EvidencePackage& pkg,
                                                        const Guidance& guidance) {
    std::string user;
    user += "### Question\n";
    user += question;
    user += "\n\n### Guidance\n";
    user += guidance.text;
    user += "\n\n### Evidence\n";
    if (pkg.items.empty()) {
        user += "(no evidence collected)\n";
    } else {
        for (const auto& item : pkg.items) {
            user += "- [" + item.id + "] " + item.snippet + "\n";
        }
    }
    user += "\n### Output\n";
    return {kAnswerSystemPrompt, user};
}

Answer synthesize(const std::string& question, const EvidencePackage& pkg,
                  const Guidance& guidance, ChatClient& client, const std::string& model,
                  BudgetState* budget) {
    auto [system, user] = build_answer_prompt(question, pkg, guidance);
    ChatRequest req;
    req.system = system;
    req.user = user;
    req.model = model;
    ChatResponse resp = client.complete(req, budget);

    Answer answer;
    answer.head_latency_ms = resp.latency_ms;

    std::istringstream lines(resp.text);
    std::string line;
    std::optional<std::string> answer_line;
    std::optional<std::string> support_line;
    while (std::getline(lines, line)) {
        if (!answer_line && line.rfind("ANSWER:", 0) == 0) {
            answer_line = line.substr(7);
        } else if (!support_line && line.rfind("SUPPORT:", 0) == 0) {
            support_line = line.substr(8);
        }
    }

    auto trim = [](const std::string& s) {
        size_t b = s.find_first_not_of(" \t\r\n");
        size_t e = s.find_last_not_of(" \t\r\n");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };

    if (answer_line) {
        answer.text = trim(*answer_line);
        if (support_line) {
            std::string current;
            auto flush = [&] {
                if (current.empty()) return;
                for (const auto& item : pkg.items) {
                    if (item.id == current) {
                        answer.supporting_ids.push_back(current);
                        break;
                    }
                }
                current.clear();
            };
            for (char ch : *support_line) {
                if (ch == ' ' || ch == ',' || ch == '\t') {
                    flush();
                } else {
                    current.push_back(ch);
                }
            }
            flush();
        }
    } else {
        // Completion did not follow the line protocol; keep the raw text.
        answer.text = trim(resp.text);
    }
    return answer;
}

bool answer_entailed(const std::string& answer_text, const EvidencePackage& pkg) {
    std::string needle = normalize_answer(answer_text);
    if (needle.empty()) return false;
    for (const auto& item : pkg.items) {
        if (normalize_answer(item.snippet).find(needle) != std::string::npos) {
            return true;
        }
    }
    return false;
}

RefinementResult verify_and_refine(const Answer& answer, const EvidencePackage& pkg,
                                   const std::string& question, const EngineHandle& engine,
                                   const RefinementConfig& rc) {
    RefinementResult out{answer, pkg, std::nullopt};
    if (answer_entailed(answer.text, pkg)) {
        return out;
    }
    if (rc.delta <= 0) {
        out.answer.verifier_failed = true;
        return out;
    }

    IterationConfig cfg = engine.cfg;
    cfg.t_max = rc.delta;
    cfg.t_min = 1;
    BudgetState budget = rc.reduced_budget;
    EpisodeResult resumed = run_episode(question, engine.hseq, rc.tightened_guidance,
                                        engine.policy, cfg, budget, engine.prior_selected,
                                        engine.clock);

    EvidencePackage refined_pkg =
        canonicalize(resumed.selected, engine.hseq, question, pkg.episode_ref + "+refine");
    Answer refined = synthesize(question, refined_pkg, rc.tightened_guidance, engine.client,
                                engine.model, &budget);
    refined.refined = true;
    refined.verifier_failed = !answer_entailed(refined.text, refined_pkg);

    out.answer = std::move(refined);
    out.package = std::move(refined_pkg);
    out.resumed_episode = std::move(resumed);
    return out;
}

std::string serialize_answer_record(const std::string& question, const Answer& answer, int steps,
                                    long long selection_latency_ms, long long total_latency_ms) {
    ordered_json j;
    j["question"] = question;
    j["answer"] = answer.text;
    j["supporting_ids"] = answer.supporting_ids;
    j["refined"] = answer.refined;
    j["steps"] = steps;
    j["selection_latency_ms"] = selection_latency_ms;
    j["head_latency_ms"] = answer.head_latency_ms;
    j["total_latency_ms"] = total_latency_ms;
    return j.dump();
}

}  // namespace hseq
