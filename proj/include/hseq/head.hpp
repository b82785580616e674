#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hseq/canonicalize.hpp"
#include "hseq/engine.hpp"
#include "hseq/llm_client.hpp"

namespace hseq {

struct Answer {
    std::string text;
    std::vector<std::string> supporting_ids;  // subset of the package's ids
    bool refined = false;
    long long head_latency_ms = 0;
    bool verifier_failed = false;  // in-memory flag, not serialized

    bool operator==(const Answer&) const = default;
};

// Minimal evidence-conditioned answer prompt: answer only, grounded in the
// listed snippets, supporting ids requested, abstention permitted.
std::pair<std::string, std::string> build_answer_prompt(const std::string& question,
                                                        const EvidencePackage& pkg,
                                                        const Guidance& guidance);

// One client call; the completion is read as "ANSWER: ..." plus an optional
// "SUPPORT: id id ..." line. Ids not present in the package are dropped. An
// unparseable completion becomes the raw text with no supporting ids.
Answer synthesize(const std::string& question, const EvidencePackage& pkg,
                  const Guidance& guidance, ChatClient& client, const std::string& model,
                  BudgetState* budget = nullptr);

struct RefinementConfig {
    int delta = 0;                 // max additional steps
    Guidance tightened_guidance;   // g'
    BudgetState reduced_budget;    // B'
};

// Everything a refinement pass needs to resume iteration.
struct EngineHandle {
    const Hseq& hseq;
    SelectionPolicy& policy;
    IterationConfig cfg;
    ChatClient& client;
    std::string model;
    std::vector<std::string> prior_selected;  // M_tau of the first episode
    ClockFn clock;
};

struct RefinementResult {
    Answer answer;
    EvidencePackage package;  // final package (re-canonicalized if refined)
    std::optional<EpisodeResult> resumed_episode;
};

// Lightweight entailment check (normalized containment of the answer in some
// snippet). On failure with delta > 0: resume iteration for at most delta
// steps under the tightened guidance and reduced budget, re-canonicalize,
// re-synthesize once. At most one refinement pass per question.
RefinementResult verify_and_refine(const Answer& answer, const EvidencePackage& pkg,
                                   const std::string& question, const EngineHandle& engine,
                                   const RefinementConfig& rc);

// True when the normalized answer appears in some normalized snippet.
bool answer_entailed(const std::string& answer_text, const EvidencePackage& pkg);

// Answer record line: (question, answer, supporting_ids, refined, steps, latencies).
std::string serialize_answer_record(const std::string& question, const Answer& answer, int steps,
                                    long long selection_latency_ms, long long total_latency_ms);

}  // namespace hseq
