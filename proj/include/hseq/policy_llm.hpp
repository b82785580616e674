#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hseq/engine.hpp"
#include "hseq/llm_client.hpp"

namespace hseq {

// Role instruction the iteration agent is conditioned with.
extern const char* const kIterationSystemPrompt;

struct DecisionParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structured multi-section iteration prompt. Sections, in order:
// "### Instruction", "### Question", "### Guidance", "### Selected-So-Far",
// "### Candidate-Window", "### Output (JSON)". Each segment is rendered as
// one "- [seg_id] level truncated_content" line.
std::pair<std::string, std::string> build_iteration_prompt(
    const std::string& question, const std::string& guidance,
    const std::vector<const Segment*>& selected, const std::vector<const Segment*>& window,
    int content_cap = 300);

// Compact wire form of a decision:
// {"type":"select","args":{"segment_ids":[...],"strategy":...,"top_k":N},"sufficiency":B}
std::string render_decision(const PolicyDecision& decision);

// Strict schema parser. Tolerates surrounding whitespace and a single fenced
// code block; anything else raises DecisionParseError.
PolicyDecision parse_decision(const std::string& text);

struct EndpointConfig {
    std::string url;       // e.g. http://localhost:8000/v1/chat/completions
    std::string api_key;   // read from the environment by the CLI
    std::string model;
    double temperature = 0.0;
    int max_output_tokens = 256;
    int max_retries = 3;          // transport errors and 5xx
    int backoff_base_ms = 250;    // doubled per retry
};

// Chat-completions HTTP client. Distinct failures: TransportError (network /
// 5xx after retries / other HTTP errors), AuthError (401/403, not retried),
// BudgetExceededError (raised before any network call).
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(EndpointConfig config);
    ChatResponse complete(const ChatRequest& req, BudgetState* budget = nullptr) override;

private:
    EndpointConfig config_;
    std::string scheme_host_;  // scheme://host:port
    std::string path_;
};

// LLM-backed selection policy. On a malformed completion it re-prompts once
// with a compact-JSON reminder, then falls back to the deterministic
// heuristic for that step (the decision's strategy is labeled accordingly).
class LlmPolicy : public SelectionPolicy {
public:
    LlmPolicy(ChatClient& client, std::string model);

    PolicyDecision decide(const PolicyContext& ctx) override;
    bool self_accounting() const override { return true; }
    std::string name() const override { return "llm"; }

private:
    ChatClient& client_;
    std::string model_;
    HeuristicPolicy fallback_;
};

}  // namespace hseq
