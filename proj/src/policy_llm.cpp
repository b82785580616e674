#include "hseq/policy_llm.hpp"

#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace hseq {

using ordered_json = nlohmann::ordered_json;

const char* const kIterationSystemPrompt =
    "You are an iteration agent working over a hierarchical sequence (H-Seq).\n"
    "Given a question and a list of candidate segments (each with an id and text)\n"
    "select the top-k segment_ids that best support answering the question.\n"
    "Then decide if the selected evidence is sufficient to stop.\n"
    "Return ONLY compact JSON with keys: type, args.segment_ids, args.strategy, "
    "args.top_k, sufficiency.\n"
    "WITHOUT ANY EXPLAINATION.";

std::pair<std::string, std::string> build_iteration_prompt(
    const std::string& question, const std::string& guidance,
    const std::vector<const Segment*>& selected, const std::vector<const Segment*>& window,
    int content_cap) {
    std::string user;
    user += "### Instruction\n";
    user += kIterationSystemPrompt;
    user += "\n\n### Question\n";
    user += question;
    user += "\n\n### Guidance\n";
    user += guidance;
    user += "\n\n### Selected-So-Far\n";
    for (const Segment* seg : selected) {
        user += render_segment_line(*seg, content_cap);
        user += '\n';
    }
    user += "\n### Candidate-Window\n";
    for (const Segment* seg : window) {
        user += render_segment_line(*seg, content_cap);
        user += '\n';
    }
    user += "\n### Output (JSON)\n";
    return {kIterationSystemPrompt, user};
}

std::string render_decision(const PolicyDecision& decision) {
    ordered_json j;
    j["type"] = "select";
    ordered_json args;
    args["segment_ids"] = decision.segment_ids;
    args["strategy"] = decision.strategy;
    args["top_k"] = decision.top_k;
    j["args"] = std::move(args);
    j["sufficiency"] = decision.sufficiency;
    return j.dump();
}

namespace {

std::string_view trim(std::string_view s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

// Strip one surrounding ``` or ```json fence, if present.
std::string_view strip_fence(std::string_view s) {
    if (s.substr(0, 3) != "```") return s;
    size_t body_start = s.find('\n');
    if (body_start == std::string_view::npos) return s;
    size_t fence_end = s.rfind("```");
    if (fence_end <= body_start) return s;
    return trim(s.substr(body_start + 1, fence_end - body_start - 1));
}

}  // namespace

PolicyDecision parse_decision(const std::string& text) {
    std::string_view body = strip_fence(trim(text));

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw DecisionParseError(std::string("not a JSON object: ") + e.what());
    }
    if (!j.is_object()) throw DecisionParseError("decision must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "type" && it.key() != "args" && it.key() != "sufficiency") {
            throw DecisionParseError("unexpected key '" + it.key() + "'");
        }
    }
    if (!j.contains("type") || !j["type"].is_string() || j["type"] != "select") {
        throw DecisionParseError("type must be \"select\"");
    }
    if (!j.contains("sufficiency") || !j["sufficiency"].is_boolean()) {
        throw DecisionParseError("sufficiency must be a boolean");
    }
    if (!j.contains("args") || !j["args"].is_object()) {
        throw DecisionParseError("args must be an object");
    }
    const auto& args = j["args"];
    for (auto it = args.begin(); it != args.end(); ++it) {
        if (it.key() != "segment_ids" && it.key() != "strategy" && it.key() != "top_k") {
            throw DecisionParseError("unexpected args key '" + it.key() + "'");
        }
    }
    if (!args.contains("segment_ids") || !args["segment_ids"].is_array()) {
        throw DecisionParseError("args.segment_ids must be an array");
    }
    if (!args.contains("strategy") || !args["strategy"].is_string()) {
        throw DecisionParseError("args.strategy must be a string");
    }
    if (!args.contains("top_k") || !args["top_k"].is_number_integer()) {
        throw DecisionParseError("args.top_k must be an integer");
    }

    PolicyDecision decision;
    for (const auto& id : args["segment_ids"]) {
        if (!id.is_string()) throw DecisionParseError("segment ids must be strings");
        decision.segment_ids.push_back(id.get<std::string>());
    }
    decision.strategy = args["strategy"].get<std::string>();
    decision.top_k = args["top_k"].get<int>();
    decision.sufficiency = j["sufficiency"].get<bool>();
    return decision;
}

namespace {

struct ParsedUrl {
    std::string scheme_host;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument("endpoint URL needs a scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpChatClient::HttpChatClient(EndpointConfig config) : config_(std::move(config)) {
    if (config_.url.empty()) {
        throw std::invalid_argument("HttpChatClient requires a configured endpoint URL");
    }
    auto parsed = split_url(config_.url);
    scheme_host_ = parsed.scheme_host;
    path_ = parsed.path;
}

ChatResponse HttpChatClient::complete(const ChatRequest& req, BudgetState* budget) {
    long long prompt_estimate = estimate_tokens(req.system) + estimate_tokens(req.user);
    if (budget && budget->tokens_used + prompt_estimate > budget->token_budget) {
        throw BudgetExceededError("prompt estimate " + std::to_string(prompt_estimate) +
                                  " tokens would overflow the remaining budget");
    }

    ordered_json body;
    body["model"] = req.model.empty() ? config_.model : req.model;
    body["messages"] = ordered_json::array({
        ordered_json{{"role", "system"}, {"content", req.system}},
        ordered_json{{"role", "user"}, {"content", req.user}},
    });
    // An explicit request temperature wins; otherwise the configured default.
    body["temperature"] = req.temperature != 0.0 ? req.temperature : config_.temperature;
    body["max_tokens"] = req.max_output_tokens;
    std::string payload = body.dump();

    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    auto start = std::chrono::steady_clock::now();
    httplib::Result res;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.backoff_base_ms << (attempt - 1)));
        }
        httplib::Client client(scheme_host_);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("endpoint rejected credentials (HTTP " +
                            std::to_string(res->status) + ")");
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
        }
        break;
    }
    if (!res || res->status != 200) {
        throw TransportError("chat completion failed after " +
                             std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();

    ChatResponse response;
    response.latency_ms = elapsed;
    try {
        auto j = nlohmann::json::parse(res->body);
        response.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
            response.prompt_tokens = j["usage"].value("prompt_tokens", 0LL);
            response.completion_tokens = j["usage"].value("completion_tokens", 0LL);
        }
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed completion response: ") + e.what());
    }
    if (response.prompt_tokens == 0) response.prompt_tokens = prompt_estimate;
    if (response.completion_tokens == 0) {
        response.completion_tokens = estimate_tokens(response.text);
    }

    if (budget) {
        budget->tokens_used += response.prompt_tokens + response.completion_tokens;
        budget->calls_used += 1;  // retries are not billed as policy calls
    }
    return response;
}

LlmPolicy::LlmPolicy(ChatClient& client, std::string model)
    : client_(client), model_(std::move(model)) {}

PolicyDecision LlmPolicy::decide(const PolicyContext& ctx) {
    if (ctx.window.empty()) throw PolicyError("llm policy requires a nonempty window");

    auto [system, user] =
        build_iteration_prompt(ctx.question, ctx.guidance.text, ctx.selected, ctx.window,
                               ctx.cfg.content_cap);
    ChatRequest req;
    req.system = system;
    req.user = user;
    req.model = model_;

    ChatResponse first = client_.complete(req, &ctx.budget);
    try {
        return parse_decision(first.text);
    } catch (const DecisionParseError&) {
        // One re-prompt with a compact-JSON reminder, then heuristic fallback.
    }

    req.user += "\nReturn ONLY compact JSON.\n";
    ChatResponse second = client_.complete(req, &ctx.budget);
    try {
        return parse_decision(second.text);
    } catch (const DecisionParseError&) {
    }

    PolicyDecision decision = fallback_.decide(ctx);
    decision.strategy = "heuristic_fallback";
    return decision;
}

}  // namespace hseq
