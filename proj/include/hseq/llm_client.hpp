#pragma once

#include <deque>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>

namespace hseq {

struct BudgetState;

struct ChatRequest {
    std::string system;
    std::string user;
    int max_output_tokens = 256;
    double temperature = 0.0;  // deterministic decoding
    std::string model;
};

struct ChatResponse {
    std::string text;
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
    long long latency_ms = 0;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AuthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetExceededError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Chat-completion client. Implementations record token counts and the call
// into the budget when one is supplied.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatResponse complete(const ChatRequest& req, BudgetState* budget = nullptr) = 0;
};

// Deterministic in-process client for tests and mocked pipelines. Responses
// come from a fixed string, a queue, or a callback, in that priority order.
class MockChatClient : public ChatClient {
public:
    MockChatClient() = default;
    explicit MockChatClient(std::string fixed_text) : fixed_text_(std::move(fixed_text)) {}

    void push_response(std::string text);
    void set_handler(std::function<std::string(const ChatRequest&)> handler);

    ChatResponse complete(const ChatRequest& req, BudgetState* budget = nullptr) override;

    int calls() const { return calls_; }

private:
    std::string fixed_text_;
    std::deque<std::string> queued_;
    std::function<std::string(const ChatRequest&)> handler_;
    int calls_ = 0;
    std::mutex mutex_;
};

// Rough model-agnostic token estimate used for budgets: ceil(chars / 4).
long long estimate_tokens(std::string_view text);

}  // namespace hseq
