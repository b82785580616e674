#include "hseq/llm_client.hpp"

#include "hseq/engine.hpp"

namespace hseq {

long long estimate_tokens(std::string_view text) {
    return static_cast<long long>((text.size() + 3) / 4);
}

void MockChatClient::push_response(std::string text) {
    std::lock_guard<std::mutex> lock(mutex_);
    queued_.push_back(std::move(text));
}

void MockChatClient::set_handler(std::function<std::string(const ChatRequest&)> handler) {
    std::lock_guard<std::mutex> lock(mutex_);
    handler_ = std::move(handler);
}

ChatResponse MockChatClient::complete(const ChatRequest& req, BudgetState* budget) {
    ChatResponse resp;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++calls_;
        if (!queued_.empty()) {
            resp.text = std::move(queued_.front());
            queued_.pop_front();
        } else if (handler_) {
            resp.text = handler_(req);
        } else {
            resp.text = fixed_text_;
        }
    }
    resp.prompt_tokens = estimate_tokens(req.system) + estimate_tokens(req.user);
    resp.completion_tokens = estimate_tokens(resp.text);
    resp.latency_ms = 0;
    if (budget) {
        long long estimate = resp.prompt_tokens;
        if (budget->tokens_used + estimate > budget->token_budget) {
            throw BudgetExceededError("prompt estimate " + std::to_string(estimate) +
                                      " would overflow token budget");
        }
        budget->tokens_used += resp.prompt_tokens + resp.completion_tokens;
        budget->calls_used += 1;
    }
    return resp;
}

}  // namespace hseq
