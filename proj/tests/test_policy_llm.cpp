#include "doctest.h"

#include <atomic>
#include <random>
#include <thread>

#include "httplib.h"
#include "hseq/policy_llm.hpp"
#include "hseq/theory.hpp"
#include "json.hpp"
#include "test_helpers.hpp"

using namespace hseq;

namespace {

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t count = 0;
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

std::string chat_body(const std::string& content) {
    nlohmann::json j;
    j["choices"] = {{{"message", {{"role", "assistant"}, {"content", content}}}}};
    j["usage"] = {{"prompt_tokens", 10}, {"completion_tokens", 5}};
    return j.dump();
}

// Scripted chat-completions server for transport tests.
class ScriptedServer {
public:
    explicit ScriptedServer(std::vector<int> statuses, std::string content = "ok")
        : statuses_(std::move(statuses)), content_(std::move(content)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request&,
                                                    httplib::Response& res) {
            size_t i = request_count_.fetch_add(1);
            int status = i < statuses_.size() ? statuses_[i] : statuses_.back();
            res.status = status;
            if (status == 200) {
                res.set_content(chat_body(content_), "application/json");
            } else {
                res.set_content("error", "text/plain");
            }
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~ScriptedServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    }
    int requests() const { return static_cast<int>(request_count_.load()); }

private:
    std::vector<int> statuses_;
    std::string content_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<size_t> request_count_{0};
};

}  // namespace

TEST_CASE("build_iteration_prompt: structure and section order") {
    Hseq h = make_synthetic_stream(3);
    auto win = window(h, {}, 1);
    std::vector<const Segment*> none;
    auto [system, user] = build_iteration_prompt("What is x?", "Find x; stop when found.",
                                                 none, win, 300);
    CHECK(system == std::string(kIterationSystemPrompt));
    const char* sections[] = {"### Instruction", "### Question",        "### Guidance",
                              "### Selected-So-Far", "### Candidate-Window", "### Output (JSON)"};
    size_t pos = 0;
    for (const char* section : sections) {
        size_t found = user.find(section, pos);
        REQUIRE(found != std::string::npos);
        pos = found;
    }
    // Exactly one candidate line after the window header.
    size_t window_pos = user.find("### Candidate-Window");
    CHECK(count_occurrences(user.substr(window_pos), "- [") == 1);
}

TEST_CASE("build_iteration_prompt: empty guidance keeps the section") {
    Hseq h = make_synthetic_stream(2);
    auto win = window(h, {}, 2);
    std::vector<const Segment*> none;
    auto [system, user] = build_iteration_prompt("q", "", none, win, 300);
    (void)system;
    CHECK(user.find("### Guidance\n\n") != std::string::npos);
}

TEST_CASE("build_iteration_prompt: long content is truncated to the cap") {
    Segment seg = test::text_segment("p0", LevelTag::paragraph, "u", {0, 1000},
                                     std::string(1000, 'a'));
    std::string line = render_segment_line(seg, 300);
    CHECK(line.size() <= 300 + 64);
    CHECK(line.find(std::string(300, 'a')) != std::string::npos);
}

TEST_CASE("build_iteration_prompt is byte-deterministic") {
    Hseq h = make_synthetic_stream(4);
    auto win = window(h, {}, 3);
    std::vector<const Segment*> none;
    auto a = build_iteration_prompt("q", "g", none, win, 300);
    auto b = build_iteration_prompt("q", "g", none, win, 300);
    CHECK(a == b);
}

TEST_CASE("parse_decision accepts the schema fixtures") {
    SUBCASE("select with one id") {
        auto d = parse_decision(
            R"({"type":"select","args":{"segment_ids":["p_6df9c849"],"strategy":"guided_topk","top_k":2},"sufficiency":false})");
        CHECK(d.segment_ids == std::vector<std::string>{"p_6df9c849"});
        CHECK(d.strategy == "guided_topk");
        CHECK(d.top_k == 2);
        CHECK_FALSE(d.sufficiency);
        CHECK_FALSE(d.sufficiency_score.has_value());
    }
    SUBCASE("empty selection, sufficient") {
        auto d = parse_decision(
            R"({"type":"select","args":{"segment_ids":[],"strategy":"guided_topk","top_k":4},"sufficiency":true})");
        CHECK(d.segment_ids.empty());
        CHECK(d.sufficiency);
    }
    SUBCASE("fenced code block is tolerated") {
        auto d = parse_decision(
            "```json\n{\"type\":\"select\",\"args\":{\"segment_ids\":[\"p_6df9c849\"],"
            "\"strategy\":\"guided_topk\",\"top_k\":2},\"sufficiency\":false}\n```");
        CHECK(d.segment_ids == std::vector<std::string>{"p_6df9c849"});
    }
}

TEST_CASE("parse_decision rejects free-form text and near-misses") {
    CHECK_THROWS_AS(parse_decision("The answer is B"), DecisionParseError);
    CHECK_THROWS_AS(parse_decision(""), DecisionParseError);
    CHECK_THROWS_AS(parse_decision(R"({"type":"expand","args":{},"sufficiency":false})"),
                    DecisionParseError);
    CHECK_THROWS_AS(
        parse_decision(R"({"type":"select","args":{"segment_ids":["a"]},"sufficiency":true})"),
        DecisionParseError);  // missing strategy/top_k
    CHECK_THROWS_AS(
        parse_decision(
            R"({"type":"select","args":{"segment_ids":["a"],"strategy":"s","top_k":1},"sufficiency":true,"extra":1})"),
        DecisionParseError);
    CHECK_THROWS_AS(parse_decision(R"([1,2,3])"), DecisionParseError);
}

TEST_CASE("render/parse round trip over randomized decisions") {
    std::mt19937_64 rng(404);
    for (int i = 0; i < 1000; ++i) {
        PolicyDecision d;
        int ids = static_cast<int>(rng() % 5);
        for (int j = 0; j < ids; ++j) {
            d.segment_ids.push_back("seg_" + std::to_string(rng() % 1000));
        }
        d.strategy = (rng() % 2) ? "guided_topk" : "fallback";
        d.top_k = static_cast<int>(rng() % 8);
        d.sufficiency = rng() % 2 == 0;
        auto back = parse_decision(render_decision(d));
        CHECK(back == d);
    }
}

TEST_CASE("MockChatClient echoes a canned schema string") {
    std::string canned =
        R"({"type":"select","args":{"segment_ids":[],"strategy":"guided_topk","top_k":1},"sufficiency":true})";
    MockChatClient client(canned);
    ChatRequest req;
    req.system = "s";
    req.user = "u";
    auto resp = client.complete(req);
    CHECK(resp.text == canned);
    CHECK_NOTHROW(parse_decision(resp.text));
}

TEST_CASE("chat_complete retries 5xx then succeeds; retries are not billed") {
    ScriptedServer server({500, 500, 200});
    EndpointConfig cfg;
    cfg.url = server.url();
    cfg.model = "test-model";
    cfg.max_retries = 3;
    cfg.backoff_base_ms = 1;
    HttpChatClient client(cfg);

    BudgetState budget;
    ChatRequest req;
    req.system = "sys";
    req.user = "user";
    auto resp = client.complete(req, &budget);
    CHECK(resp.text == "ok");
    CHECK(budget.calls_used == 1);
    CHECK(server.requests() == 3);
    CHECK(budget.tokens_used == 15);  // from the scripted usage block
}

TEST_CASE("chat_complete raises a budget error before any network call") {
    ScriptedServer server({200});
    EndpointConfig cfg;
    cfg.url = server.url();
    HttpChatClient client(cfg);

    BudgetState budget;
    budget.token_budget = 10;
    ChatRequest req;
    req.system = std::string(1000, 'x');
    req.user = std::string(1000, 'y');
    CHECK_THROWS_AS(client.complete(req, &budget), BudgetExceededError);
    CHECK(server.requests() == 0);
    CHECK(budget.calls_used == 0);
}

TEST_CASE("chat_complete signals auth failures distinctly") {
    ScriptedServer server({401});
    EndpointConfig cfg;
    cfg.url = server.url();
    cfg.max_retries = 2;
    cfg.backoff_base_ms = 1;
    HttpChatClient client(cfg);
    ChatRequest req;
    CHECK_THROWS_AS(client.complete(req), AuthError);
    CHECK(server.requests() == 1);  // no retry on auth failures
}

TEST_CASE("chat_complete exhausts retries on persistent 5xx") {
    ScriptedServer server({500, 500, 500, 500, 500});
    EndpointConfig cfg;
    cfg.url = server.url();
    cfg.max_retries = 2;
    cfg.backoff_base_ms = 1;
    HttpChatClient client(cfg);
    ChatRequest req;
    CHECK_THROWS_AS(client.complete(req), TransportError);
    CHECK(server.requests() == 3);  // initial try plus two retries
}

TEST_CASE("LlmPolicy re-prompts once on a malformed completion") {
    Hseq h = make_synthetic_stream(6);
    MockChatClient client;
    client.push_response("I think the answer is p000000");  // malformed
    client.push_response(
        R"({"type":"select","args":{"segment_ids":["p000000"],"strategy":"guided_topk","top_k":2},"sufficiency":true})");
    LlmPolicy policy(client, "test-model");

    IterationConfig cfg;
    cfg.window = 4;
    cfg.top_k = 2;
    BudgetState budget;
    Guidance g;
    g.text = "stop when found";
    auto result = run_episode("q", h, g, policy, cfg, budget, {}, fixed_clock());
    CHECK(result.steps == 1);
    CHECK(result.selected == std::vector<std::string>{"p000000"});
    CHECK(client.calls() == 2);
    CHECK(result.stop_reason == StopReason::sufficient);
}

TEST_CASE("LlmPolicy falls back to the heuristic after two malformed completions") {
    Hseq h = make_synthetic_stream(6);
    MockChatClient client("still not json");
    LlmPolicy policy(client, "test-model");

    IterationConfig cfg;
    cfg.window = 4;
    cfg.top_k = 2;
    cfg.t_max = 1;
    BudgetState budget;
    Guidance g;
    g.text = "stop";
    auto result = run_episode("q", h, g, policy, cfg, budget, {}, fixed_clock());
    REQUIRE(result.steps == 1);
    CHECK(result.trace[0].decision.strategy == "heuristic_fallback");
    CHECK(client.calls() == 2);
    CHECK_FALSE(result.selected.empty());
}

TEST_CASE("a policy failure leaves the budget's token count consistent") {
    // Self-accounting policies record usage through the client; the engine
    // must not double-count.
    Hseq h = make_synthetic_stream(6);
    std::string canned =
        R"({"type":"select","args":{"segment_ids":["p000000"],"strategy":"guided_topk","top_k":1},"sufficiency":true})";
    MockChatClient client(canned);
    LlmPolicy policy(client, "m");
    IterationConfig cfg;
    cfg.window = 2;
    cfg.top_k = 1;
    BudgetState budget;
    Guidance g;
    g.text = "stop";
    run_episode("q", h, g, policy, cfg, budget, {}, fixed_clock());
    CHECK(budget.calls_used == 1);
    CHECK(budget.tokens_used > 0);
}
