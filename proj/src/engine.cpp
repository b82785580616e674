#include "hseq/engine.hpp"

#include <algorithm>
#include <chrono>

#include "hseq/text_util.hpp"
#include "json.hpp"

namespace hseq {

using ordered_json = nlohmann::ordered_json;

void IterationConfig::check() const {
    if (!(window >= top_k && top_k >= 1)) {
        throw std::invalid_argument("iteration config requires W >= k >= 1");
    }
    if (!(t_max >= t_min && t_min >= 1)) {
        throw std::invalid_argument("iteration config requires T_max >= T_min >= 1");
    }
    if (sufficiency_threshold < 0.0 || sufficiency_threshold > 1.0) {
        throw std::invalid_argument("sufficiency threshold must lie in [0,1]");
    }
    if (content_cap < 1) {
        throw std::invalid_argument("content cap must be positive");
    }
}

std::string_view stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::sufficient: return "sufficient";
        case StopReason::budget_exhausted: return "budget_exhausted";
        case StopReason::stream_exhausted: return "stream_exhausted";
    }
    return "stream_exhausted";
}

ClockFn system_clock_ms() {
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    };
}

ClockFn fixed_clock() {
    return [] { return 0LL; };
}

std::vector<const Segment*> candidate_stream(const Hseq& h) {
    std::vector<const Segment*> stream;
    for (const auto& seg : h.segments()) {
        if (is_candidate_level(seg.level)) stream.push_back(&seg);
    }
    std::stable_sort(stream.begin(), stream.end(),
                     [](const Segment* a, const Segment* b) { return rho_compare(*a, *b) < 0; });
    return stream;
}

namespace {

std::vector<const Segment*> window_from_stream(const std::vector<const Segment*>& stream,
                                               const std::set<std::string>& selected, int w) {
    std::vector<const Segment*> out;
    for (const Segment* seg : stream) {
        if (selected.count(seg->id)) continue;
        out.push_back(seg);
        if (static_cast<int>(out.size()) == w) break;
    }
    return out;
}

}  // namespace

std::vector<const Segment*> window(const Hseq& h, const std::set<std::string>& selected, int w) {
    if (w < 1) throw std::invalid_argument("window size must be >= 1");
    return window_from_stream(candidate_stream(h), selected, w);
}

std::string render_segment_line(const Segment& seg, int content_cap) {
    std::string line = "- [" + seg.id + "] " + std::string(level_name(seg.level)) + " ";
    line += truncate_utf8(content_text(seg), static_cast<size_t>(content_cap));
    return line;
}

std::string render_window_context(const std::vector<const Segment*>& segs, int content_cap) {
    std::string out;
    for (const Segment* seg : segs) {
        out += render_segment_line(*seg, content_cap);
        out += '\n';
    }
    return out;
}

long long context_cost_bound(const IterationConfig& cfg) {
    return static_cast<long long>(cfg.window) * (cfg.content_cap + kRenderOverheadBytes);
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    size_t inter = 0;
    for (const auto& item : a) inter += b.count(item);
    size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

EpisodeResult run_episode(const std::string& question, const Hseq& h, const Guidance& guidance,
                          SelectionPolicy& policy, const IterationConfig& cfg, BudgetState& budget,
                          const std::vector<std::string>& initial_selected, const ClockFn& clock) {
    cfg.check();
    ClockFn now = clock ? clock : system_clock_ms();
    const long long start = now();
    const long long elapsed_base = budget.elapsed_ms;

    auto stream = candidate_stream(h);

    EpisodeResult result;
    std::set<std::string> selected_set;
    std::vector<const Segment*> selected_segments;
    for (const auto& id : initial_selected) {
        const Segment* seg = h.find(id);
        if (!seg) throw std::invalid_argument("initial selection references unknown id '" + id + "'");
        if (selected_set.insert(id).second) {
            selected_segments.push_back(seg);
            result.selected.push_back(id);
        }
    }

    result.stop_reason = StopReason::budget_exhausted;  // holds if the loop runs out
    result.steps = 0;

    for (int t = 1; t <= cfg.t_max; ++t) {
        if (budget.exhausted()) {
            result.stop_reason = StopReason::budget_exhausted;
            break;
        }
        auto win = window_from_stream(stream, selected_set, cfg.window);
        if (win.empty()) {
            result.stop_reason = StopReason::stream_exhausted;
            break;
        }

        std::string context = render_window_context(win, cfg.content_cap);

        PolicyContext ctx{question, guidance, selected_segments, win, cfg, budget};
        PolicyDecision decision = policy.decide(ctx);  // failures propagate; M untouched

        StepRecord record;
        record.step = t;
        record.context_bytes = static_cast<long long>(context.size());
        for (const Segment* seg : win) record.window_ids.push_back(seg->id);

        std::set<std::string> window_ids(record.window_ids.begin(), record.window_ids.end());
        for (const auto& id : decision.segment_ids) {
            if (static_cast<int>(record.accepted_ids.size()) >= cfg.top_k) {
                record.warnings.push_back("dropped id beyond top-k: " + id);
                continue;
            }
            if (!window_ids.count(id)) {
                record.warnings.push_back("dropped id outside window: " + id);
                continue;
            }
            if (selected_set.count(id)) {
                record.warnings.push_back("dropped already-selected id: " + id);
                continue;
            }
            selected_set.insert(id);
            selected_segments.push_back(h.find(id));
            result.selected.push_back(id);
            record.accepted_ids.push_back(id);
        }

        if (!policy.self_accounting()) {
            budget.tokens_used += estimate_tokens(context);
            budget.calls_used += 1;
        }
        budget.steps_used += 1;
        budget.elapsed_ms = elapsed_base + (now() - start);

        record.decision = decision;
        record.budget = budget;
        record.elapsed_ms = budget.elapsed_ms;
        result.trace.push_back(std::move(record));
        result.steps = t;

        bool sufficient = decision.sufficiency_score
                              ? *decision.sufficiency_score >= cfg.sufficiency_threshold
                              : decision.sufficiency;
        if (sufficient && t >= cfg.t_min) {
            result.stop_reason = StopReason::sufficient;
            break;
        }
        if (budget.exhausted()) {
            result.stop_reason = StopReason::budget_exhausted;
            break;
        }
    }
    return result;
}

PolicyDecision HeuristicPolicy::decide(const PolicyContext& ctx) {
    if (ctx.window.empty()) throw PolicyError("heuristic policy requires a nonempty window");

    auto question_tokens = token_set(ctx.question);

    struct Scored {
        const Segment* seg;
        double score;
        size_t order;  // window position = rho order
    };
    std::vector<Scored> scored;
    scored.reserve(ctx.window.size());
    for (size_t i = 0; i < ctx.window.size(); ++i) {
        const Segment* seg = ctx.window[i];
        auto tokens = token_set(content_text(*seg));
        double score = jaccard(question_tokens, tokens);
        for (const auto& keyword : ctx.guidance.keywords) {
            if (tokens.count(keyword)) score += kKeywordBonus;
        }
        scored.push_back({seg, score, i});
    }

    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.order < b.order;
    });

    PolicyDecision decision;
    decision.strategy = "guided_topk";
    decision.top_k = ctx.cfg.top_k;
    size_t picks = std::min<size_t>(ctx.cfg.top_k, scored.size());
    for (size_t i = 0; i < picks; ++i) decision.segment_ids.push_back(scored[i].seg->id);

    // Sufficiency: question content-token coverage by selected plus picks, or
    // nothing relevant left in the window.
    std::set<std::string> covered;
    for (const Segment* seg : ctx.selected) {
        auto tokens = token_set(content_text(*seg));
        covered.insert(tokens.begin(), tokens.end());
    }
    for (size_t i = 0; i < picks; ++i) {
        auto tokens = token_set(content_text(*scored[i].seg));
        covered.insert(tokens.begin(), tokens.end());
    }
    std::vector<std::string> question_content;
    for (const auto& tok : question_tokens) {
        if (!is_stopword(tok)) question_content.push_back(tok);
    }
    double coverage = 1.0;
    if (!question_content.empty()) {
        size_t hit = 0;
        for (const auto& tok : question_content) hit += covered.count(tok);
        coverage = static_cast<double>(hit) / static_cast<double>(question_content.size());
    }
    double best_score = scored.empty() ? 0.0 : scored.front().score;
    decision.sufficiency = coverage >= kCoverageThreshold || best_score < kLowScoreThreshold;
    return decision;
}

PolicyDecision ScriptedPolicy::decide(const PolicyContext&) {
    if (next_ >= steps_.size()) {
        throw PolicyError("scripted policy ran out of steps at step " + std::to_string(next_ + 1));
    }
    return steps_[next_++];
}

PolicyDecision OraclePolicy::decide(const PolicyContext& ctx) {
    PolicyDecision decision;
    decision.strategy = "oracle";
    decision.top_k = ctx.cfg.top_k;

    std::set<std::string> selected_ids;
    for (const Segment* seg : ctx.selected) selected_ids.insert(seg->id);

    // Window arrives in rho order, so a forward scan picks the rho-earliest.
    for (const Segment* seg : ctx.window) {
        if (static_cast<int>(decision.segment_ids.size()) >= ctx.cfg.top_k) break;
        if (targets_.count(seg->id) && !selected_ids.count(seg->id)) {
            decision.segment_ids.push_back(seg->id);
        }
    }

    size_t have = 0;
    for (const auto& id : targets_) have += selected_ids.count(id);
    decision.sufficiency = have + decision.segment_ids.size() >= targets_.size();
    return decision;
}

namespace {

ordered_json budget_to_json(const BudgetState& b) {
    ordered_json j;
    j["steps_used"] = b.steps_used;
    j["tokens_used"] = b.tokens_used;
    j["calls_used"] = b.calls_used;
    j["elapsed_ms"] = b.elapsed_ms;
    return j;
}

}  // namespace

std::string serialize_trace(const EpisodeResult& result) {
    std::string out;
    for (const auto& record : result.trace) {
        ordered_json j;
        j["step"] = record.step;
        j["window_ids"] = record.window_ids;
        j["chosen_ids"] = record.accepted_ids;
        j["sufficiency"] = record.decision.sufficiency;
        j["budget"] = budget_to_json(record.budget);
        j["elapsed_ms"] = record.elapsed_ms;
        j["context_bytes"] = record.context_bytes;
        if (!record.warnings.empty()) j["warnings"] = record.warnings;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace hseq
