#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hseq/guidance.hpp"
#include "hseq/model.hpp"

namespace hseq {

inline constexpr long long kUnlimited = std::numeric_limits<long long>::max();

// Per-episode counters against configured caps. Counters only grow within an
// episode; the state is never shared across episodes.
struct BudgetState {
    long long steps_used = 0;
    long long step_cap = kUnlimited;  // T_max
    long long min_steps = 1;          // T_min
    long long tokens_used = 0;
    long long token_budget = kUnlimited;
    long long calls_used = 0;
    long long call_budget = kUnlimited;
    long long elapsed_ms = 0;
    long long latency_budget_ms = kUnlimited;

    bool exhausted() const {
        return steps_used >= step_cap || tokens_used >= token_budget ||
               calls_used >= call_budget || elapsed_ms >= latency_budget_ms;
    }

    bool operator==(const BudgetState&) const = default;
};

struct IterationConfig {
    int window = 48;       // W
    int top_k = 4;         // k
    int t_max = 6;
    int t_min = 1;
    double sufficiency_threshold = 0.5;  // tau, applied when a policy scores
    int content_cap = 300;               // per-segment truncation for prompts

    void check() const;  // throws std::invalid_argument on a bad combination
};

// Action emitted by a policy each step.
struct PolicyDecision {
    std::vector<std::string> segment_ids;
    std::string strategy = "guided_topk";
    int top_k = 0;
    bool sufficiency = false;
    std::optional<double> sufficiency_score;

    bool operator==(const PolicyDecision&) const = default;
};

struct PolicyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PolicyContext {
    const std::string& question;
    const Guidance& guidance;
    const std::vector<const Segment*>& selected;
    const std::vector<const Segment*>& window;
    const IterationConfig& cfg;
    BudgetState& budget;
};

class SelectionPolicy {
public:
    virtual ~SelectionPolicy() = default;
    virtual PolicyDecision decide(const PolicyContext& ctx) = 0;
    // True when the policy records its own tokens/calls into the budget
    // (LLM-backed policies do via the chat client).
    virtual bool self_accounting() const { return false; }
    virtual std::string name() const = 0;
};

enum class StopReason { sufficient, budget_exhausted, stream_exhausted };
std::string_view stop_reason_name(StopReason reason);

struct StepRecord {
    int step = 0;
    std::vector<std::string> window_ids;
    PolicyDecision decision;
    std::vector<std::string> accepted_ids;  // ids actually added this step
    BudgetState budget;                     // snapshot after the step
    long long elapsed_ms = 0;
    long long context_bytes = 0;
    std::vector<std::string> warnings;
};

struct EpisodeResult {
    std::vector<std::string> selected;  // M_tau in selection order
    int steps = 0;                      // tau
    StopReason stop_reason = StopReason::stream_exhausted;
    std::vector<StepRecord> trace;
};

// Millisecond clock; injectable so traces can be made byte-reproducible.
using ClockFn = std::function<long long()>;
ClockFn system_clock_ms();
ClockFn fixed_clock();  // always 0

// Earliest W unselected candidate-level segments in rho order.
std::vector<const Segment*> window(const Hseq& h, const std::set<std::string>& selected, int w);

// Rho-sorted candidate-level stream for repeated windowing.
std::vector<const Segment*> candidate_stream(const Hseq& h);

// One "- [id] level content" line per segment, content truncated to cap bytes.
std::string render_segment_line(const Segment& seg, int content_cap);
std::string render_window_context(const std::vector<const Segment*>& segs, int content_cap);

// Upper bound on presented-context bytes per step: window times the
// per-segment cap (content cap plus framing overhead).
inline constexpr long long kRenderOverheadBytes = 64;
long long context_cost_bound(const IterationConfig& cfg);

// Guided iterative selection: present window, apply policy, add in-window
// picks, refresh, stop on sufficiency after t_min, budget, or stream end.
// Deterministic given a deterministic policy and clock. initial_selected
// resumes a prior episode; those ids are included in the result's selected.
EpisodeResult run_episode(const std::string& question, const Hseq& h, const Guidance& guidance,
                          SelectionPolicy& policy, const IterationConfig& cfg, BudgetState& budget,
                          const std::vector<std::string>& initial_selected = {},
                          const ClockFn& clock = {});

// |a intersect b| / |a union b|; 0.0 when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Deterministic lexical baseline standing in for a learned policy.
class HeuristicPolicy : public SelectionPolicy {
public:
    PolicyDecision decide(const PolicyContext& ctx) override;
    std::string name() const override { return "heuristic"; }

    static constexpr double kCoverageThreshold = 0.8;
    static constexpr double kLowScoreThreshold = 0.05;
    static constexpr double kKeywordBonus = 0.1;
};

// Replays a fixed list of per-step decisions (fixtures, case studies).
class ScriptedPolicy : public SelectionPolicy {
public:
    explicit ScriptedPolicy(std::vector<PolicyDecision> steps) : steps_(std::move(steps)) {}
    PolicyDecision decide(const PolicyContext& ctx) override;
    std::string name() const override { return "scripted"; }

private:
    std::vector<PolicyDecision> steps_;
    size_t next_ = 0;
};

// Selects the k rho-earliest unselected target items; sufficiency fires once
// every target is selected. Used by the theory harness.
class OraclePolicy : public SelectionPolicy {
public:
    explicit OraclePolicy(std::vector<std::string> targets)
        : targets_(targets.begin(), targets.end()) {}
    PolicyDecision decide(const PolicyContext& ctx) override;
    std::string name() const override { return "oracle"; }

private:
    std::set<std::string> targets_;
};

// Per-step trace export, one JSON record per line.
std::string serialize_trace(const EpisodeResult& result);

}  // namespace hseq
