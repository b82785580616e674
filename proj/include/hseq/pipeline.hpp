#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hseq/engine.hpp"
#include "hseq/head.hpp"
#include "hseq/policy_llm.hpp"

namespace hseq {

struct EvalQuestion {
    std::string question;
    std::string gold;
    std::optional<std::string> dataset;
};

struct EvalRecord {
    std::string question;
    std::string gold;
    std::string predicted;
    int em = 0;
    double f1 = 0.0;
    int steps = 0;
    long long selection_latency_ms = 0;
    long long head_latency_ms = 0;
    long long total_latency_ms = 0;
    std::optional<std::string> error;
};

struct EvalAggregate {
    size_t count = 0;
    double mean_em = 0.0;
    double mean_f1 = 0.0;
    double mean_steps = 0.0;
    double mean_selection_latency_ms = 0.0;
    double mean_head_latency_ms = 0.0;
    double mean_total_latency_ms = 0.0;
};

enum class PolicyKind { heuristic, llm };

struct PipelineConfig {
    IterationConfig iteration;
    PolicyKind policy = PolicyKind::heuristic;
    EndpointConfig endpoint;            // used for PolicyKind::llm and a real head
    std::string head_model;
    std::optional<std::string> head_mock_completion;  // mocked head when set
    std::string dataset = "default";
    GuidanceCacheConfig guidance;
    long long token_budget = kUnlimited;
    long long call_budget = kUnlimited;
    long long latency_budget_ms = kUnlimited;
    int refinement_delta = 0;
    bool fixed_clock = false;           // deterministic timestamps
    int parallelism = 1;
    uint64_t seed = 0;                  // recorded in outputs
};

struct QuestionRunArtifacts {
    EvalRecord record;
    std::string trace_jsonl;    // per-step lines for this question
    std::string package_json;   // serialized evidence package
};

struct EvalRun {
    std::vector<EvalRecord> records;
    EvalAggregate aggregate;
    std::string records_jsonl;
    std::string trace_jsonl;
    std::string packages_jsonl;
};

// Full pipeline for one question: guidance, episode, canonicalize, synthesize,
// optional refinement, metrics. Mock clients keep it fully deterministic.
QuestionRunArtifacts run_question(const EvalQuestion& q, const Hseq& h,
                                  const PipelineConfig& config);

// Runs every question (optionally in parallel), emits per-question records and
// aggregates. Per-question failures become em=0/f1=0 records with an error
// note; they never abort the run.
EvalRun evaluate(const std::vector<EvalQuestion>& questions, const Hseq& h,
                 const PipelineConfig& config);

std::string serialize_eval_record(const EvalRecord& record);
std::string serialize_aggregate(const EvalAggregate& aggregate);

// JSONL question files: {"question":..., "answer":...[, "dataset":...]}
std::vector<EvalQuestion> load_questions_jsonl(const std::string& text);

}  // namespace hseq
