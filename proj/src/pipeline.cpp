#include "hseq/pipeline.hpp"

#include <atomic>
#include <thread>

#include "hseq/canonicalize.hpp"
#include "hseq/metrics.hpp"
#include "hseq/sha1.hpp"
#include "json.hpp"

namespace hseq {

using ordered_json = nlohmann::ordered_json;

QuestionRunArtifacts run_question(const EvalQuestion& q, const Hseq& h,
                                  const PipelineConfig& config) {
    QuestionRunArtifacts artifacts;
    artifacts.record.question = q.question;
    artifacts.record.gold = q.gold;

    ClockFn clock = config.fixed_clock ? fixed_clock() : system_clock_ms();
    const std::string dataset = q.dataset.value_or(config.dataset);
    const std::string episode_ref = dataset + "/" + sha1_hex(q.question).substr(0, 12);

    Guidance guidance = cached_guidance(config.guidance, dataset, q.question, nullptr);

    BudgetState budget;
    budget.step_cap = config.iteration.t_max;
    budget.min_steps = config.iteration.t_min;
    budget.token_budget = config.token_budget;
    budget.call_budget = config.call_budget;
    budget.latency_budget_ms = config.latency_budget_ms;

    // Per-question client/policy instances keep parallel evaluation safe.
    std::unique_ptr<ChatClient> head_client;
    if (config.head_mock_completion) {
        head_client = std::make_unique<MockChatClient>(*config.head_mock_completion);
    } else {
        head_client = std::make_unique<HttpChatClient>(config.endpoint);
    }

    std::unique_ptr<ChatClient> policy_client;
    std::unique_ptr<SelectionPolicy> policy;
    if (config.policy == PolicyKind::llm) {
        policy_client = std::make_unique<HttpChatClient>(config.endpoint);
        policy = std::make_unique<LlmPolicy>(*policy_client, config.endpoint.model);
    } else {
        policy = std::make_unique<HeuristicPolicy>();
    }

    EpisodeResult episode = run_episode(q.question, h, guidance, *policy, config.iteration,
                                        budget, {}, clock);
    EvidencePackage pkg = canonicalize(episode.selected, h, q.question, episode_ref);

    Answer answer = synthesize(q.question, pkg, guidance, *head_client,
                               config.head_model, nullptr);

    int total_steps = episode.steps;
    long long selection_latency = episode.trace.empty() ? 0 : episode.trace.back().elapsed_ms;
    long long head_latency = answer.head_latency_ms;

    if (config.refinement_delta > 0) {
        RefinementConfig rc;
        rc.delta = config.refinement_delta;
        rc.tightened_guidance = guidance;
        rc.reduced_budget = BudgetState{};
        rc.reduced_budget.step_cap = config.refinement_delta;
        EngineHandle handle{h, *policy, config.iteration, *head_client, config.head_model,
                            episode.selected, clock};
        RefinementResult refined = verify_and_refine(answer, pkg, q.question, handle, rc);
        if (refined.resumed_episode) {
            total_steps += refined.resumed_episode->steps;
            if (!refined.resumed_episode->trace.empty()) {
                selection_latency += refined.resumed_episode->trace.back().elapsed_ms;
            }
            head_latency += refined.answer.head_latency_ms;
        }
        answer = refined.answer;
        pkg = refined.package;
    }

    auto [em, f1] = em_f1(answer.text, q.gold);
    artifacts.record.predicted = answer.text;
    artifacts.record.em = em;
    artifacts.record.f1 = f1;
    artifacts.record.steps = total_steps;
    artifacts.record.selection_latency_ms = selection_latency;
    artifacts.record.head_latency_ms = head_latency;
    artifacts.record.total_latency_ms = selection_latency + head_latency;
    artifacts.trace_jsonl = serialize_trace(episode);
    artifacts.package_json = serialize_package(pkg);
    return artifacts;
}

EvalRun evaluate(const std::vector<EvalQuestion>& questions, const Hseq& h,
                 const PipelineConfig& config) {
    config.iteration.check();

    std::vector<QuestionRunArtifacts> results(questions.size());
    std::atomic<size_t> next{0};
    int workers = std::max(1, config.parallelism);
    workers = std::min<int>(workers, static_cast<int>(std::max<size_t>(questions.size(), 1)));

    auto work = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= questions.size()) break;
            try {
                results[i] = run_question(questions[i], h, config);
            } catch (const std::exception& e) {
                QuestionRunArtifacts failed;
                failed.record.question = questions[i].question;
                failed.record.gold = questions[i].gold;
                failed.record.em = 0;
                failed.record.f1 = 0.0;
                failed.record.error = e.what();
                results[i] = std::move(failed);
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < workers; ++i) threads.emplace_back(work);
        for (auto& t : threads) t.join();
    }

    EvalRun run;
    for (auto& result : results) {
        run.records.push_back(result.record);
        run.records_jsonl += serialize_eval_record(result.record);
        run.records_jsonl += '\n';
        run.trace_jsonl += result.trace_jsonl;
        if (!result.package_json.empty()) {
            run.packages_jsonl += result.package_json;
            run.packages_jsonl += '\n';
        }
    }

    EvalAggregate agg;
    agg.count = run.records.size();
    for (const auto& record : run.records) {
        agg.mean_em += record.em;
        agg.mean_f1 += record.f1;
        agg.mean_steps += record.steps;
        agg.mean_selection_latency_ms += static_cast<double>(record.selection_latency_ms);
        agg.mean_head_latency_ms += static_cast<double>(record.head_latency_ms);
        agg.mean_total_latency_ms += static_cast<double>(record.total_latency_ms);
    }
    if (agg.count > 0) {
        double n = static_cast<double>(agg.count);
        agg.mean_em /= n;
        agg.mean_f1 /= n;
        agg.mean_steps /= n;
        agg.mean_selection_latency_ms /= n;
        agg.mean_head_latency_ms /= n;
        agg.mean_total_latency_ms /= n;
    }
    run.aggregate = agg;
    return run;
}

std::string serialize_eval_record(const EvalRecord& record) {
    ordered_json j;
    j["question"] = record.question;
    j["gold"] = record.gold;
    j["predicted"] = record.predicted;
    j["em"] = record.em;
    j["f1"] = record.f1;
    j["steps"] = record.steps;
    j["selection_latency_ms"] = record.selection_latency_ms;
    j["head_latency_ms"] = record.head_latency_ms;
    j["total_latency_ms"] = record.total_latency_ms;
    if (record.error) j["error"] = *record.error;
    return j.dump();
}

std::string serialize_aggregate(const EvalAggregate& aggregate) {
    ordered_json j;
    j["count"] = aggregate.count;
    j["mean_em"] = aggregate.mean_em;
    j["mean_f1"] = aggregate.mean_f1;
    j["mean_steps"] = aggregate.mean_steps;
    j["mean_selection_latency_ms"] = aggregate.mean_selection_latency_ms;
    j["mean_head_latency_ms"] = aggregate.mean_head_latency_ms;
    j["mean_total_latency_ms"] = aggregate.mean_total_latency_ms;
    return j.dump();
}

std::vector<EvalQuestion> load_questions_jsonl(const std::string& text) {
    std::vector<EvalQuestion> questions;
    size_t pos = 0;
    size_t line_no = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("questions line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
        EvalQuestion q;
        q.question = j.at("question").get<std::string>();
        q.gold = j.value("answer", std::string());
        if (j.contains("dataset")) q.dataset = j["dataset"].get<std::string>();
        questions.push_back(std::move(q));
    }
    return questions;
}

}  // namespace hseq
