#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"
#include "hseq/adapters.hpp"
#include "hseq/canonicalize.hpp"
#include "hseq/ingest.hpp"
#include "hseq/metrics.hpp"
#include "hseq/pipeline.hpp"
#include "hseq/policy_llm.hpp"
#include "hseq/sha1.hpp"
#include "hseq/supervision.hpp"
#include "hseq/theory.hpp"

namespace {

using namespace hseq;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::fwrite(content.data(), 1, content.size(), stdout);
        return;
    }
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

struct CommonOptions {
    IterationConfig iteration;
    std::string endpoint_url;
    std::string model;
    std::string head_model;
    std::string cache_root;
    std::string head_model_id = "template";
    long long budget_tokens = kUnlimited;
    uint64_t seed = 0;
    bool fixed_clock = false;
    std::string policy = "heuristic";
    std::string mock_completion;
    int parallelism = 1;
    int refinement_delta = 0;
};

void add_iteration_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--window", opt.iteration.window, "Window size W");
    cmd->add_option("--top-k", opt.iteration.top_k, "Per-step selection cap k");
    cmd->add_option("--t-max", opt.iteration.t_max, "Step cap T_max");
    cmd->add_option("--t-min", opt.iteration.t_min, "Minimum steps T_min");
    cmd->add_option("--content-cap", opt.iteration.content_cap,
                    "Per-segment content truncation (bytes)");
    cmd->add_option("--budget-tokens", opt.budget_tokens, "Token budget per episode");
    cmd->add_option("--seed", opt.seed, "Seed recorded in outputs");
    cmd->add_flag("--fixed-clock", opt.fixed_clock,
                  "Deterministic timestamps (reproducible traces)");
}

void add_endpoint_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--endpoint", opt.endpoint_url, "Chat-completions endpoint URL");
    cmd->add_option("--model", opt.model, "Iteration model name");
    cmd->add_option("--head-model", opt.head_model, "Head model name");
    cmd->add_option("--policy", opt.policy, "Selection policy: heuristic or llm");
    cmd->add_option("--mock-completion", opt.mock_completion,
                    "Mock head completion text (no endpoint needed)");
    cmd->add_option("--cache-root", opt.cache_root, "Guidance cache directory");
    cmd->add_option("--head-model-id", opt.head_model_id, "Cache subdirectory per head model");
}

PipelineConfig make_pipeline_config(const CommonOptions& opt, const std::string& dataset) {
    PipelineConfig config;
    config.iteration = opt.iteration;
    config.policy = opt.policy == "llm" ? PolicyKind::llm : PolicyKind::heuristic;
    config.endpoint.url = opt.endpoint_url;
    config.endpoint.model = opt.model;
    if (const char* key = std::getenv("HSEQ_API_KEY")) config.endpoint.api_key = key;
    config.head_model = opt.head_model.empty() ? opt.model : opt.head_model;
    if (!opt.mock_completion.empty()) config.head_mock_completion = opt.mock_completion;
    config.dataset = dataset;
    config.guidance.cache_root = opt.cache_root;
    config.guidance.head_model_id = opt.head_model_id;
    config.token_budget = opt.budget_tokens;
    config.refinement_delta = opt.refinement_delta;
    config.fixed_clock = opt.fixed_clock;
    config.parallelism = opt.parallelism;
    config.seed = opt.seed;
    return config;
}

int cmd_build(const std::vector<std::string>& corpus_paths,
              const std::vector<std::string>& formats, char delimiter, const std::string& out) {
    if (corpus_paths.size() != formats.size()) {
        std::fprintf(stderr, "error: need one --format per --corpus\n");
        return 2;
    }
    Corpus corpus;
    for (size_t i = 0; i < corpus_paths.size(); ++i) {
        auto format = ingest_format_from_name(formats[i]);
        if (!format) {
            std::fprintf(stderr, "error: unknown format '%s'\n", formats[i].c_str());
            return 2;
        }
        merge_corpus(corpus, ingest(corpus_paths[i], *format, delimiter));
    }
    Hseq h = encode(corpus);
    auto report = validate(h);
    if (!report.empty()) {
        for (const auto& v : report) {
            std::fprintf(stderr, "violation: %s on '%s' (%s)\n", v.rule.c_str(),
                         v.segment_id.c_str(), v.detail.c_str());
        }
        return 1;
    }
    write_file(out, serialize(h));
    std::fprintf(stderr, "wrote %zu segments to %s\n", h.size(), out.c_str());
    return 0;
}

std::unique_ptr<SelectionPolicy> make_policy(const CommonOptions& opt,
                                             std::unique_ptr<ChatClient>& client_out) {
    if (opt.policy == "llm") {
        EndpointConfig endpoint;
        endpoint.url = opt.endpoint_url;
        endpoint.model = opt.model;
        if (const char* key = std::getenv("HSEQ_API_KEY")) endpoint.api_key = key;
        client_out = std::make_unique<HttpChatClient>(endpoint);
        return std::make_unique<LlmPolicy>(*client_out, opt.model);
    }
    return std::make_unique<HeuristicPolicy>();
}

int cmd_iterate(const std::string& hseq_path, const std::string& questions_path,
                const CommonOptions& opt, const std::string& dataset,
                const std::string& trace_out, const std::string& packages_out) {
    Hseq h = deserialize(read_file(hseq_path));
    auto questions = load_questions_jsonl(read_file(questions_path));

    GuidanceCacheConfig gcfg;
    gcfg.cache_root = opt.cache_root;
    gcfg.head_model_id = opt.head_model_id;

    std::string traces;
    std::string packages;
    ClockFn clock = opt.fixed_clock ? fixed_clock() : system_clock_ms();
    for (const auto& q : questions) {
        Guidance guidance = cached_guidance(gcfg, q.dataset.value_or(dataset), q.question);
        BudgetState budget;
        budget.step_cap = opt.iteration.t_max;
        budget.token_budget = opt.budget_tokens;
        std::unique_ptr<ChatClient> client;
        auto policy = make_policy(opt, client);
        auto episode = run_episode(q.question, h, guidance, *policy, opt.iteration, budget, {},
                                   clock);
        traces += serialize_trace(episode);
        auto pkg = canonicalize(episode.selected, h, q.question,
                                q.dataset.value_or(dataset) + "/" +
                                    sha1_hex(q.question).substr(0, 12));
        packages += serialize_package(pkg);
        packages += '\n';
        std::fprintf(stderr, "%s -> %d steps, %zu selected (%s)\n", q.question.c_str(),
                     episode.steps, episode.selected.size(),
                     std::string(stop_reason_name(episode.stop_reason)).c_str());
    }
    write_file(trace_out, traces);
    write_file(packages_out, packages);
    return 0;
}

int cmd_answer(const std::string& hseq_path, const std::string& question,
               const CommonOptions& opt, const std::string& dataset, const std::string& out) {
    Hseq h = deserialize(read_file(hseq_path));
    PipelineConfig config = make_pipeline_config(opt, dataset);
    EvalQuestion q{question, "", std::nullopt};
    auto artifacts = run_question(q, h, config);
    std::string line = serialize_eval_record(artifacts.record);
    write_file(out, line + "\n");
    std::printf("%s\n", artifacts.record.predicted.c_str());
    return 0;
}

int cmd_sft(const std::string& hseq_path, const std::string& questions_path,
            const CommonOptions& opt, const std::string& dataset, int u, int candidate_cap,
            const std::string& out) {
    Hseq h = deserialize(read_file(hseq_path));
    auto questions = load_questions_jsonl(read_file(questions_path));

    std::vector<TrainingTuple> tuples;
    double prf_sum = 0.0;
    size_t prf_count = 0;
    for (const auto& q : questions) {
        if (q.gold.empty()) {
            std::fprintf(stderr, "skipping question without gold answer: %s\n",
                         q.question.c_str());
            continue;
        }
        auto positives = weak_positives(q.question, q.gold, h, candidate_cap, u);
        if (positives.empty()) {
            std::fprintf(stderr, "no positives for: %s\n", q.question.c_str());
            continue;
        }
        auto trajectory = synthesize_trajectory(positives, h, opt.iteration.top_k, u);
        tuples.push_back(make_training_tuple(q.question, q.dataset.value_or(dataset), hseq_path,
                                             h, trajectory, opt.iteration));

        // Proxy selection metric: heuristic picks vs the synthesized target.
        Guidance guidance = template_guidance(q.question, classify_question(q.question));
        HeuristicPolicy policy;
        BudgetState budget;
        budget.step_cap = opt.iteration.t_max;
        auto episode = run_episode(q.question, h, guidance, policy, opt.iteration, budget, {},
                                   fixed_clock());
        std::vector<std::string> target_ids;
        for (const auto& step : trajectory.steps) {
            target_ids.insert(target_ids.end(), step.ids.begin(), step.ids.end());
        }
        prf_sum += proxy_prf(episode.selected, target_ids).f1;
        ++prf_count;
    }

    write_file(out, export_sft(tuples));
    size_t records = 0;
    for (const auto& t : tuples) records += t.records.size();
    std::fprintf(stderr, "exported %zu tuples (%zu step records) to %s\n", tuples.size(),
                 records, out.c_str());
    if (prf_count > 0) {
        std::printf("mean_proxy_f1=%.4f over %zu questions (seed %llu)\n", prf_sum / prf_count,
                    prf_count, static_cast<unsigned long long>(opt.seed));
    }
    return 0;
}

int cmd_simulate(int trials, uint64_t seed, const std::string& out) {
    std::string lines;
    bool all_pass = true;
    std::printf("%4s %4s %4s %4s %6s %4s %10s %10s %8s %6s\n", "m", "p", "k", "L", "R", "W",
                "empirical", "bound", "margin", "pass");
    for (int m : {1, 2, 3}) {
        for (double p : {0.3, 0.5, 0.9}) {
            for (int k : {1, 2}) {
                for (int L : {3, 6}) {
                    int w = std::max(L, k);
                    auto report = simulate_stochastic(k, w, L, m, p, trials, seed);
                    lines += serialize_bound_report(report);
                    lines += '\n';
                    all_pass = all_pass && report.pass;
                    std::printf("%4d %4.1f %4d %4d %6d %4d %10.5f %10.5f %8.4f %6s\n", m, p, k,
                                L, report.rounds, w, report.empirical, report.bound,
                                report.margin, report.pass ? "yes" : "NO");
                }
            }
        }
    }
    if (!out.empty()) write_file(out, lines);
    return all_pass ? 0 : 1;
}

int cmd_eval(const std::string& hseq_path, const std::string& questions_path,
             const CommonOptions& opt, const std::string& dataset, const std::string& out,
             const std::string& trace_out, const std::string& packages_out) {
    Hseq h = deserialize(read_file(hseq_path));
    auto questions = load_questions_jsonl(read_file(questions_path));
    PipelineConfig config = make_pipeline_config(opt, dataset);
    auto run = evaluate(questions, h, config);
    write_file(out, run.records_jsonl);
    if (!trace_out.empty()) write_file(trace_out, run.trace_jsonl);
    if (!packages_out.empty()) write_file(packages_out, run.packages_jsonl);
    std::printf("%s\n", serialize_aggregate(run.aggregate).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hseq: reversible linearization and guided iterative evidence selection"};
    app.require_subcommand(1);
    app.set_config("--config");

    CommonOptions opt;

    // build
    auto* build = app.add_subcommand("build", "Ingest a corpus and write an HSEQ file");
    std::vector<std::string> corpus_paths;
    std::vector<std::string> formats;
    char delimiter = ',';
    std::string build_out = "hseq.jsonl";
    build->add_option("--corpus", corpus_paths, "Corpus path (repeatable)")->required();
    build->add_option("--format", formats, "Format per corpus path: text|table|kg")->required();
    build->add_option("--delimiter", delimiter, "Table column delimiter");
    build->add_option("--out", build_out, "Output HSEQ path");

    // iterate
    auto* iterate = app.add_subcommand("iterate", "Run selection episodes over an HSEQ");
    std::string hseq_path;
    std::string questions_path;
    std::string dataset = "default";
    std::string trace_out = "traces.jsonl";
    std::string packages_out = "packages.jsonl";
    iterate->add_option("--hseq", hseq_path, "HSEQ file")->required();
    iterate->add_option("--questions", questions_path, "Questions JSONL")->required();
    iterate->add_option("--dataset", dataset, "Dataset label for cache keys");
    iterate->add_option("--trace-out", trace_out, "Trace output path");
    iterate->add_option("--packages-out", packages_out, "Evidence package output path");
    add_iteration_flags(iterate, opt);
    add_endpoint_flags(iterate, opt);

    // answer
    auto* answer = app.add_subcommand("answer", "Answer one question end to end");
    std::string question;
    std::string answer_out = "-";
    answer->add_option("--hseq", hseq_path, "HSEQ file")->required();
    answer->add_option("--question", question, "Question text")->required();
    answer->add_option("--dataset", dataset, "Dataset label");
    answer->add_option("--out", answer_out, "Answer record path ('-' for stdout)");
    answer->add_option("--refine-delta", opt.refinement_delta, "Refinement step allowance");
    add_iteration_flags(answer, opt);
    add_endpoint_flags(answer, opt);

    // sft
    auto* sft = app.add_subcommand("sft", "Export SFT supervision from gold answers");
    int u = 1;
    int candidate_cap = 48;
    std::string sft_out = "sft.jsonl";
    sft->add_option("--hseq", hseq_path, "HSEQ file")->required();
    sft->add_option("--questions", questions_path, "Questions JSONL with answers")->required();
    sft->add_option("--dataset", dataset, "Dataset label");
    sft->add_option("--sufficiency-u", u, "Positives needed before the stop label");
    sft->add_option("--candidate-cap", candidate_cap, "Weak-positive candidate cap");
    sft->add_option("--out", sft_out, "SFT output path");
    add_iteration_flags(sft, opt);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run the formal-bound harness grid");
    int trials = 100000;
    std::string simulate_out;
    simulate->add_option("--trials", trials, "Monte Carlo trials per cell");
    simulate->add_option("--seed", opt.seed, "RNG seed");
    simulate->add_option("--out", simulate_out, "Bound report JSONL path");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate EM/F1 and efficiency over questions");
    std::string eval_out = "records.jsonl";
    eval->add_option("--hseq", hseq_path, "HSEQ file")->required();
    eval->add_option("--questions", questions_path, "Questions JSONL with answers")->required();
    eval->add_option("--dataset", dataset, "Dataset label");
    eval->add_option("--out", eval_out, "Record output path");
    eval->add_option("--trace-out", trace_out, "Trace output path");
    eval->add_option("--packages-out", packages_out, "Package output path");
    eval->add_option("--parallel", opt.parallelism, "Concurrent questions");
    eval->add_option("--refine-delta", opt.refinement_delta, "Refinement step allowance");
    add_iteration_flags(eval, opt);
    add_endpoint_flags(eval, opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) {
            return cmd_build(corpus_paths, formats, delimiter, build_out);
        }
        if (iterate->parsed()) {
            return cmd_iterate(hseq_path, questions_path, opt, dataset, trace_out, packages_out);
        }
        if (answer->parsed()) {
            return cmd_answer(hseq_path, question, opt, dataset, answer_out);
        }
        if (sft->parsed()) {
            return cmd_sft(hseq_path, questions_path, opt, dataset, u, candidate_cap, sft_out);
        }
        if (simulate->parsed()) {
            return cmd_simulate(trials, opt.seed, simulate_out);
        }
        if (eval->parsed()) {
            return cmd_eval(hseq_path, questions_path, opt, dataset, eval_out, trace_out,
                            packages_out);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
