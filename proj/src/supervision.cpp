#include "hseq/supervision.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "hseq/guidance.hpp"
#include "hseq/policy_llm.hpp"
#include "hseq/sha1.hpp"
#include "hseq/text_util.hpp"
#include "json.hpp"

namespace hseq {

using ordered_json = nlohmann::ordered_json;

namespace {

bool icontains(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return false;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](unsigned char a, unsigned char b) {
                              return std::tolower(a) == std::tolower(b);
                          });
    return it != haystack.end();
}

}  // namespace

std::vector<WeakPositive> weak_positives(const std::string& question,
                                         const std::string& gold_answer, const Hseq& h,
                                         int candidate_cap, int fallback_n) {
    if (gold_answer.empty()) {
        throw std::invalid_argument("weak_positives requires a nonempty gold answer");
    }
    auto stream = candidate_stream(h);
    if (static_cast<int>(stream.size()) > candidate_cap) {
        stream.resize(static_cast<size_t>(candidate_cap));
    }

    std::vector<WeakPositive> positives;
    std::set<std::string> taken;
    for (const Segment* seg : stream) {
        if (icontains(content_text(*seg), gold_answer)) {
            positives.push_back({seg->id, 1.0, WeakPositive::MatchKind::exact});
            taken.insert(seg->id);
        }
    }

    if (static_cast<int>(positives.size()) < fallback_n) {
        auto question_tokens = token_set(question);
        struct Scored {
            const Segment* seg;
            double score;
            size_t order;
        };
        std::vector<Scored> scored;
        for (size_t i = 0; i < stream.size(); ++i) {
            if (taken.count(stream[i]->id)) continue;
            double score = jaccard(question_tokens, token_set(content_text(*stream[i])));
            if (score > 0.0) scored.push_back({stream[i], score, i});
        }
        std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.order < b.order;
        });
        for (const auto& s : scored) {
            if (static_cast<int>(positives.size()) >= fallback_n) break;
            positives.push_back({s.seg->id, 0.5, WeakPositive::MatchKind::lexical});
        }
    }
    return positives;
}

TargetTrajectory synthesize_trajectory(const std::vector<WeakPositive>& positives, const Hseq& h,
                                       int k, int u) {
    if (k < 1 || u < 1) {
        throw std::invalid_argument("synthesize_trajectory requires k >= 1 and u >= 1");
    }

    // Order: confidence descending, rho-earliest on ties.
    std::vector<WeakPositive> pool = positives;
    std::stable_sort(pool.begin(), pool.end(), [&](const WeakPositive& a, const WeakPositive& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        const Segment* sa = h.find(a.segment_id);
        const Segment* sb = h.find(b.segment_id);
        if (sa && sb) return rho_compare(*sa, *sb) < 0;
        return a.segment_id < b.segment_id;
    });

    TargetTrajectory trajectory;
    size_t cursor = 0;
    int cumulative = 0;
    while (cursor < pool.size()) {
        TrajectoryStep step;
        double confidence_sum = 0.0;
        while (cursor < pool.size() && static_cast<int>(step.ids.size()) < k) {
            step.ids.push_back(pool[cursor].segment_id);
            confidence_sum += pool[cursor].confidence;
            ++cursor;
        }
        cumulative += static_cast<int>(step.ids.size());
        step.weight = confidence_sum / static_cast<double>(step.ids.size());
        step.sufficiency = cumulative >= u ? 1 : 0;
        trajectory.steps.push_back(std::move(step));
        if (cumulative >= u) break;
    }
    trajectory.stop_time = static_cast<int>(trajectory.steps.size());
    return trajectory;
}

Prf proxy_prf(const std::vector<std::string>& chosen_ids,
              const std::vector<std::string>& target_ids) {
    std::set<std::string> chosen(chosen_ids.begin(), chosen_ids.end());
    std::set<std::string> target(target_ids.begin(), target_ids.end());
    if (chosen.empty() && target.empty()) return {1.0, 1.0, 1.0};

    size_t inter = 0;
    for (const auto& id : chosen) inter += target.count(id);

    Prf out;
    out.precision = chosen.empty() ? 1.0 : static_cast<double>(inter) / chosen.size();
    out.recall = target.empty() ? 1.0 : static_cast<double>(inter) / target.size();
    out.f1 = (out.precision + out.recall) == 0.0
                 ? 0.0
                 : 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

TrainingTuple make_training_tuple(const std::string& question, const std::string& dataset,
                                  const std::string& hseq_ref, const Hseq& h,
                                  const TargetTrajectory& trajectory, const IterationConfig& cfg) {
    TrainingTuple tuple;
    tuple.question = question;
    tuple.question_type = std::string(question_type_name(classify_question(question)));
    tuple.hseq_ref = hseq_ref;
    tuple.dataset = dataset;
    tuple.trajectory = trajectory;

    Guidance guidance = template_guidance(question, classify_question(question));
    std::string qsha = sha1_hex(question);

    std::set<std::string> selected_ids;
    std::vector<const Segment*> selected_segments;
    for (size_t t = 0; t < trajectory.steps.size(); ++t) {
        const auto& step = trajectory.steps[t];
        auto win = window(h, selected_ids, cfg.window);

        auto [system, user] =
            build_iteration_prompt(question, guidance.text, selected_segments, win,
                                   cfg.content_cap);
        (void)system;  // the SFT sequence is the user prompt plus the target

        PolicyDecision target;
        target.segment_ids = step.ids;
        target.strategy = "guided_topk";
        target.top_k = cfg.top_k;
        target.sufficiency = step.sufficiency == 1;

        SftRecord record;
        record.prompt = user;
        record.output = render_decision(target);
        record.mask_boundary = record.prompt.size();
        record.dataset = dataset;
        record.question_sha1 = qsha;
        record.step = static_cast<int>(t + 1);
        record.weight = step.weight;
        tuple.records.push_back(std::move(record));

        for (const auto& id : step.ids) {
            if (selected_ids.insert(id).second) {
                if (const Segment* seg = h.find(id)) selected_segments.push_back(seg);
            }
        }
    }
    return tuple;
}

std::string export_sft(const std::vector<TrainingTuple>& tuples) {
    std::vector<const SftRecord*> records;
    for (const auto& tuple : tuples) {
        for (const auto& record : tuple.records) records.push_back(&record);
    }
    std::stable_sort(records.begin(), records.end(), [](const SftRecord* a, const SftRecord* b) {
        if (a->dataset != b->dataset) return a->dataset < b->dataset;
        if (a->question_sha1 != b->question_sha1) return a->question_sha1 < b->question_sha1;
        return a->step < b->step;
    });

    std::string out;
    for (const SftRecord* record : records) {
        // Every exported target must round-trip through the schema parser.
        try {
            parse_decision(record->output);
        } catch (const DecisionParseError& e) {
            throw std::runtime_error("export_sft: target for question " + record->question_sha1 +
                                     " step " + std::to_string(record->step) +
                                     " is not a valid decision: " + e.what());
        }
        ordered_json j;
        j["prompt"] = record->prompt;
        j["output"] = record->output;
        j["mask_boundary"] = record->mask_boundary;
        ordered_json meta;
        meta["dataset"] = record->dataset;
        meta["question_sha1"] = record->question_sha1;
        meta["step"] = record->step;
        meta["weight"] = record->weight;
        j["meta"] = std::move(meta);
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace hseq
