#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hseq/engine.hpp"
#include "hseq/model.hpp"

namespace hseq {

struct WeakPositive {
    enum class MatchKind { exact, lexical };

    std::string segment_id;
    double confidence = 1.0;  // 1.0 exact answer match, 0.5 lexical fallback
    MatchKind kind = MatchKind::exact;

    bool operator==(const WeakPositive&) const = default;
};

// Weak-positive labeling: candidates are the first candidate_cap segments in
// rho order (container levels lead by construction of rho). The exact pass
// marks case-insensitive substring matches of the gold answer at confidence
// 1.0; if fewer than fallback_n are found, the highest question-Jaccard
// segments with positive overlap are added at 0.5 until fallback_n is reached.
std::vector<WeakPositive> weak_positives(const std::string& question,
                                         const std::string& gold_answer, const Hseq& h,
                                         int candidate_cap = 48, int fallback_n = 1);

struct TrajectoryStep {
    std::vector<std::string> ids;  // up to k picks
    int sufficiency = 0;           // s_t*
    double weight = 1.0;           // mean confidence of this step's picks

    bool operator==(const TrajectoryStep&) const = default;
};

struct TargetTrajectory {
    std::vector<TrajectoryStep> steps;
    int stop_time = 0;  // tau*

    bool sufficient() const { return !steps.empty() && steps.back().sufficiency == 1; }
    bool operator==(const TargetTrajectory&) const = default;
};

// Greedy synthesis: each step takes up to k unseen positives by descending
// confidence (rho-earliest on ties); the step reaching u cumulative positives
// is labeled sufficient and ends the trajectory. The final label stays 0 when
// the positives run out before u is met.
TargetTrajectory synthesize_trajectory(const std::vector<WeakPositive>& positives, const Hseq& h,
                                       int k, int u);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const Prf&) const = default;
};

// Micro precision/recall/F1 over segment id sets. Empty-side conventions:
// an empty side scores 1.0 on its own metric; F1 is 0 when P + R == 0.
Prf proxy_prf(const std::vector<std::string>& chosen_ids,
              const std::vector<std::string>& target_ids);

struct SftRecord {
    std::string prompt;
    std::string output;       // compact decision object
    size_t mask_boundary = 0; // character index where the loss starts
    std::string dataset;
    std::string question_sha1;
    int step = 0;
    double weight = 1.0;
};

struct TrainingTuple {
    std::string question;
    std::optional<std::string> question_type;
    std::string hseq_ref;
    std::string dataset;
    TargetTrajectory trajectory;
    std::vector<SftRecord> records;  // one per trajectory step
};

// Builds the per-step prompt/output pairs for a trajectory: prompts follow the
// iteration template with template guidance, outputs are rendered decisions,
// and the masking boundary is the prompt length.
TrainingTuple make_training_tuple(const std::string& question, const std::string& dataset,
                                  const std::string& hseq_ref, const Hseq& h,
                                  const TargetTrajectory& trajectory, const IterationConfig& cfg);

// Line-delimited export ordered by (dataset, question hash, step).
// Throws std::runtime_error if any target fails to re-parse as a decision.
std::string export_sft(const std::vector<TrainingTuple>& tuples);

}  // namespace hseq
