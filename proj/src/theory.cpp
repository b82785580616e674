#include "hseq/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "hseq/engine.hpp"
#include "json.hpp"

namespace hseq {

using ordered_json = nlohmann::ordered_json;

Hseq make_synthetic_stream(int n_segments, const std::string& uri, int content_width) {
    std::vector<Segment> segments;
    segments.reserve(static_cast<size_t>(n_segments) + 1);

    char buf[32];

    Segment doc;
    doc.id = "doc_root";
    doc.level = LevelTag::document;
    doc.content = std::string();
    doc.metadata.source_id = "synthetic";
    doc.metadata.uri = uri;
    doc.metadata.offsets = {0, static_cast<long long>(n_segments) * content_width};
    doc.metadata.source_type = SourceType::text;
    segments.push_back(doc);

    for (int i = 0; i < n_segments; ++i) {
        std::snprintf(buf, sizeof(buf), "p%06d", i);
        Segment seg;
        seg.id = buf;
        seg.level = LevelTag::paragraph;
        seg.parent = doc.id;
        std::snprintf(buf, sizeof(buf), "segment %06d", i);
        std::string content = buf;
        content.resize(static_cast<size_t>(content_width), 'x');
        seg.content = std::move(content);
        seg.metadata.source_id = "synthetic";
        seg.metadata.uri = uri;
        seg.metadata.offsets = {static_cast<long long>(i) * content_width,
                                static_cast<long long>(i + 1) * content_width};
        seg.metadata.source_type = SourceType::text;
        segments.push_back(std::move(seg));
    }
    return Hseq(std::move(segments));
}

std::vector<std::string> synthetic_prefix_ids(const Hseq& h, int prefix_len) {
    auto stream = candidate_stream(h);
    std::vector<std::string> ids;
    for (int i = 0; i < prefix_len && i < static_cast<int>(stream.size()); ++i) {
        ids.push_back(stream[i]->id);
    }
    return ids;
}

namespace {

bool run_oracle_grid_cell(int k, int w, int prefix_len, int n_segments, int t_max,
                          bool check_per_step, std::string* diag) {
    auto fail = [&](const std::string& message) {
        if (diag) *diag = message;
        return false;
    };
    if (w < k || k < 1 || prefix_len > n_segments) {
        return fail("invalid cell: need W >= k >= 1 and L <= N");
    }

    Hseq h = make_synthetic_stream(n_segments);
    auto prefix = synthetic_prefix_ids(h, prefix_len);
    std::set<std::string> prefix_set(prefix.begin(), prefix.end());

    OraclePolicy policy(prefix);
    IterationConfig cfg;
    cfg.window = w;
    cfg.top_k = k;
    cfg.t_max = t_max;
    cfg.t_min = 1;
    BudgetState budget;
    Guidance guidance;
    guidance.text = "Select the prefix items; stop when all are selected.";

    EpisodeResult result =
        run_episode("synthetic coverage probe", h, guidance, policy, cfg, budget, {},
                    fixed_clock());

    const int completion_step = (prefix_len + k - 1) / k;  // ceil(L/k)

    if (check_per_step) {
        size_t covered = 0;
        int step = 0;
        for (const auto& record : result.trace) {
            ++step;
            for (const auto& id : record.accepted_ids) covered += prefix_set.count(id);
            size_t needed = std::min<size_t>(static_cast<size_t>(k) * step,
                                             static_cast<size_t>(prefix_len));
            if (covered < needed) {
                return fail("coverage bound violated at step " + std::to_string(step) + ": have " +
                            std::to_string(covered) + ", need " + std::to_string(needed) +
                            " (k=" + std::to_string(k) + ", W=" + std::to_string(w) +
                            ", L=" + std::to_string(prefix_len) + ")");
            }
        }
        // E* must be inside M_T for T = ceil(L/k).
        std::set<std::string> selected(result.selected.begin(), result.selected.end());
        for (const auto& id : prefix) {
            if (!selected.count(id)) {
                return fail("prefix item " + id + " missing after completion step");
            }
        }
        if (result.steps > completion_step) {
            return fail("oracle took " + std::to_string(result.steps) + " steps, expected <= " +
                        std::to_string(completion_step));
        }
    }

    int halt_bound = std::min(t_max, completion_step);
    if (result.steps > halt_bound) {
        return fail("halt bound violated: tau=" + std::to_string(result.steps) + " > min(T_max=" +
                    std::to_string(t_max) + ", ceil(L/k)=" + std::to_string(completion_step) +
                    ")");
    }
    return true;
}

}  // namespace

bool check_coverage(int k, int w, int prefix_len, int n_segments, std::string* diag) {
    // Generous cap so the oracle can always finish.
    return run_oracle_grid_cell(k, w, prefix_len, n_segments, n_segments + 1, true, diag);
}

bool check_halt(int k, int w, int prefix_len, int n_segments, int t_max, std::string* diag) {
    return run_oracle_grid_cell(k, w, prefix_len, n_segments, t_max, false, diag);
}

BoundReport simulate_stochastic(int k, int w, int prefix_len, int support, double p,
                                long long trials, uint64_t seed) {
    if (p <= 0.0 || p > 1.0) throw std::invalid_argument("p must lie in (0,1]");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (support > prefix_len) throw std::invalid_argument("need m <= L");

    BoundReport report;
    report.k = k;
    report.w = w;
    report.prefix_len = prefix_len;
    report.support = support;
    report.p = p;
    report.rounds = (prefix_len + k - 1) / k;
    report.trials = trials;
    report.seed = seed;

    const int n = 2 * prefix_len;

    std::mt19937_64 rng(seed);
    // Support positions: first m of a seeded shuffle of the prefix.
    std::vector<int> prefix_positions(prefix_len);
    for (int i = 0; i < prefix_len; ++i) prefix_positions[i] = i;
    std::shuffle(prefix_positions.begin(), prefix_positions.end(), rng);
    std::vector<bool> is_support(n, false);
    for (int i = 0; i < support; ++i) is_support[prefix_positions[i]] = true;

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    long long successes = 0;

    std::vector<bool> selected(n);
    std::vector<int> window_positions;
    window_positions.reserve(static_cast<size_t>(w));
    for (long long trial = 0; trial < trials; ++trial) {
        std::fill(selected.begin(), selected.end(), false);
        int supports_left = support;

        for (int step = 0; step < report.rounds && supports_left > 0; ++step) {
            // Window = earliest W unselected positions.
            window_positions.clear();
            for (int pos = 0; pos < n && static_cast<int>(window_positions.size()) < w; ++pos) {
                if (!selected[pos]) window_positions.push_back(pos);
            }

            int picked_supports = 0;
            for (int pos : window_positions) {
                if (is_support[pos] && coin(rng) < p) {
                    selected[pos] = true;
                    --supports_left;
                    ++picked_supports;
                }
            }
            // Fillers advance the stream without displacing support picks.
            int filler_budget = std::max(0, k - picked_supports);
            for (int pos : window_positions) {
                if (filler_budget == 0) break;
                if (selected[pos] || is_support[pos]) continue;
                selected[pos] = true;
                --filler_budget;
            }
        }
        if (supports_left == 0) ++successes;
    }

    report.empirical = static_cast<double>(successes) / static_cast<double>(trials);
    double raw = 1.0 - static_cast<double>(support) * std::pow(1.0 - p, report.rounds);
    report.bound = std::clamp(raw, 0.0, 1.0);
    report.margin = report.empirical - report.bound;
    // Standard error of the observed proportion.
    double se = std::sqrt(std::max(report.empirical * (1.0 - report.empirical), 0.0) /
                          static_cast<double>(trials));
    report.pass = report.empirical >= report.bound - 3.0 * se;
    return report;
}

bool check_budget_independence(int w, int k, int t_max, const std::vector<int>& sizes,
                               int prefix_len, std::string* diag) {
    auto fail = [&](const std::string& message) {
        if (diag) *diag = message;
        return false;
    };
    if (sizes.size() < 2) return fail("need at least two sizes");

    IterationConfig cfg;
    cfg.window = w;
    cfg.top_k = k;
    cfg.t_max = t_max;
    cfg.t_min = 1;
    const long long cost_cap = context_cost_bound(cfg);

    const std::string question = "which segment mentions segment 000002";
    Guidance guidance;
    guidance.text = "Prefer snippets naming key entities/relations; stop when the answer is "
                    "explicitly stated.";

    std::vector<std::vector<long long>> per_step_bytes;
    for (int size : sizes) {
        Hseq h = make_synthetic_stream(size);
        HeuristicPolicy policy;
        BudgetState budget;
        EpisodeResult result =
            run_episode(question, h, guidance, policy, cfg, budget, {}, fixed_clock());
        std::vector<long long> bytes;
        for (const auto& record : result.trace) {
            if (record.context_bytes > cost_cap) {
                return fail("context bytes " + std::to_string(record.context_bytes) +
                            " exceed C(W)=" + std::to_string(cost_cap) + " at size " +
                            std::to_string(size));
            }
            bytes.push_back(record.context_bytes);
        }
        per_step_bytes.push_back(std::move(bytes));
    }
    for (size_t i = 1; i < per_step_bytes.size(); ++i) {
        if (per_step_bytes[i] != per_step_bytes[0]) {
            return fail("per-step context bytes differ between sizes " +
                        std::to_string(sizes[0]) + " and " + std::to_string(sizes[i]));
        }
    }

    // Oracle run: total presented-context cost obeys C(W) * min(T_max, ceil(L/k)).
    Hseq h = make_synthetic_stream(sizes.back());
    auto prefix = synthetic_prefix_ids(h, prefix_len);
    OraclePolicy oracle(prefix);
    BudgetState budget;
    EpisodeResult result =
        run_episode(question, h, guidance, oracle, cfg, budget, {}, fixed_clock());
    long long total = 0;
    for (const auto& record : result.trace) total += record.context_bytes;
    int completion_step = (prefix_len + k - 1) / k;
    long long allowed = cost_cap * std::min<long long>(t_max, completion_step);
    if (total > allowed) {
        return fail("oracle total cost " + std::to_string(total) + " exceeds " +
                    std::to_string(allowed));
    }
    return true;
}

std::string serialize_bound_report(const BoundReport& report) {
    ordered_json j;
    j["k"] = report.k;
    j["W"] = report.w;
    j["L"] = report.prefix_len;
    j["m"] = report.support;
    j["p"] = report.p;
    j["R"] = report.rounds;
    j["trials"] = report.trials;
    j["seed"] = report.seed;
    j["empirical"] = report.empirical;
    j["bound"] = report.bound;
    j["margin"] = report.margin;
    j["pass"] = report.pass;
    return j.dump();
}

}  // namespace hseq
