#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hseq/model.hpp"

namespace hseq {

// Uniform synthetic candidate stream: one document root plus n paragraphs
// with fixed-width content, so rho order equals index order and rendered
// context size is independent of n.
Hseq make_synthetic_stream(int n_segments, const std::string& uri = "synthetic://stream",
                           int content_width = 48);

// Ids of the first L stream positions of a synthetic stream.
std::vector<std::string> synthetic_prefix_ids(const Hseq& h, int prefix_len);

// Oracle-policy run asserting the prefix-coverage bound at every step
// (|M_t intersect prefix| >= min(kt, L)) and completion by step ceil(L/k).
// Returns false with a diagnostic on any violation.
bool check_coverage(int k, int w, int prefix_len, int n_segments, std::string* diag = nullptr);

// Oracle-policy run under a step cap asserting tau <= min(T_max, ceil(L/k)).
bool check_halt(int k, int w, int prefix_len, int n_segments, int t_max,
                std::string* diag = nullptr);

struct BoundReport {
    int k = 0;
    int w = 0;
    int prefix_len = 0;   // L
    int support = 0;      // m
    double p = 0.0;
    int rounds = 0;       // R = ceil(L/k)
    long long trials = 0;
    uint64_t seed = 0;
    double empirical = 0.0;
    double bound = 0.0;   // 1 - m(1-p)^R clamped to [0,1]
    double margin = 0.0;  // empirical - bound
    bool pass = false;    // empirical >= bound - 3 * binomial SE
};

// Monte Carlo check of the stochastic completeness bound. Each trial runs
// R = ceil(L/k) windowed steps; every exposed, unselected support item is
// included independently with probability p. Coin-successful supports are
// always taken (the per-exposure success model the bound quantifies over);
// the k cap applies to the filler picks that advance the stream.
BoundReport simulate_stochastic(int k, int w, int prefix_len, int support, double p,
                                long long trials, uint64_t seed);

// Identical questions over streams of each size with the heuristic policy:
// per-step presented-context bytes must be equal across sizes and bounded by
// C(W); an oracle run checks total cost <= C(W) * min(T_max, ceil(L/k)).
bool check_budget_independence(int w, int k, int t_max, const std::vector<int>& sizes,
                               int prefix_len = 6, std::string* diag = nullptr);

// One report per line.
std::string serialize_bound_report(const BoundReport& report);

}  // namespace hseq
