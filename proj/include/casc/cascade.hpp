#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "casc/errors.hpp"
#include "casc/graph.hpp"
#include "casc/rng.hpp"

namespace casc {

// Per-agent switching thresholds in [0,1].
struct ThresholdAssignment {
    std::vector<double> values;

    int n_agents() const { return static_cast<int>(values.size()); }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

inline ThresholdAssignment draw_thresholds(int n_agents, Rng& rng) {
    if (n_agents < 1) throw ValidationError("n_agents must be >= 1");
    ThresholdAssignment t;
    t.values.resize(static_cast<std::size_t>(n_agents));
    for (auto& v : t.values) v = rng.next_double();
    return t;
}

// Exogenously activated agents, stored sorted ascending, no duplicates.
struct SeedSet {
    std::vector<int> agents;

    int size() const { return static_cast<int>(agents.size()); }
    bool contains(int i) const {
        return std::binary_search(agents.begin(), agents.end(), i);
    }
};

// Uniform sample of n_seeds distinct agents (partial Fisher-Yates).
inline SeedSet select_seeds(int n_agents, int n_seeds, Rng& rng) {
    if (n_agents < 1) throw ValidationError("n_agents must be >= 1");
    if (n_seeds < 1 || n_seeds > n_agents)
        throw ValidationError("n_seeds must be in [1, n_agents], got " + std::to_string(n_seeds));
    std::vector<int> pool(static_cast<std::size_t>(n_agents));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < n_seeds; ++i) {
        const auto j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_agents - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    SeedSet s;
    s.agents.assign(pool.begin(), pool.begin() + n_seeds);
    std::sort(s.agents.begin(), s.agents.end());
    return s;
}

struct CascadeResult {
    std::vector<char> final_state;          // 1 = ON
    std::vector<std::vector<int>> switch_steps; // step k = agents newly ON at step k+1
    double percolation = 0.0;               // |ON| / n_agents, seeds included
    int step_count = 0;

    bool on(int i) const { return final_state[static_cast<std::size_t>(i)] != 0; }
};

// Switching rule: an OFF agent with degree d > 0 switches when the fraction of
// its neighbors in state 1 strictly exceeds its threshold. Degree-0 agents have
// no signal and never switch; state 1 is absorbing.
inline bool rule_fires(int on_neighbors, int degree, double threshold) {
    if (degree == 0) return false;
    return static_cast<double>(on_neighbors) / static_cast<double>(degree) > threshold;
}

// One synchronous update against `state`; returns the newly switched agents
// (ascending). Exposed separately so the dynamics are testable step-by-step.
inline std::vector<int> step(const Graph& g, const std::vector<char>& state,
                             const ThresholdAssignment& thresholds) {
    const int n = g.n_agents();
    std::vector<int> switched;
    for (int i = 0; i < n; ++i) {
        if (state[static_cast<std::size_t>(i)]) continue;
        const auto& nbrs = g.neighbors(i);
        int on = 0;
        for (const int j : nbrs) on += state[static_cast<std::size_t>(j)] ? 1 : 0;
        if (rule_fires(on, static_cast<int>(nbrs.size()), thresholds[i])) switched.push_back(i);
    }
    return switched;
}

// Iterate to the fixed point. Incremental frontier form of `step`: only
// neighbors of the previous step's switchers can newly fire, and per-agent ON
// neighbor counts are maintained instead of recounted. Equivalent to calling
// `step` repeatedly (the rule is monotone), but O(edges touched) per step.
inline CascadeResult run_cascade(const Graph& g, const ThresholdAssignment& thresholds,
                                 const SeedSet& seeds) {
    const int n = g.n_agents();
    if (thresholds.n_agents() != n)
        throw ValidationError("thresholds length must equal n_agents");
    if (seeds.size() < 1) throw ValidationError("seed set must be non-empty");
    for (const int s : seeds.agents)
        if (s < 0 || s >= n) throw ValidationError("seed index out of range");

    CascadeResult res;
    res.final_state.assign(static_cast<std::size_t>(n), 0);
    std::vector<int> on_count(static_cast<std::size_t>(n), 0);

    for (const int s : seeds.agents) res.final_state[static_cast<std::size_t>(s)] = 1;
    for (const int s : seeds.agents)
        for (const int j : g.neighbors(s)) ++on_count[static_cast<std::size_t>(j)];

    std::vector<int> frontier = seeds.agents;
    std::vector<char> queued(static_cast<std::size_t>(n), 0);
    long long n_on = seeds.size();
    while (!frontier.empty()) {
        std::vector<int> candidates;
        for (const int u : frontier)
            for (const int j : g.neighbors(u)) {
                if (res.final_state[static_cast<std::size_t>(j)] || queued[static_cast<std::size_t>(j)]) continue;
                queued[static_cast<std::size_t>(j)] = 1;
                candidates.push_back(j);
            }
        std::vector<int> switched;
        for (const int i : candidates) {
            queued[static_cast<std::size_t>(i)] = 0;
            if (rule_fires(on_count[static_cast<std::size_t>(i)], g.degree(i), thresholds[i]))
                switched.push_back(i);
        }
        if (switched.empty()) break;
        std::sort(switched.begin(), switched.end());
        for (const int i : switched) res.final_state[static_cast<std::size_t>(i)] = 1;
        for (const int i : switched)
            for (const int j : g.neighbors(i)) ++on_count[static_cast<std::size_t>(j)];
        n_on += static_cast<long long>(switched.size());
        res.switch_steps.push_back(std::move(switched));
        frontier = res.switch_steps.back();
    }
    res.step_count = static_cast<int>(res.switch_steps.size());
    res.percolation = static_cast<double>(n_on) / static_cast<double>(n);
    return res;
}

} // namespace casc
