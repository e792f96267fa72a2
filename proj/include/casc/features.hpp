#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "casc/cascade.hpp"
#include "casc/errors.hpp"
#include "casc/graph.hpp"

namespace casc {

// Network-specific threshold under which a seed-neighbor is nearly certain to
// switch: one ON neighbor among the typical number of neighbors.
struct CriticalValue {
    double value = 0.0;
};

inline CriticalValue critical_value(const NetworkSpec& spec,
                                    std::optional<double> scale_free_override = std::nullopt) {
    spec.validate();
    double v = 0.0;
    switch (spec.kind) {
        case NetworkKind::Random: {
            const double expected_degree = spec.p * spec.n_agents;
            if (expected_degree <= 1.0)
                throw ValidationError("degenerate parameters: p*N = " + std::to_string(expected_degree) +
                                      " <= 1, critical value would be >= 1");
            v = 1.0 / expected_degree;
            break;
        }
        case NetworkKind::SmallWorld:
            // lattice neighbors only; shortcut edges are ignored by convention
            v = 1.0 / spec.effective_neighbors();
            break;
        case NetworkKind::ScaleFree:
            v = scale_free_override.value_or(0.2);
            break;
    }
    if (!(v > 0.0 && v < 1.0))
        throw ValidationError("critical value must lie in (0, 1), got " + std::to_string(v));
    return CriticalValue{v};
}

// The 12 ex-ante predictors plus imputation flags. All values are observable
// at or before the first cascade step.
struct FeatureVector {
    double seed_mean_deg = 0.0;
    double seed_max_deg = 0.0;
    double nbr_min_deg = 0.0;
    double nbr_mean_deg = 0.0;
    double nbr_max_deg = 0.0;
    double nbr_min_thr = 0.0;
    double nbr_mean_thr = 0.0;
    double nbr_max_thr = 0.0;
    double below = 0.0;
    double step1_min_thr = 0.0;
    double step1_mean_thr = 0.0;
    double step1_max_thr = 0.0;
    bool nbr_missing = false;
    bool step1_missing = false;

    static constexpr int n_predictors = 12;

    static const std::array<const char*, n_predictors>& names() {
        static const std::array<const char*, n_predictors> k = {
            "seed_mean_deg", "seed_max_deg", "nbr_min_deg", "nbr_mean_deg", "nbr_max_deg",
            "nbr_min_thr", "nbr_mean_thr", "nbr_max_thr", "below",
            "step1_min_thr", "step1_mean_thr", "step1_max_thr"};
        return k;
    }

    std::array<double, n_predictors> values() const {
        return {seed_mean_deg, seed_max_deg, nbr_min_deg, nbr_mean_deg, nbr_max_deg,
                nbr_min_thr, nbr_mean_thr, nbr_max_thr, below,
                step1_min_thr, step1_mean_thr, step1_max_thr};
    }
};

// Mean threshold of an unseen agent; stands in for statistics of empty sets so
// the design matrix stays complete (affected rows carry a flag).
inline constexpr double kImputedValue = 0.5;

// Union of all seeds' neighbors, minus the seeds themselves; sorted ascending.
inline std::vector<int> seed_neighborhood(const Graph& g, const SeedSet& seeds) {
    std::vector<int> out;
    for (const int s : seeds.agents)
        for (const int j : g.neighbors(s))
            if (!seeds.contains(j)) out.push_back(j);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace detail {

struct Triple {
    double min, mean, max;
};

// min/mean/max of xs; empty -> imputed constant triple.
template <typename Get>
inline Triple stats_over(const std::vector<int>& agents, Get&& get, bool& missing) {
    if (agents.empty()) {
        missing = true;
        return {kImputedValue, kImputedValue, kImputedValue};
    }
    missing = false;
    double lo = get(agents.front()), hi = lo, sum = 0.0;
    for (const int a : agents) {
        const double v = get(a);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    return {lo, sum / static_cast<double>(agents.size()), hi};
}

} // namespace detail

inline FeatureVector extract_features(const Graph& g, const ThresholdAssignment& thresholds,
                                      const SeedSet& seeds, const CascadeResult& result,
                                      CriticalValue crit) {
    if (thresholds.n_agents() != g.n_agents())
        throw ValidationError("thresholds length must equal n_agents");
    if (seeds.size() < 1) throw ValidationError("seed set must be non-empty");

    FeatureVector f;

    double dsum = 0.0, dmax = 0.0;
    for (const int s : seeds.agents) {
        const double d = g.degree(s);
        dsum += d;
        dmax = std::max(dmax, d);
    }
    f.seed_mean_deg = dsum / seeds.size();
    f.seed_max_deg = dmax;

    const std::vector<int> nbr = seed_neighborhood(g, seeds);
    bool missing = false;
    const auto deg3 = detail::stats_over(nbr, [&](int a) { return static_cast<double>(g.degree(a)); }, missing);
    f.nbr_min_deg = deg3.min;
    f.nbr_mean_deg = deg3.mean;
    f.nbr_max_deg = deg3.max;
    const auto thr3 = detail::stats_over(nbr, [&](int a) { return thresholds[a]; }, missing);
    f.nbr_min_thr = thr3.min;
    f.nbr_mean_thr = thr3.mean;
    f.nbr_max_thr = thr3.max;
    f.nbr_missing = missing;

    int below_count = 0;
    for (const int a : nbr)
        if (thresholds[a] < crit.value) ++below_count;
    f.below = below_count;

    // Thresholds one step removed: neighbors of the step-1 switchers, excluding
    // seeds and the switchers themselves.
    std::vector<int> step1_nbr;
    if (!result.switch_steps.empty()) {
        const auto& s1 = result.switch_steps.front();
        for (const int u : s1)
            for (const int j : g.neighbors(u)) {
                if (seeds.contains(j)) continue;
                if (std::binary_search(s1.begin(), s1.end(), j)) continue;
                step1_nbr.push_back(j);
            }
        std::sort(step1_nbr.begin(), step1_nbr.end());
        step1_nbr.erase(std::unique(step1_nbr.begin(), step1_nbr.end()), step1_nbr.end());
    }
    const auto s1thr = detail::stats_over(step1_nbr, [&](int a) { return thresholds[a]; }, missing);
    f.step1_min_thr = s1thr.min;
    f.step1_mean_thr = s1thr.mean;
    f.step1_max_thr = s1thr.max;
    f.step1_missing = missing;

    return f;
}

} // namespace casc
