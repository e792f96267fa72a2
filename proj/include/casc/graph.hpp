#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "casc/errors.hpp"
#include "casc/rng.hpp"

namespace casc {

// Undirected simple graph over agents 0..n-1, adjacency-list form.
// Neighbor lists are sorted ascending; generators guarantee symmetry,
// no self-loops and no duplicate entries.
class Graph {
public:
    explicit Graph(std::vector<std::vector<int>> adjacency)
        : adj_(std::move(adjacency)) {}

    int n_agents() const { return static_cast<int>(adj_.size()); }

    int degree(int i) const {
        check_index(i);
        return static_cast<int>(adj_[static_cast<std::size_t>(i)].size());
    }

    const std::vector<int>& neighbors(int i) const {
        check_index(i);
        return adj_[static_cast<std::size_t>(i)];
    }

    const std::vector<std::vector<int>>& adjacency() const { return adj_; }

    long long edge_count() const {
        long long deg_sum = 0;
        for (const auto& row : adj_) deg_sum += static_cast<long long>(row.size());
        return deg_sum / 2;
    }

private:
    void check_index(int i) const {
        if (i < 0 || i >= n_agents())
            throw std::out_of_range("agent index " + std::to_string(i) +
                                    " out of range [0, " + std::to_string(n_agents()) + ")");
    }

    std::vector<std::vector<int>> adj_;
};

enum class NetworkKind { Random, SmallWorld, ScaleFree };

inline const char* to_string(NetworkKind k) {
    switch (k) {
        case NetworkKind::Random: return "random";
        case NetworkKind::SmallWorld: return "small_world";
        case NetworkKind::ScaleFree: return "scale_free";
    }
    return "?";
}

namespace detail {

inline void sort_adjacency(std::vector<std::vector<int>>& adj) {
    for (auto& row : adj) std::sort(row.begin(), row.end());
}

inline bool contains(const std::vector<int>& row, int v) {
    return std::find(row.begin(), row.end(), v) != row.end();
}

inline void add_undirected(std::vector<std::vector<int>>& adj, int u, int v) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
}

} // namespace detail

// G(n, p): every unordered pair is an edge independently with probability p.
// Pairs are enumerated with geometric skips, so cost is O(n + edges) rather
// than O(n^2).
inline Graph gen_random(int n_agents, double p, Rng& rng) {
    if (n_agents < 1) throw ValidationError("n_agents must be >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw ValidationError("p must be in (0, 1), got " + std::to_string(p));

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_agents));
    const double log_q = std::log1p(-p);
    long long v = 1;
    long long w = -1;
    while (v < n_agents) {
        const double r = 1.0 - rng.next_double(); // (0, 1]
        w += 1 + static_cast<long long>(std::floor(std::log(r) / log_q));
        while (w >= v && v < n_agents) {
            w -= v;
            ++v;
        }
        if (v < n_agents)
            detail::add_undirected(adj, static_cast<int>(v), static_cast<int>(w));
    }
    detail::sort_adjacency(adj);
    return Graph(std::move(adj));
}

// Ring-lattice neighbor counts must be even; odd requests are rounded up.
inline int effective_neighbor_count(int n_neighbors) {
    return n_neighbors + (n_neighbors % 2);
}

// Small-world network, additive Newman-Watts variant: a ring lattice where each
// agent links to the k/2 nearest agents on each side, plus one shortcut per
// lattice edge with probability rewire_prob. Shortcut endpoints are drawn
// uniformly, resampled until they hit a pair that is not yet connected, so the
// shortcut count is exactly Binomial(n*k/2, rewire_prob). Lattice edges are
// never removed.
inline Graph gen_small_world(int n_agents, int n_neighbors, double rewire_prob, Rng& rng) {
    if (n_agents < 1) throw ValidationError("n_agents must be >= 1");
    const int k = effective_neighbor_count(n_neighbors);
    if (n_neighbors < 2) throw ValidationError("n_neighbors must be >= 2");
    if (k >= n_agents)
        throw ValidationError("n_neighbors (effective " + std::to_string(k) +
                              ") must be < n_agents");
    if (!(rewire_prob >= 0.0 && rewire_prob <= 1.0))
        throw ValidationError("rewire_prob must be in [0, 1], got " + std::to_string(rewire_prob));

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_agents));
    const int half = k / 2;
    for (int i = 0; i < n_agents; ++i)
        for (int d = 1; d <= half; ++d)
            detail::add_undirected(adj, i, (i + d) % n_agents);

    const long long n_lattice_edges = static_cast<long long>(n_agents) * half;
    const long long max_edges = static_cast<long long>(n_agents) * (n_agents - 1) / 2;
    long long edges = n_lattice_edges;
    for (long long e = 0; e < n_lattice_edges; ++e) {
        if (!rng.bernoulli(rewire_prob)) continue;
        if (edges >= max_edges) continue; // already complete, nowhere to shortcut
        int u, v;
        do {
            u = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_agents)));
            v = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_agents)));
        } while (u == v || detail::contains(adj[static_cast<std::size_t>(u)], v));
        detail::add_undirected(adj, u, v);
        ++edges;
    }
    detail::sort_adjacency(adj);
    return Graph(std::move(adj));
}

// Barabasi-Albert preferential attachment from a ring seed on m0 vertices
// (a single edge when m0 == 2). Each arrival attaches floor(m) links, plus one
// more with probability m - floor(m), to distinct existing vertices chosen with
// probability proportional to their degree before the arrival.
inline Graph gen_scale_free(int n_agents, int m0, double m, Rng& rng) {
    if (n_agents < 1) throw ValidationError("n_agents must be >= 1");
    if (m0 < 2) throw ValidationError("m0 must be >= 2");
    if (m0 > n_agents) throw ValidationError("m0 must be <= n_agents");
    if (!(m >= 1.0))
        throw ValidationError("m must be >= 1, got " + std::to_string(m));
    if (m > static_cast<double>(m0))
        throw ValidationError("m must be <= m0, got m=" + std::to_string(m) +
                              " with m0=" + std::to_string(m0));

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_agents));
    std::vector<int> endpoints; // one entry per unit of degree
    endpoints.reserve(static_cast<std::size_t>(
        2.0 * (m0 + m * (n_agents - m0)) + 16));

    if (m0 == 2) {
        detail::add_undirected(adj, 0, 1);
        endpoints.push_back(0);
        endpoints.push_back(1);
    } else {
        for (int i = 0; i < m0; ++i) {
            const int j = (i + 1) % m0;
            detail::add_undirected(adj, i, j);
            endpoints.push_back(i);
            endpoints.push_back(j);
        }
    }

    const int base_links = static_cast<int>(std::floor(m));
    const double extra_prob = m - base_links;
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(base_links) + 1);
    for (int v = m0; v < n_agents; ++v) {
        int n_links = base_links;
        if (extra_prob > 0.0 && rng.bernoulli(extra_prob)) ++n_links;
        chosen.clear();
        while (static_cast<int>(chosen.size()) < n_links) {
            const int t = endpoints[rng.uniform_int(endpoints.size())];
            if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
                chosen.push_back(t);
        }
        for (const int t : chosen) {
            detail::add_undirected(adj, v, t);
            endpoints.push_back(v);
            endpoints.push_back(t);
        }
    }
    detail::sort_adjacency(adj);
    return Graph(std::move(adj));
}

// Parameters for one network family, at the ranges the experiments use.
struct NetworkSpec {
    NetworkKind kind = NetworkKind::Random;
    int n_agents = 1000;
    double p = 0.0;             // Random: pair-connection probability
    int n_neighbors = 0;        // SmallWorld: lattice neighbors (rounded up to even)
    double rewire_prob = 0.0;   // SmallWorld: shortcut probability per lattice edge
    int m0 = 0;                 // ScaleFree: seed ring size
    double m = 0.0; // ScaleFree: expected links per arrival

    int effective_neighbors() const { return effective_neighbor_count(n_neighbors); }

    void validate() const {
        if (n_agents < 1) throw ValidationError("network.n_agents must be >= 1");
        switch (kind) {
            case NetworkKind::Random:
                if (!(p > 0.0 && p < 1.0))
                    throw ValidationError("network.p must be in (0, 1), got " + std::to_string(p));
                break;
            case NetworkKind::SmallWorld:
                if (n_neighbors < 2)
                    throw ValidationError("network.n_neighbors must be >= 2");
                if (effective_neighbors() >= n_agents)
                    throw ValidationError("network.n_neighbors must be < network.n_agents");
                if (!(rewire_prob >= 0.0 && rewire_prob <= 1.0))
                    throw ValidationError("network.rewire_prob must be in [0, 1]");
                break;
            case NetworkKind::ScaleFree:
                if (m0 < 2) throw ValidationError("network.m0 must be >= 2");
                if (m0 > n_agents) throw ValidationError("network.m0 must be <= network.n_agents");
                if (!(m >= 1.0 && m <= static_cast<double>(m0)))
                    throw ValidationError("network.m must satisfy 1 <= m <= m0");
                break;
        }
    }

    Graph generate(Rng& rng) const {
        switch (kind) {
            case NetworkKind::Random:
                return gen_random(n_agents, p, rng);
            case NetworkKind::SmallWorld:
                return gen_small_world(n_agents, n_neighbors, rewire_prob, rng);
            case NetworkKind::ScaleFree:
                return gen_scale_free(n_agents, m0, m, rng);
        }
        throw ValidationError("unknown network kind");
    }
};

// Edge-list dump: one "i j" pair per line, 0-based, i < j, lexicographically
// sorted. Neighbor lists are already sorted so a single pass suffices.
inline void write_edge_list(const Graph& g, std::ostream& out) {
    for (int i = 0; i < g.n_agents(); ++i)
        for (const int j : g.neighbors(i))
            if (j > i) out << i << ' ' << j << '\n';
}

} // namespace casc
