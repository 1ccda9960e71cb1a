#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <percolab/graphs.hpp>
#include <percolab/lattice.hpp>

// Brute-force cluster-law oracles for small graph patches.  Test code only:
// everything here is exponential in the patch size on purpose, so expected
// values never come from the code under test.
namespace testsupport {

template <class G>
struct Patch {
    std::vector<typename G::Site> sites;  // sites[0] is the origin
    struct Edge {
        int a = 0;  // tail index
        int b = 0;  // head index
        bool oriented = false;
    };
    std::vector<Edge> edges;
};

// Breadth-first collection of the component of the origin, treating every
// edge as present.  `keep` filters sites (return false to exclude), which
// lets a caller restrict an infinite graph to a finite ball.
template <class G, class Keep>
Patch<G> collect_patch(const G& g, int max_sites, Keep&& keep) {
    using Site = typename G::Site;
    Patch<G> patch;
    std::unordered_map<std::uint64_t, int> index;
    std::map<percolab::EdgeKey, typename Patch<G>::Edge> edges;

    const Site o = g.origin();
    if (!keep(o)) throw std::invalid_argument("collect_patch: origin excluded by filter");
    patch.sites.push_back(o);
    index.emplace(g.encode(o), 0);

    for (std::size_t qi = 0; qi < patch.sites.size(); ++qi) {
        const Site v = patch.sites[qi];
        const int vi = static_cast<int>(qi);
        const std::uint64_t vcode = g.encode(v);
        g.for_out_edges(v, [&](const percolab::OutEdge<Site>& e) {
            if (!keep(e.head)) return;
            const std::uint64_t hcode = g.encode(e.head);
            auto it = index.find(hcode);
            if (it == index.end()) {
                if (static_cast<int>(patch.sites.size()) >= max_sites)
                    throw std::invalid_argument("collect_patch: patch exceeds max_sites");
                it = index.emplace(hcode, static_cast<int>(patch.sites.size())).first;
                patch.sites.push_back(e.head);
            }
            const percolab::EdgeKey key =
                percolab::make_edge_key(vcode, hcode, e.cls, e.copy, e.oriented);
            edges.emplace(key, typename Patch<G>::Edge{vi, it->second, e.oriented});
        });
    }
    for (auto& [key, e] : edges) patch.edges.push_back(e);
    return patch;
}

template <class G>
Patch<G> collect_patch(const G& g, int max_sites) {
    return collect_patch(g, max_sites, [](const typename G::Site&) { return true; });
}

namespace detail {

// Component of site 0 given per-edge and per-site openness.
template <class G>
std::int64_t component_size(const Patch<G>& patch, const std::vector<bool>& edge_open,
                            const std::vector<bool>& site_in) {
    if (!site_in[0]) return 0;
    std::vector<bool> reach(patch.sites.size(), false);
    reach[0] = true;
    bool grew = true;
    while (grew) {
        grew = false;
        for (std::size_t ei = 0; ei < patch.edges.size(); ++ei) {
            if (!edge_open[ei]) continue;
            const auto& e = patch.edges[ei];
            if (!site_in[static_cast<std::size_t>(e.a)] ||
                !site_in[static_cast<std::size_t>(e.b)])
                continue;
            if (reach[static_cast<std::size_t>(e.a)] && !reach[static_cast<std::size_t>(e.b)]) {
                reach[static_cast<std::size_t>(e.b)] = true;
                grew = true;
            }
            if (!e.oriented && reach[static_cast<std::size_t>(e.b)] &&
                !reach[static_cast<std::size_t>(e.a)]) {
                reach[static_cast<std::size_t>(e.a)] = true;
                grew = true;
            }
        }
    }
    std::int64_t n = 0;
    for (bool r : reach) n += r ? 1 : 0;
    return n;
}

}  // namespace detail

// Exact law of the origin's cluster size under i.i.d. bond percolation with
// uniform probability p on the patch.
template <class G>
std::map<std::int64_t, double> bond_cluster_law(const Patch<G>& patch, double p) {
    const int E = static_cast<int>(patch.edges.size());
    if (E > 20) throw std::invalid_argument("bond_cluster_law: too many edges to enumerate");
    std::map<std::int64_t, double> law;
    std::vector<bool> edge_open(patch.edges.size());
    const std::vector<bool> all_sites(patch.sites.size(), true);
    for (std::uint64_t mask = 0; mask < (1ull << E); ++mask) {
        double prob = 1.0;
        for (int i = 0; i < E; ++i) {
            edge_open[static_cast<std::size_t>(i)] = (mask >> i) & 1;
            prob *= ((mask >> i) & 1) ? p : 1.0 - p;
        }
        law[detail::component_size(patch, edge_open, all_sites)] += prob;
    }
    return law;
}

// Exact law of the origin's cluster size under i.i.d. site percolation with
// uniform probability p; the origin itself is unconditionally included.
template <class G>
std::map<std::int64_t, double> site_cluster_law(const Patch<G>& patch, double p) {
    const int V = static_cast<int>(patch.sites.size()) - 1;
    if (V > 20) throw std::invalid_argument("site_cluster_law: too many sites to enumerate");
    std::map<std::int64_t, double> law;
    const std::vector<bool> all_edges(patch.edges.size(), true);
    std::vector<bool> site_in(patch.sites.size());
    site_in[0] = true;
    for (std::uint64_t mask = 0; mask < (1ull << V); ++mask) {
        double prob = 1.0;
        for (int i = 0; i < V; ++i) {
            site_in[static_cast<std::size_t>(i) + 1] = (mask >> i) & 1;
            prob *= ((mask >> i) & 1) ? p : 1.0 - p;
        }
        law[detail::component_size(patch, all_edges, site_in)] += prob;
    }
    return law;
}

// Mean of sum(size * prob) for an exact law.
inline double law_mean(const std::map<std::int64_t, double>& law) {
    double m = 0.0;
    for (const auto& [k, v] : law) m += static_cast<double>(k) * v;
    return m;
}

// Counts self-avoiding walks from the origin of Z^2 by exact depth-first
// enumeration, one count per length 1..max_len.
inline std::vector<std::int64_t> saw_counts_z2(int max_len) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(max_len) + 1, 0);
    std::vector<std::pair<int, int>> path{{0, 0}};
    auto visited = [&](int x, int y) {
        for (const auto& [a, b] : path)
            if (a == x && b == y) return true;
        return false;
    };
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    auto rec = [&](auto&& self, int len) -> void {
        if (len > 0) ++counts[static_cast<std::size_t>(len)];
        if (len == max_len) return;
        const auto [x, y] = path.back();
        for (int d = 0; d < 4; ++d) {
            const int nx = x + dx[d], ny = y + dy[d];
            if (visited(nx, ny)) continue;
            path.push_back({nx, ny});
            self(self, len + 1);
            path.pop_back();
        }
    };
    rec(rec, 0);
    return counts;
}

}  // namespace testsupport
