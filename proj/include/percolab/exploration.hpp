#pragma once

#include <cstdint>
#include <map>
#include <queue>
#include <stdexcept>
#include <vector>

#include "percolab/environment.hpp"
#include "percolab/flatset.hpp"
#include "percolab/graphs.hpp"
#include "percolab/parallel.hpp"
#include "percolab/stats.hpp"

// Budgeted cluster exploration over implicit graphs.  Openness is a pure
// hash of (seed, key), so the traversal order never affects which sites
// belong to the cluster; BFS is used when per-layer statistics matter and
// a height-greedy search when only "does the cluster reach height N"
// matters.

namespace percolab {

enum class PercMode : std::uint8_t { Bond, Site };

enum class Termination : std::uint8_t {
    FrontierEmpty,
    HeightReached,
    SiteBudget,
    RadiusBudget,
};

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::FrontierEmpty: return "frontier_empty";
        case Termination::HeightReached: return "height_reached";
        case Termination::SiteBudget: return "site_budget";
        case Termination::RadiusBudget: return "radius_budget";
    }
    return "unknown";
}

struct ExplorationBudget {
    std::int64_t max_sites = 4'000'000;
    int max_height = 4000;
    int max_layer_radius = (1 << 19) - 2;  // stays inside the site packings
};

inline void validate(const ExplorationBudget& b) {
    if (b.max_sites < 1 || b.max_height < 1 || b.max_layer_radius < 1)
        throw std::invalid_argument("ExplorationBudget: all limits must be positive");
}

// Memoizes the per-layer edge probabilities of one environment; the layer
// type hash is then paid once per layer instead of once per edge.
class EdgeProbCache {
public:
    EdgeProbCache(const LayeredEnv& env, int split_delta)
        : env_(&env), delta_(split_delta), p_h_(env.params().p_h) {}

    double operator()(EdgeClass cls, int tail_height) {
        switch (cls) {
            case EdgeClass::Upward:
            case EdgeClass::Vertical:
                return up(tail_height);
            case EdgeClass::Horizontal:
                return p_h_;
            case EdgeClass::ParallelCopy:
                return copy(tail_height);
        }
        throw std::domain_error("EdgeProbCache: unknown edge class");
    }

    double site(int height) {
        return up(height);  // site states follow the layer rule
    }

private:
    double up(int n) {
        while (static_cast<int>(up_.size()) <= n)
            up_.push_back(env_->layer_prob(static_cast<int>(up_.size())));
        return up_[static_cast<std::size_t>(n)];
    }
    double copy(int n) {
        while (static_cast<int>(copy_.size()) <= n)
            copy_.push_back(
                split_copy_prob(env_->layer_prob(static_cast<int>(copy_.size())), delta_));
        return copy_[static_cast<std::size_t>(n)];
    }

    const LayeredEnv* env_;
    int delta_;
    double p_h_;
    std::vector<double> up_;
    std::vector<double> copy_;
};

struct ClusterReport {
    std::int64_t size = 0;
    int max_height_reached = 0;
    std::map<int, double> per_layer_radius;       // graphs with square layers only
    std::map<int, std::int64_t> per_layer_count;  // sites per height
    Termination termination = Termination::FrontierEmpty;
};

// Full FIFO exploration of the origin's open cluster, truncated by the
// budget.  Sites above max_height are never entered; if an open edge
// leads above the cap the termination reads HeightReached, otherwise an
// exhausted frontier means the reported cluster is complete.  In site
// mode the origin is counted unconditionally (the cluster law is read
// conditional on the origin being open) and every other site is open per
// its own draw.
template <GraphLike G>
ClusterReport explore(const G& g, const LayeredEnv& env, const typename G::Site& origin,
                      const ExplorationBudget& budget = {},
                      PercMode mode = PercMode::Bond) {
    validate(budget);
    using Site = typename G::Site;
    struct Item {
        Site s;
        std::uint64_t code;
        int h;
    };

    EdgeProbCache prob(env, split_delta_of(g));
    CodeSet visited(1024);
    std::vector<Item> fifo;
    std::vector<std::int64_t> layer_count;
    std::vector<double> layer_radius;

    ClusterReport rep;
    auto count_site = [&](const Site& s, int h) {
        ++rep.size;
        if (h > rep.max_height_reached) rep.max_height_reached = h;
        if (static_cast<int>(layer_count.size()) <= h)
            layer_count.resize(static_cast<std::size_t>(h) + 1, 0);
        ++layer_count[static_cast<std::size_t>(h)];
        if constexpr (HasLayerRadius<G>) {
            if (static_cast<int>(layer_radius.size()) <= h)
                layer_radius.resize(static_cast<std::size_t>(h) + 1, -1.0);
            const double r = g.layer_radius(s);
            if (r > layer_radius[static_cast<std::size_t>(h)])
                layer_radius[static_cast<std::size_t>(h)] = r;
        }
    };

    {
        const std::uint64_t oc = g.encode(origin);
        const int oh = g.height(origin);
        visited.insert(oc);
        count_site(origin, oh);
        fifo.push_back({origin, oc, oh});
    }

    bool over_height = false;
    bool halted = false;
    for (std::size_t qi = 0; qi < fifo.size() && !halted; ++qi) {
        const Item v = fifo[qi];  // copy: fifo reallocates while we append
        g.for_out_edges(v.s, [&](const OutEdge<Site>& e) {
            if (halted) return;
            const int hh = g.height(e.head);
            auto is_open = [&](std::uint64_t head_code) {
                return mode == PercMode::Bond
                           ? env.open(make_edge_key(v.code, head_code, e.cls, e.copy,
                                                    e.oriented),
                                      prob(e.cls, v.h))
                           : env.site_open(head_code, prob.site(hh));
            };
            if (hh > budget.max_height) {
                if (!over_height && is_open(g.encode(e.head))) over_height = true;
                return;
            }
            if constexpr (HasLayerRadius<G>) {
                if (g.layer_radius(e.head) > budget.max_layer_radius) {
                    if (is_open(g.encode(e.head))) {
                        halted = true;
                        rep.termination = Termination::RadiusBudget;
                    }
                    return;
                }
            }
            const std::uint64_t hcode = g.encode(e.head);
            if (visited.contains(hcode) || !is_open(hcode)) return;
            visited.insert(hcode);
            count_site(e.head, hh);
            if (rep.size >= budget.max_sites) {
                halted = true;
                rep.termination = Termination::SiteBudget;
                return;
            }
            fifo.push_back({e.head, hcode, hh});
        });
    }
    if (!halted) rep.termination =
        over_height ? Termination::HeightReached : Termination::FrontierEmpty;

    for (std::size_t h = 0; h < layer_count.size(); ++h)
        if (layer_count[h] > 0) rep.per_layer_count[static_cast<int>(h)] = layer_count[h];
    for (std::size_t h = 0; h < layer_radius.size(); ++h)
        if (layer_radius[h] >= 0) rep.per_layer_radius[static_cast<int>(h)] = layer_radius[h];
    return rep;
}

struct ReachResult {
    bool reached = false;
    bool capped = false;
    int best_progress = 0;
    std::int64_t size = 0;
    Termination termination = Termination::FrontierEmpty;
};

// Greedy search for "does the open cluster of the sources contain a site
// with progress >= goal".  Order-free sampling makes the answer identical
// to BFS; chasing the highest progress first just reaches the goal far
// sooner on surviving clusters.  Ties prefer the smaller site code.
template <GraphLike G, class Progress>
ReachResult reach_goal(const G& g, const LayeredEnv& env, PercMode mode,
                       const std::vector<typename G::Site>& sources, int goal,
                       std::int64_t max_sites, Progress&& progress) {
    using Site = typename G::Site;
    struct Entry {
        int prio;
        std::uint64_t code;
        Site s;
    };
    struct Cmp {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.prio != b.prio) return a.prio < b.prio;
            return a.code > b.code;
        }
    };

    EdgeProbCache prob(env, split_delta_of(g));
    CodeSet visited(1024);
    std::priority_queue<Entry, std::vector<Entry>, Cmp> heap;
    ReachResult res;

    for (const Site& s : sources) {
        const std::uint64_t c = g.encode(s);
        if (!visited.insert(c)) continue;
        ++res.size;
        const int pr = progress(s);
        if (pr > res.best_progress) res.best_progress = pr;
        if (pr >= goal) {
            res.reached = true;
            res.termination = Termination::HeightReached;
            return res;
        }
        heap.push({pr, c, s});
    }

    bool stop = false;
    while (!stop && !heap.empty()) {
        const Entry v = heap.top();
        heap.pop();
        const int vh = g.height(v.s);
        g.for_out_edges(v.s, [&](const OutEdge<Site>& e) {
            if (stop) return;
            const std::uint64_t hcode = g.encode(e.head);
            if (visited.contains(hcode)) return;
            const bool open =
                mode == PercMode::Bond
                    ? env.open(make_edge_key(v.code, hcode, e.cls, e.copy, e.oriented),
                               prob(e.cls, vh))
                    : env.site_open(hcode, prob.site(g.height(e.head)));
            if (!open) return;
            visited.insert(hcode);
            ++res.size;
            const int pr = progress(e.head);
            if (pr > res.best_progress) res.best_progress = pr;
            if (pr >= goal) {
                res.reached = true;
                res.termination = Termination::HeightReached;
                stop = true;
                return;
            }
            if (res.size >= max_sites) {
                res.capped = true;
                res.termination = Termination::SiteBudget;
                stop = true;
                return;
            }
            heap.push({pr, hcode, e.head});
        });
    }
    return res;
}

struct SurvivalEstimate {
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 1.0;
    std::int64_t trials = 0;
    std::int64_t reached = 0;
    std::int64_t capped = 0;  // trials whose search hit the site budget unresolved
    int N = 0;
};

struct TrialRecord {
    std::int64_t trial = 0;
    std::uint64_t seed = 0;
    bool reached = false;
    int height = 0;
    std::int64_t size = 0;
    Termination termination = Termination::FrontierEmpty;
};

// Fraction of independent trials whose origin cluster reaches height N;
// trial t runs in its own environment with seed seed_base + t.  Budget-
// capped trials count as not reached and are tallied separately.
template <GraphLike G>
SurvivalEstimate survival_prob(const G& g, const EnvParams& params, int N,
                               std::int64_t trials, std::uint64_t seed_base,
                               PercMode mode = PercMode::Bond,
                               const ExplorationBudget& budget = {}, int threads = 1,
                               std::vector<TrialRecord>* records = nullptr) {
    if (trials < 1) throw std::invalid_argument("survival_prob: trials must be >= 1");
    if (N < 0) throw std::invalid_argument("survival_prob: N must be >= 0");
    validate(budget);

    std::vector<std::uint8_t> flags(static_cast<std::size_t>(trials), 0);
    if (records) records->assign(static_cast<std::size_t>(trials), {});
    parallel_trials(trials, threads, [&](std::int64_t t) {
        const std::uint64_t seed = seed_base + static_cast<std::uint64_t>(t);
        LayeredEnv env(params, seed);
        const auto r = reach_goal(g, env, mode, {g.origin()}, N, budget.max_sites,
                                  [&](const typename G::Site& s) { return g.height(s); });
        flags[static_cast<std::size_t>(t)] =
            static_cast<std::uint8_t>(r.reached ? 1 : 0) |
            static_cast<std::uint8_t>(r.capped ? 2 : 0);
        if (records)
            (*records)[static_cast<std::size_t>(t)] =
                {t, seed, r.reached, r.best_progress, r.size, r.termination};
    });

    SurvivalEstimate est;
    est.trials = trials;
    est.N = N;
    for (auto f : flags) {
        est.reached += f & 1;
        est.capped += (f >> 1) & 1;
    }
    est.p_hat = static_cast<double>(est.reached) / static_cast<double>(trials);
    const Interval ci = wilson_interval(est.reached, trials);
    est.lo = ci.lo;
    est.hi = ci.hi;
    return est;
}

struct RadiiReport {
    std::vector<double> radius;  // radius[n] = R_n for the completed layers
    int completed = 0;           // layers with exact R_n (0..completed-1)
    bool capped = false;         // a site exceeded the radius cap; run aborted
    bool died = false;           // some layer came up empty (p_g < 1 only)
};

// Layer-by-layer growth of the origin cluster: each layer is the
// horizontal closure of the open upward lift of the previous one, and
// R_n is the largest in-layer l1 radius.  The recursion tracks exactly
// the layer slices of the full cluster when every upward edge is open,
// which is why p_g = 1 is required.
template <GraphLike G>
    requires HasLayerRadius<G>
RadiiReport layer_radii(const G& g, const LayeredEnv& env, int N,
                        int radius_cap = (1 << 19) - 2) {
    if (env.params().p_g != 1.0)
        throw std::invalid_argument("layer_radii: recursion requires p_g = 1");
    if (N < 0 || radius_cap < 1)
        throw std::invalid_argument("layer_radii: N must be >= 0 and cap positive");

    using Site = typename G::Site;
    EdgeProbCache prob(env, split_delta_of(g));
    RadiiReport rep;

    std::vector<Site> layer;  // members of the current layer
    std::vector<Site> seeds;

    // Visited set for the layer in hand.  Planar-cell graphs get a dense
    // bit grid; hash probes into a layer-sized table miss cache on nearly
    // every edge and dominate the runtime of long runs.  Membership and
    // insertion order are identical either way, and the environment is a
    // pure function of the edge key, so the reported radii do not depend
    // on the structure.
    CodeSet seen_codes(1024);
    CellGrid seen_cells;
    auto fresh = [&](const Site& v) -> bool {
        if constexpr (HasLayerCell<G>) {
            const auto c = g.layer_cell(v);
            return !seen_cells.contains(c[0], c[1]);
        } else {
            return !seen_codes.contains(g.encode(v));
        }
    };
    auto mark = [&](const Site& v) {
        if constexpr (HasLayerCell<G>) {
            const auto c = g.layer_cell(v);
            seen_cells.insert(c[0], c[1]);
        } else {
            seen_codes.insert(g.encode(v));
        }
    };
    // Empties the set; the grid re-centers its box on the new blob, so a
    // drifting footprint never forces the box to cover the whole run.
    auto restart = [&](const Site& center) {
        if constexpr (HasLayerCell<G>) {
            const auto c = g.layer_cell(center);
            seen_cells.reset(c[0], c[1], seen_cells.half_extent());
        } else {
            seen_codes.clear();
        }
    };

    // Horizontal closure within one layer; returns false on a cap hit.
    auto close_layer = [&](int n) -> bool {
        const double ph = prob(EdgeClass::Horizontal, n);
        double radius = -1.0;
        for (std::size_t qi = 0; qi < layer.size(); ++qi) {
            const Site v = layer[qi];
            const double r = g.layer_radius(v);
            if (r > radius_cap) return false;
            if (r > radius) radius = r;
            g.for_out_edges(v, [&](const OutEdge<Site>& e) {
                if (e.cls != EdgeClass::Horizontal) return;
                if (!fresh(e.head)) return;
                if (!env.open(make_edge_key(g.encode(v), g.encode(e.head), e.cls,
                                            e.copy, e.oriented),
                              ph))
                    return;
                mark(e.head);
                layer.push_back(e.head);
            });
        }
        rep.radius.push_back(radius);
        rep.completed = n + 1;
        return true;
    };

    {
        const Site o = g.origin();
        restart(o);
        mark(o);
        layer.push_back(o);
    }
    if (!close_layer(0)) {
        rep.capped = true;
        rep.radius.clear();
        rep.completed = 0;
        return rep;
    }

    for (int n = 1; n <= N; ++n) {
        seeds.clear();
        restart(layer.front());
        const double pu = prob(EdgeClass::Upward, n - 1);
        for (const Site& v : layer) {
            g.for_out_edges(v, [&](const OutEdge<Site>& e) {
                if (e.cls != EdgeClass::Upward) return;
                if (!fresh(e.head)) return;
                if (pu < 1.0 &&
                    !env.open(make_edge_key(g.encode(v), g.encode(e.head), e.cls,
                                            e.copy, e.oriented),
                              pu))
                    return;
                mark(e.head);
                seeds.push_back(e.head);
            });
        }
        if (seeds.empty()) {
            rep.died = true;
            return rep;
        }
        layer.swap(seeds);
        if (!close_layer(n)) {
            rep.capped = true;
            rep.radius.resize(static_cast<std::size_t>(rep.completed));
            return rep;
        }
    }
    return rep;
}

}  // namespace percolab
