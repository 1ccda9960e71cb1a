#pragma once

#include <cstdint>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "percolab/environment.hpp"
#include "percolab/flatset.hpp"
#include "percolab/graphs.hpp"
#include "percolab/rng.hpp"

// Dynamic exploration coupling between percolation on a base graph G and
// its split ladder.  The ladder stacks copies of G along the half-line,
// splits each vertical edge into delta = max_degree(G) parallel copies
// (each open with probability 1-(1-p)^(1/delta)), and explores G edge by
// edge.  A candidate turns red when either
//   (i)  the ladder copy of the edge at the anchor's level is open, or
//   (ii) a fresh vertical copy above the anchor and the edge copy one
//        level up are both open,
// so each fresh test succeeds with probability
//   f(p) = p + (1-p) * ptilde * p.
// Red elements therefore reproduce Bernoulli(f(p)) percolation on G while
// every red element carries a witness site (w, h) inside an open ladder
// cluster rooted at (origin, 0).

namespace percolab {

inline double f_red_asym(double p_level, double p_vert, int delta) {
    if (!(p_level >= 0.0 && p_level <= 1.0) || !(p_vert >= 0.0 && p_vert <= 1.0))
        throw std::invalid_argument("f_red_asym: probabilities must lie in [0,1]");
    return p_level + (1.0 - p_level) * split_copy_prob(p_vert, delta) * p_level;
}

inline double f_red(double p, int delta) { return f_red_asym(p, p, delta); }

enum class RedRule : std::uint8_t { None = 0, Direct = 1, Detour = 2 };

struct CouplingStep {
    EdgeKey base_key;           // canonical base edge key (bond mode)
    std::uint64_t tail_code = 0;  // anchor w_j (red)
    std::uint64_t head_code = 0;  // candidate v
    std::int32_t anchor_height = 0;  // h_j
    RedRule rule = RedRule::None;
    std::uint16_t copy_index = 0;  // fresh vertical/site copy used by (ii)
    bool level_open = false;       // rule (i) element
    bool copy_open = false;        // consumed copy state
    bool above_open = false;       // rule (ii) level element
};

struct CouplingTrace {
    bool site_mode = false;
    double p = 0.0;
    double p_vert = 0.0;  // equals p unless the asymmetric variant runs
    std::int32_t delta = 0;
    std::uint64_t seed = 0;
    std::uint64_t origin_code = 0;
    std::vector<CouplingStep> steps;
    std::vector<std::pair<std::uint64_t, std::int32_t>> red;  // (w_n, h_n), origin first
    std::int64_t explored = 0;  // tested elements (= steps)
    bool budget_capped = false;
};

struct CouplingBudget {
    std::int64_t max_steps = 1'000'000;
    std::int64_t max_red = 1'000'000;
};

namespace detail {

// Ladder copy of a base edge at a given level; the level rides in the
// high bits of the class word.
inline bool cpl_level_open(std::uint64_t seed, const EdgeKey& base_key, std::int64_t h,
                           double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return unit_at(seed, NS_CPL_LEVEL, base_key.a, base_key.b,
                   base_key.c | (static_cast<std::uint64_t>(h) << 24)) < p;
}

inline bool cpl_copy_open(std::uint64_t seed, std::uint64_t vertex_code, std::int64_t h,
                          std::int32_t copy, double ptilde) {
    if (ptilde <= 0.0) return false;
    if (ptilde >= 1.0) return true;
    return unit_at(seed, NS_CPL_COPY, vertex_code, static_cast<std::uint64_t>(h),
                   static_cast<std::uint64_t>(copy)) < ptilde;
}

// A compound site is open when at least one of its delta parallel copies
// is; each copy draws its own state so later per-copy queries stay
// consistent with the bundle.
inline bool cpl_site_open(std::uint64_t seed, std::uint64_t site_code, std::int64_t h,
                          std::int32_t delta, double ptilde) {
    if (ptilde <= 0.0) return false;
    if (ptilde >= 1.0) return true;
    for (std::int32_t k = 1; k <= delta; ++k)
        if (unit_at(seed, NS_CPL_SITE, site_code, static_cast<std::uint64_t>(h),
                    static_cast<std::uint64_t>(k)) < ptilde)
            return true;
    return false;
}

inline bool cpl_site_copy_open(std::uint64_t seed, std::uint64_t site_code,
                               std::int64_t h, std::int32_t copy, double ptilde) {
    if (ptilde <= 0.0) return false;
    if (ptilde >= 1.0) return true;
    return unit_at(seed, NS_CPL_SITE, site_code, static_cast<std::uint64_t>(h),
                   static_cast<std::uint64_t>(copy)) < ptilde;
}

}  // namespace detail

// Bond version.  Boundary edges are tested in canonical key order, each
// at most once; a failed candidate edge stays closed forever and a red
// head joins the cluster with its witness height.  Pass p_vert to give
// the vertical bundles a different parameter than the level edges (the
// layered half-space reduction needs that); the default couples at f(p).
template <GraphLike G>
CouplingTrace run_coupling_bond(const G& base, double p,
                                const typename G::Site& origin,
                                const CouplingBudget& budget = {},
                                std::uint64_t seed = 0, double p_vert = -1.0) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("run_coupling_bond: p must lie in [0,1]");
    if (p_vert < 0.0) p_vert = p;
    if (!(p_vert <= 1.0))
        throw std::invalid_argument("run_coupling_bond: p_vert must lie in [0,1]");
    if (budget.max_steps < 1 || budget.max_red < 1)
        throw std::invalid_argument("run_coupling_bond: budget must be positive");

    using Site = typename G::Site;
    const std::int32_t delta = base.max_degree();
    const double ptilde = split_copy_prob(p_vert, delta);

    struct Entry {
        EdgeKey key;
        std::uint64_t tail_code;
        std::uint64_t head_code;
        Site head;
    };
    struct Cmp {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.key != b.key) return b.key < a.key;
            return b.tail_code < a.tail_code;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Cmp> frontier;
    std::unordered_map<std::uint64_t, std::int32_t> red;  // code -> witness height
    std::map<std::pair<std::uint64_t, std::int32_t>, std::int32_t> used_copies;

    CouplingTrace tr;
    tr.site_mode = false;
    tr.p = p;
    tr.p_vert = p_vert;
    tr.delta = delta;
    tr.seed = seed;

    auto push_boundary = [&](const Site& v, std::uint64_t vcode) {
        base.for_out_edges(v, [&](const OutEdge<Site>& e) {
            const std::uint64_t hc = base.encode(e.head);
            if (red.count(hc)) return;
            frontier.push({make_edge_key(vcode, hc, e.cls, e.copy, e.oriented), vcode,
                           hc, e.head});
        });
    };

    const std::uint64_t oc = base.encode(origin);
    tr.origin_code = oc;
    red.emplace(oc, 0);
    tr.red.push_back({oc, 0});
    push_boundary(origin, oc);

    while (!frontier.empty()) {
        if (static_cast<std::int64_t>(tr.steps.size()) >= budget.max_steps ||
            static_cast<std::int64_t>(tr.red.size()) >= budget.max_red) {
            tr.budget_capped = true;
            break;
        }
        const Entry e = frontier.top();
        frontier.pop();
        if (red.count(e.head_code)) continue;  // edge no longer on the boundary
        const std::int32_t h = red.at(e.tail_code);

        CouplingStep st;
        st.base_key = e.key;
        st.tail_code = e.tail_code;
        st.head_code = e.head_code;
        st.anchor_height = h;
        std::int32_t head_height = -1;

        st.level_open = detail::cpl_level_open(seed, e.key, h, p);
        if (st.level_open) {
            st.rule = RedRule::Direct;
            head_height = h;
        } else {
            std::int32_t& cnt = used_copies[{e.tail_code, h}];
            if (cnt >= delta)
                throw std::logic_error("run_coupling_bond: vertical bundle exhausted");
            st.copy_index = static_cast<std::uint16_t>(++cnt);
            st.copy_open = detail::cpl_copy_open(seed, e.tail_code, h, cnt, ptilde);
            if (st.copy_open) {
                st.above_open = detail::cpl_level_open(seed, e.key, h + 1, p);
                if (st.above_open) {
                    st.rule = RedRule::Detour;
                    head_height = h + 1;
                }
            }
        }
        tr.steps.push_back(st);
        if (head_height >= 0) {
            red.emplace(e.head_code, head_height);
            tr.red.push_back({e.head_code, head_height});
            push_boundary(e.head, e.head_code);
        }
    }
    tr.explored = static_cast<std::int64_t>(tr.steps.size());
    return tr;
}

// Site version.  Candidates on the site boundary are tested smallest code
// first, once each: failed sites are final.  Rule (i) asks the compound
// site at the anchor's level, rule (ii) a fresh parallel copy of the site
// above the anchor plus the compound one level up.
template <GraphLike G>
CouplingTrace run_coupling_site(const G& base, double p,
                                const typename G::Site& origin,
                                const CouplingBudget& budget = {},
                                std::uint64_t seed = 0) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("run_coupling_site: p must lie in [0,1]");
    if (budget.max_steps < 1 || budget.max_red < 1)
        throw std::invalid_argument("run_coupling_site: budget must be positive");

    using Site = typename G::Site;
    const std::int32_t delta = base.max_degree();
    const double ptilde = split_copy_prob(p, delta);

    struct Entry {
        std::uint64_t head_code;
        std::int64_t seq;  // push order; earliest anchor wins ties
        std::uint64_t anchor_code;
        Site head;
    };
    struct Cmp {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.head_code != b.head_code) return a.head_code > b.head_code;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Cmp> frontier;
    std::unordered_map<std::uint64_t, std::int32_t> red;
    CodeSet failed(256);
    std::map<std::pair<std::uint64_t, std::int32_t>, std::int32_t> used_copies;
    std::int64_t seq = 0;

    CouplingTrace tr;
    tr.site_mode = true;
    tr.p = p;
    tr.p_vert = p;
    tr.delta = delta;
    tr.seed = seed;

    auto push_boundary = [&](const Site& v, std::uint64_t vcode) {
        base.for_out_edges(v, [&](const OutEdge<Site>& e) {
            const std::uint64_t hc = base.encode(e.head);
            if (red.count(hc) || failed.contains(hc)) return;
            frontier.push({hc, seq++, vcode, e.head});
        });
    };

    const std::uint64_t oc = base.encode(origin);
    tr.origin_code = oc;
    red.emplace(oc, 0);
    tr.red.push_back({oc, 0});
    push_boundary(origin, oc);

    while (!frontier.empty()) {
        if (static_cast<std::int64_t>(tr.steps.size()) >= budget.max_steps ||
            static_cast<std::int64_t>(tr.red.size()) >= budget.max_red) {
            tr.budget_capped = true;
            break;
        }
        const Entry e = frontier.top();
        frontier.pop();
        if (red.count(e.head_code) || failed.contains(e.head_code)) continue;
        const std::int32_t h = red.at(e.anchor_code);

        CouplingStep st;
        st.tail_code = e.anchor_code;
        st.head_code = e.head_code;
        st.anchor_height = h;
        std::int32_t head_height = -1;

        st.level_open = detail::cpl_site_open(seed, e.head_code, h, delta, ptilde);
        if (st.level_open) {
            st.rule = RedRule::Direct;
            head_height = h;
        } else {
            // The fresh copy lives at the site above the anchor; its keys
            // are disjoint from every compound query this process makes.
            std::int32_t& cnt = used_copies[{e.anchor_code, h + 1}];
            if (cnt >= delta)
                throw std::logic_error("run_coupling_site: parallel sites exhausted");
            st.copy_index = static_cast<std::uint16_t>(++cnt);
            st.copy_open =
                detail::cpl_site_copy_open(seed, e.anchor_code, h + 1, cnt, ptilde);
            if (st.copy_open) {
                st.above_open =
                    detail::cpl_site_open(seed, e.head_code, h + 1, delta, ptilde);
                if (st.above_open) {
                    st.rule = RedRule::Detour;
                    head_height = h + 1;
                }
            }
        }
        tr.steps.push_back(st);
        if (head_height >= 0) {
            red.emplace(e.head_code, head_height);
            tr.red.push_back({e.head_code, head_height});
            push_boundary(e.head, e.head_code);
        } else {
            failed.insert(e.head_code);
        }
    }
    tr.explored = static_cast<std::int64_t>(tr.steps.size());
    return tr;
}

struct VerifyResult {
    bool ok = true;
    std::int64_t step = -1;  // first offending step, -1 when structural
    std::string issue;

    explicit operator bool() const { return ok; }
};

// Independent audit of a trace: replays every step, recomputing each
// sampled ladder element from (seed, key) alone, and checks that the
// recorded rules, heights, copy indices and the red sequence all follow.
// A pass certifies that every red vertex's witness is joined to the
// origin's by elements the replay itself found open.
inline VerifyResult verify_witness(const CouplingTrace& tr) {
    auto fail = [](std::int64_t step, std::string msg) {
        return VerifyResult{false, step, std::move(msg)};
    };
    if (tr.delta < 1) return fail(-1, "delta must be positive");
    if (tr.red.empty() ||
        tr.red.front() != std::pair<std::uint64_t, std::int32_t>{tr.origin_code, 0})
        return fail(-1, "red sequence must start at the origin with height 0");

    const double ptilde = split_copy_prob(tr.site_mode ? tr.p : tr.p_vert, tr.delta);
    std::unordered_map<std::uint64_t, std::int32_t> red;
    std::map<std::pair<std::uint64_t, std::int32_t>, std::int32_t> used_copies;
    red.emplace(tr.origin_code, 0);
    std::size_t next_red = 1;

    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        const CouplingStep& st = tr.steps[i];
        const auto n = static_cast<std::int64_t>(i);
        const auto anchor = red.find(st.tail_code);
        if (anchor == red.end()) return fail(n, "anchor is not red at test time");
        if (anchor->second != st.anchor_height)
            return fail(n, "anchor height does not match the red record");
        if (red.count(st.head_code)) return fail(n, "candidate already red");
        const std::int32_t h = st.anchor_height;

        const bool level =
            tr.site_mode
                ? detail::cpl_site_open(tr.seed, st.head_code, h, tr.delta, ptilde)
                : detail::cpl_level_open(tr.seed, st.base_key, h, tr.p);
        if (level != st.level_open) return fail(n, "level element state mismatch");

        std::int32_t head_height = -1;
        if (level) {
            if (st.rule != RedRule::Direct || st.copy_index != 0)
                return fail(n, "open level element must fire the direct rule");
            head_height = h;
        } else {
            const std::int32_t copy_h = tr.site_mode ? h + 1 : h;
            std::int32_t& cnt = used_copies[{st.tail_code, copy_h}];
            if (st.copy_index != cnt + 1)
                return fail(n, "copy index is not the lowest unused copy");
            if (st.copy_index > tr.delta) return fail(n, "copy budget exceeded");
            cnt = st.copy_index;
            const bool copy =
                tr.site_mode
                    ? detail::cpl_site_copy_open(tr.seed, st.tail_code, copy_h,
                                                 st.copy_index, ptilde)
                    : detail::cpl_copy_open(tr.seed, st.tail_code, h, st.copy_index,
                                            ptilde);
            if (copy != st.copy_open) return fail(n, "copy state mismatch");
            if (copy) {
                const bool above =
                    tr.site_mode
                        ? detail::cpl_site_open(tr.seed, st.head_code, h + 1, tr.delta,
                                                ptilde)
                        : detail::cpl_level_open(tr.seed, st.base_key, h + 1, tr.p);
                if (above != st.above_open)
                    return fail(n, "upper level element state mismatch");
                if (above) {
                    if (st.rule != RedRule::Detour)
                        return fail(n, "open detour must fire rule (ii)");
                    head_height = h + 1;
                } else if (st.rule != RedRule::None) {
                    return fail(n, "closed detour cannot turn the candidate red");
                }
            } else if (st.rule != RedRule::None || st.above_open) {
                return fail(n, "closed copy cannot extend the witness");
            }
        }

        if (head_height >= 0) {
            if (next_red >= tr.red.size() ||
                tr.red[next_red] != std::pair{st.head_code, head_height})
                return fail(n, "red sequence does not match the replay");
            red.emplace(st.head_code, head_height);
            ++next_red;
        }
    }
    if (next_red != tr.red.size())
        return fail(-1, "red sequence lists vertices no step produced");
    return {};
}

}  // namespace percolab
