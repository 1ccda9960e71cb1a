#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "percolab/exploration.hpp"
#include "percolab/graphs.hpp"
#include "percolab/parallel.hpp"
#include "percolab/stats.hpp"

namespace percolab {

struct PcPoint {
    double p = 0.0;
    int N = 0;
    std::int64_t trials = 0;
    std::int64_t survivors = 0;
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::int64_t capped = 0;
};

struct PcEstimate {
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 1.0;
    double threshold = 0.0;
    double tol = 0.0;
    std::vector<int> n_levels;
    std::vector<PcPoint> curve;
    std::int64_t trials_per_point = 0;
    bool converged = false;
    PercMode mode = PercMode::Bond;
};

// Left-right crossing probability of the (L+1) x L grid. The box is chosen so
// that for bond percolation the crossing event is self-dual: at p = 1/2 the
// probability is exactly 1/2 for every L, which anchors the bisection target.
inline SurvivalEstimate crossing_prob(int L, double p, PercMode mode, std::int64_t trials,
                                      std::uint64_t seed_base, int threads = 1,
                                      std::int64_t max_sites = 4'000'000) {
    if (L < 1) throw std::invalid_argument("crossing_prob: L must be >= 1");
    if (trials < 1) throw std::invalid_argument("crossing_prob: trials must be >= 1");
    FiniteGrid grid(L + 1, L, false);
    std::vector<FiniteGrid::Site> sources;
    sources.reserve(static_cast<std::size_t>(L));
    for (int y = 0; y < L; ++y) sources.push_back({0, y});

    const EnvParams params = EnvParams::uniform(p);
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(trials), 0);
    std::vector<std::uint8_t> cap(static_cast<std::size_t>(trials), 0);
    auto progress = [](const FiniteGrid::Site& s) { return s[0]; };

    parallel_trials(trials, threads, [&](std::int64_t t) {
        LayeredEnv env(params, seed_base + static_cast<std::uint64_t>(t));
        const std::vector<FiniteGrid::Site>* src = &sources;
        std::vector<FiniteGrid::Site> open_src;
        if (mode == PercMode::Site) {
            for (const auto& s : sources)
                if (env.site_open(grid.encode(s), p)) open_src.push_back(s);
            src = &open_src;
        }
        ReachResult r = reach_goal(grid, env, mode, *src, L, max_sites, progress);
        hit[static_cast<std::size_t>(t)] = r.reached ? 1 : 0;
        cap[static_cast<std::size_t>(t)] = r.capped ? 1 : 0;
    });

    SurvivalEstimate est;
    est.trials = trials;
    est.N = L;
    for (std::int64_t t = 0; t < trials; ++t) {
        est.reached += hit[static_cast<std::size_t>(t)];
        est.capped += cap[static_cast<std::size_t>(t)];
    }
    Interval ci = wilson_interval(est.reached, trials);
    est.p_hat = static_cast<double>(est.reached) / static_cast<double>(trials);
    est.lo = ci.lo;
    est.hi = ci.hi;
    return est;
}

// Bisection estimate of the critical parameter. The survival surrogate is
// reach-height-N (height graphs) or the self-dual box crossing (UnorientedZ2,
// with box side N and threshold 1/2). All points at one level share the same
// per-trial seed set, so the measured curve is a fixed nondecreasing step
// function of p and the bracket invariant s(lo) <= threshold < s(hi) is exact.
// Warm levels at smaller N run a quarter of the trials to position the
// bracket; the reported estimate comes from the largest N at full trials.
template <GraphLike G>
PcEstimate estimate_pc(const G& g, PercMode mode, const std::vector<int>& n_levels,
                       std::int64_t trials, double tol, std::uint64_t seed,
                       double threshold = -1.0, const ExplorationBudget& budget = {},
                       int threads = 1) {
    if (n_levels.empty()) throw std::invalid_argument("estimate_pc: n_levels must be nonempty");
    for (std::size_t i = 0; i < n_levels.size(); ++i) {
        if (n_levels[i] < 1) throw std::invalid_argument("estimate_pc: levels must be >= 1");
        if (i > 0 && n_levels[i] <= n_levels[i - 1])
            throw std::invalid_argument("estimate_pc: levels must be strictly increasing");
    }
    if (trials < 1) throw std::invalid_argument("estimate_pc: trials must be >= 1");
    if (!(tol > 0.0 && tol < 0.5)) throw std::invalid_argument("estimate_pc: tol must lie in (0, 0.5)");

    constexpr bool kCrossing = std::is_same_v<G, UnorientedZ2>;
    if (threshold < 0.0) threshold = kCrossing ? 0.5 : 0.05;
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("estimate_pc: threshold must lie in (0, 1)");

    PcEstimate est;
    est.threshold = threshold;
    est.tol = tol;
    est.n_levels = n_levels;
    est.trials_per_point = trials;
    est.mode = mode;

    auto eval = [&](double p, int N, std::int64_t tr) -> PcPoint {
        SurvivalEstimate s;
        if constexpr (kCrossing) {
            s = crossing_prob(N, p, mode, tr, seed, threads, budget.max_sites);
        } else {
            s = survival_prob(g, EnvParams::uniform(p), N, tr, seed, mode, budget, threads);
        }
        PcPoint pt{p, N, tr, s.reached, s.p_hat, s.lo, s.hi, s.capped};
        est.curve.push_back(pt);
        return pt;
    };

    double lo = 0.0, hi = 1.0;
    PcPoint lo_pt, hi_pt;
    bool all_converged = true;
    std::int64_t warm = std::max<std::int64_t>(std::min<std::int64_t>(trials, 500), trials / 4);

    for (std::size_t li = 0; li < n_levels.size(); ++li) {
        const int N = n_levels[li];
        const bool final_level = li + 1 == n_levels.size();
        const std::int64_t tr = final_level ? trials : warm;

        if (li == 0) {
            lo = 0.0;
            hi = 1.0;
            lo_pt = eval(lo, N, tr);
            hi_pt = eval(hi, N, tr);
        } else {
            // Larger N only lowers the curve, so the old lo stays valid; the
            // crossing can move up past the old hi, so expand until bracketed.
            lo_pt = eval(lo, N, tr);
            double widen = std::max(4.0 * tol, 0.02);
            while (lo > 0.0 && lo_pt.p_hat > threshold) {
                hi = lo;
                hi_pt = lo_pt;
                lo = std::max(0.0, lo - widen);
                widen *= 2.0;
                lo_pt = eval(lo, N, tr);
            }
            hi_pt = eval(hi, N, tr);
            widen = std::max(4.0 * tol, 0.02);
            while (hi < 1.0 && hi_pt.p_hat <= threshold) {
                lo = hi;
                lo_pt = hi_pt;
                hi = std::min(1.0, hi + widen);
                widen *= 2.0;
                hi_pt = eval(hi, N, tr);
            }
        }

        int iter = 0;
        while (hi - lo > tol && iter < 60) {
            const double mid = 0.5 * (lo + hi);
            PcPoint mid_pt = eval(mid, N, tr);
            if (mid_pt.p_hat > threshold) {
                hi = mid;
                hi_pt = mid_pt;
            } else {
                lo = mid;
                lo_pt = mid_pt;
            }
            ++iter;
        }
        if (hi - lo > tol) all_converged = false;
    }

    est.p_hat = 0.5 * (lo + hi);

    // CI: bracket width plus binomial noise pushed through a local slope taken
    // on a wider stencil (the bracket endpoints are too close for a slope).
    const int N_last = n_levels.back();
    const double a = std::max(0.0, lo - 8.0 * tol);
    const double b = std::min(1.0, hi + 8.0 * tol);
    PcPoint pa = eval(a, N_last, warm);
    PcPoint pb = eval(b, N_last, warm);
    const double slope = (pb.p_hat - pa.p_hat) / std::max(b - a, 1e-12);
    const double w = 0.5 * std::max(lo_pt.hi - lo_pt.lo, hi_pt.hi - hi_pt.lo);
    double pad = slope > 1e-9 ? w / slope : (hi - lo);
    pad = std::clamp(pad, 0.5 * tol, 0.25);
    est.ci_lo = std::max(0.0, lo - pad);
    est.ci_hi = std::min(1.0, hi + pad);
    est.converged = all_converged;
    return est;
}

inline SurvivalEstimate survival_prob_any(const AnyGraph& g, const EnvParams& params, int N,
                                          std::int64_t trials, std::uint64_t seed_base,
                                          PercMode mode = PercMode::Bond,
                                          const ExplorationBudget& budget = {}, int threads = 1,
                                          std::vector<TrialRecord>* records = nullptr) {
    return std::visit(
        [&](const auto& gg) {
            return survival_prob(gg, params, N, trials, seed_base, mode, budget, threads, records);
        },
        g);
}

template <class T>
inline constexpr bool kHasPcSurrogate =
    !(std::is_same_v<T, FiniteGrid> || std::is_same_v<T, Star>);

inline PcEstimate estimate_pc_any(const AnyGraph& g, PercMode mode,
                                  const std::vector<int>& n_levels, std::int64_t trials,
                                  double tol, std::uint64_t seed, double threshold = -1.0,
                                  const ExplorationBudget& budget = {}, int threads = 1) {
    return std::visit(
        [&](const auto& gg) -> PcEstimate {
            using T = std::decay_t<decltype(gg)>;
            if constexpr (kHasPcSurrogate<T>) {
                return estimate_pc(gg, mode, n_levels, trials, tol, seed, threshold, budget, threads);
            } else {
                throw std::invalid_argument(
                    "estimate_pc: graph is finite and heightless, no survival surrogate");
            }
        },
        g);
}

struct ChiEstimate {
    double chi_hat = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::int64_t trials = 0;
    std::int64_t capped = 0;
    int radius_cap = 0;
    double p_h = 0.0;
};

// Mean cluster size of the origin for unoriented bond percolation on the
// square lattice. Clusters are truncated at l1 radius radius_cap; truncated
// trials still contribute their partial size and are counted in `capped`.
inline ChiEstimate chi_estimate(double p_h, std::int64_t trials, int radius_cap = 1000,
                                std::uint64_t seed = 0, int threads = 1) {
    if (!(p_h >= 0.0 && p_h < 0.5))
        throw std::domain_error("chi_estimate: requires 0 <= p_h < 1/2 (subcritical)");
    if (trials < 2) throw std::invalid_argument("chi_estimate: trials must be >= 2");
    if (radius_cap < 1) throw std::invalid_argument("chi_estimate: radius_cap must be >= 1");

    UnorientedZ2 g;
    EnvParams params{0.0, 0.0, 0.0, p_h};
    ExplorationBudget budget;
    budget.max_layer_radius = radius_cap;

    std::vector<double> sizes(static_cast<std::size_t>(trials), 0.0);
    std::vector<std::uint8_t> cap(static_cast<std::size_t>(trials), 0);
    parallel_trials(trials, threads, [&](std::int64_t t) {
        LayeredEnv env(params, seed + static_cast<std::uint64_t>(t));
        ClusterReport r = explore(g, env, g.origin(), budget, PercMode::Bond);
        sizes[static_cast<std::size_t>(t)] = static_cast<double>(r.size);
        cap[static_cast<std::size_t>(t)] = r.termination == Termination::RadiusBudget ? 1 : 0;
    });

    double mean = 0.0;
    for (double s : sizes) mean += s;
    mean /= static_cast<double>(trials);
    double var = 0.0;
    for (double s : sizes) var += (s - mean) * (s - mean);
    var /= static_cast<double>(trials - 1);
    const double half = 1.959963984540054 * std::sqrt(var / static_cast<double>(trials));

    ChiEstimate est;
    est.chi_hat = mean;
    est.lo = mean - half;
    est.hi = mean + half;
    est.trials = trials;
    est.radius_cap = radius_cap;
    est.p_h = p_h;
    for (auto c : cap) est.capped += c;
    return est;
}

struct MonotonicityEntry {
    std::string label;
    PcEstimate est;
};

// One comparison of adjacent family members: `sparse` is the member expected
// to have the larger critical parameter, `dense` the smaller.
struct MonotonicityPair {
    std::string sparse_label;
    std::string dense_label;
    double p_sparse = 0.0;
    double p_dense = 0.0;
    bool ordered = false;
    bool ci_disjoint = false;
    double p_star = 0.0;
    SurvivalEstimate surv_dense;
    SurvivalEstimate surv_sparse;
    double ratio = 0.0;
    bool witness_found = false;
    bool conclusive = false;
};

struct MonotonicityReport {
    std::vector<MonotonicityEntry> entries;
    std::vector<MonotonicityPair> pairs;
    bool all_conclusive = false;
};

// Family must be listed sparsest first, so critical parameters are expected
// strictly decreasing along it. For each adjacent pair this estimates both
// critical parameters and then hunts for a witness p* strictly between them
// where the denser graph survives at least 5x as often, with disjoint
// survival CIs. An inconclusive pair is reported, never silently passed.
inline MonotonicityReport monotonicity_report(
    const std::vector<std::pair<std::string, AnyGraph>>& family, PercMode mode, int N,
    std::int64_t trials, double tol, std::uint64_t seed,
    const ExplorationBudget& budget = {}, int threads = 1) {
    if (family.size() < 2)
        throw std::invalid_argument("monotonicity_report: need at least two graphs");
    if (N < 2) throw std::invalid_argument("monotonicity_report: N must be >= 2");

    std::vector<int> levels;
    if (N > 50) levels.push_back(50);
    levels.push_back(N);

    MonotonicityReport rep;
    rep.entries.reserve(family.size());
    for (const auto& [label, g] : family) {
        MonotonicityEntry e;
        e.label = label;
        e.est = estimate_pc_any(g, mode, levels, trials, tol, seed, -1.0, budget, threads);
        rep.entries.push_back(std::move(e));
    }

    rep.all_conclusive = true;
    for (std::size_t i = 0; i + 1 < family.size(); ++i) {
        const MonotonicityEntry& sparse = rep.entries[i];
        const MonotonicityEntry& dense = rep.entries[i + 1];
        MonotonicityPair pr;
        pr.sparse_label = sparse.label;
        pr.dense_label = dense.label;
        pr.p_sparse = sparse.est.p_hat;
        pr.p_dense = dense.est.p_hat;
        pr.ordered = pr.p_dense < pr.p_sparse;
        pr.ci_disjoint = dense.est.ci_hi < sparse.est.ci_lo;

        if (pr.ordered) {
            const double gap = pr.p_sparse - pr.p_dense;
            const double cands[3] = {pr.p_dense + 0.5 * gap, pr.p_dense + 0.35 * gap,
                                     pr.p_dense + 0.65 * gap};
            for (double p_star : cands) {
                SurvivalEstimate sd = survival_prob_any(family[i + 1].second,
                                                        EnvParams::uniform(p_star), N, trials,
                                                        seed, mode, budget, threads);
                SurvivalEstimate ss = survival_prob_any(family[i].second,
                                                        EnvParams::uniform(p_star), N, trials,
                                                        seed, mode, budget, threads);
                const double denom = std::max(ss.p_hat, 1e-300);
                const double ratio = sd.p_hat > 0.0 ? sd.p_hat / denom : 0.0;
                const bool found =
                    sd.p_hat >= 5.0 * ss.p_hat && sd.p_hat > 0.0 && sd.lo > ss.hi;
                if (ratio > pr.ratio || pr.p_star == 0.0) {
                    pr.p_star = p_star;
                    pr.surv_dense = sd;
                    pr.surv_sparse = ss;
                    pr.ratio = ratio;
                }
                if (found) {
                    pr.p_star = p_star;
                    pr.surv_dense = sd;
                    pr.surv_sparse = ss;
                    pr.ratio = ratio;
                    pr.witness_found = true;
                    break;
                }
            }
        }
        pr.conclusive = pr.ordered && pr.ci_disjoint && pr.witness_found;
        if (!pr.conclusive) rep.all_conclusive = false;
        rep.pairs.push_back(std::move(pr));
    }
    return rep;
}

}  // namespace percolab
