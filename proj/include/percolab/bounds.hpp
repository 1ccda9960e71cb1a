#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "percolab/environment.hpp"
#include "percolab/estimator.hpp"
#include "percolab/exploration.hpp"
#include "percolab/graphs.hpp"
#include "percolab/parallel.hpp"
#include "percolab/stats.hpp"

namespace percolab {

// Sufficient condition for almost-sure extinction in the layered model:
// p_b below delta^2 / (16 chi) starves vertical progress faster than the
// horizontal clusters (mean size chi) can feed it.
inline double subcritical_bound(double delta, double chi) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("subcritical_bound: delta must lie in (0, 1]");
    if (!(chi >= 1.0)) throw std::invalid_argument("subcritical_bound: chi must be >= 1");
    return delta * delta / (16.0 * chi);
}

struct SubcriticalBoundResult {
    double bound = 0.0;
    double delta = 0.0;
    ChiEstimate chi;
};

inline SubcriticalBoundResult subcritical_bound_mc(double delta, double p_h,
                                                   std::int64_t trials, int radius_cap = 1000,
                                                   std::uint64_t seed = 0, int threads = 1) {
    SubcriticalBoundResult r;
    r.delta = delta;
    r.chi = chi_estimate(p_h, trials, radius_cap, seed, threads);
    r.bound = subcritical_bound(delta, std::max(1.0, r.chi.chi_hat));
    return r;
}

struct BadBlock {
    int n = 0;
    std::int64_t window_lo = 0;  // first admissible start height
    std::int64_t window_hi = 0;  // exclusive bound on start heights
    std::int64_t start = -1;
    bool found = false;
    bool degenerate = false;  // window admits no start at all
};

// First run of n consecutive Bad layers whose start lies in [c_n, c_{n+1} - n),
// c_n = (2/delta)^n, for n = 1..n_max. Runs are scanned left to right, so the
// reported start is the earliest admissible one.
inline std::vector<BadBlock> locate_bad_blocks(const LayeredEnv& env, int n_max) {
    const double delta = env.params().delta;
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("locate_bad_blocks: delta must lie in (0, 1]");
    if (n_max < 1) throw std::invalid_argument("locate_bad_blocks: n_max must be >= 1");
    const double base = 2.0 / delta;
    if (std::pow(base, n_max + 1) > 1e8)
        throw std::invalid_argument("locate_bad_blocks: windows exceed 1e8 layers, lower n_max");

    std::vector<BadBlock> out;
    out.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
        BadBlock b;
        b.n = n;
        b.window_lo = static_cast<std::int64_t>(std::ceil(std::pow(base, n)));
        b.window_hi = static_cast<std::int64_t>(std::ceil(std::pow(base, n + 1))) - n;
        if (b.window_hi <= b.window_lo) {
            b.degenerate = true;
            out.push_back(b);
            continue;
        }
        int run = 0;
        for (std::int64_t h = b.window_lo; h < b.window_hi + n; ++h) {
            run = env.layer_type(h) == LayerType::Bad ? run + 1 : 0;
            if (run >= n) {
                const std::int64_t start = h - n + 1;
                if (start < b.window_hi) {
                    b.start = start;
                    b.found = true;
                }
                break;
            }
        }
        out.push_back(b);
    }
    return out;
}

struct CrossingEstimate {
    int n = 0;
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::int64_t trials = 0;
    std::int64_t successes = 0;
    std::int64_t entry_count = 0;
    double first_moment_bound = 0.0;  // (4 chi p_b)^n * entry_count
    double condition = 0.0;           // 16 chi p_b / delta^2, < 1 in the regime of interest
};

// Monte Carlo probability that a block of n fully-bad layers is crossed
// vertically starting from the entry sites {(x, y, 0) : |x|+|y| <= entry_width}.
inline CrossingEstimate block_crossing_prob(int n, double delta, double p_b, double p_h,
                                            int entry_width, double chi, std::int64_t trials,
                                            std::uint64_t seed = 0,
                                            std::int64_t max_sites = 4'000'000,
                                            int threads = 1) {
    if (n < 1) throw std::invalid_argument("block_crossing_prob: n must be >= 1");
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("block_crossing_prob: delta must lie in (0, 1]");
    if (!(p_b >= 0.0 && p_b <= 1.0 && p_h >= 0.0 && p_h <= 1.0))
        throw std::invalid_argument("block_crossing_prob: probabilities must lie in [0, 1]");
    if (entry_width < 0) throw std::invalid_argument("block_crossing_prob: entry_width must be >= 0");
    if (!(chi >= 1.0)) throw std::invalid_argument("block_crossing_prob: chi must be >= 1");
    if (trials < 1) throw std::invalid_argument("block_crossing_prob: trials must be >= 1");

    HexGraph g{true};
    std::vector<SiteH> entry;
    for (int x = -entry_width; x <= entry_width; ++x)
        for (int y = -entry_width + std::abs(x); y <= entry_width - std::abs(x); ++y)
            entry.push_back(SiteH{x, y, 0});

    // All layers bad: the block interior is exactly the bad regime.
    const EnvParams params{1.0, p_b, p_b, p_h};
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(trials), 0);
    auto progress = [&g](const SiteH& s) { return g.height(s); };
    parallel_trials(trials, threads, [&](std::int64_t t) {
        LayeredEnv env(params, seed + static_cast<std::uint64_t>(t));
        ReachResult r = reach_goal(g, env, PercMode::Bond, entry, n, max_sites, progress);
        hit[static_cast<std::size_t>(t)] = r.reached ? 1 : 0;
    });

    CrossingEstimate est;
    est.n = n;
    est.trials = trials;
    est.entry_count = static_cast<std::int64_t>(entry.size());
    for (auto h : hit) est.successes += h;
    est.p_hat = static_cast<double>(est.successes) / static_cast<double>(trials);
    Interval ci = wilson_interval(est.successes, trials);
    est.lo = ci.lo;
    est.hi = ci.hi;
    est.first_moment_bound =
        std::pow(4.0 * chi * p_b, n) * static_cast<double>(est.entry_count);
    est.condition = 16.0 * chi * p_b / (delta * delta);
    return est;
}

struct GrowthSeedResult {
    std::uint64_t seed = 0;
    std::vector<double> radii;
    double max_tail_ratio = 0.0;  // max over n >= n_min of R_n / (n ln^2 n)
    bool rn_ge_n = false;         // R_n >= n for every 1 <= n <= N
    bool capped = false;
};

struct GrowthCheck {
    double p_h = 0.0;
    int N = 0;
    int n_min = 0;
    std::vector<GrowthSeedResult> seeds;
    bool all_tail_below_one = false;
    bool all_rn_ge_n = false;
};

// Per-layer cluster radii of the all-good environment (p_g = 1) against the
// n (ln n)^2 growth envelope.
inline GrowthCheck growth_ratio_check(double p_h, int N, int seed_count,
                                      std::uint64_t seed_base, int n_min = 8,
                                      int radius_cap = (1 << 19) - 2, int threads = 1) {
    if (!(p_h >= 0.0 && p_h < 0.5))
        throw std::invalid_argument("growth_ratio_check: requires 0 <= p_h < 1/2");
    if (n_min < 2) throw std::invalid_argument("growth_ratio_check: n_min must be >= 2");
    if (N < n_min) throw std::invalid_argument("growth_ratio_check: N must be >= n_min");
    if (seed_count < 1) throw std::invalid_argument("growth_ratio_check: need >= 1 seed");

    GrowthCheck out;
    out.p_h = p_h;
    out.N = N;
    out.n_min = n_min;
    out.seeds.resize(static_cast<std::size_t>(seed_count));

    HexGraph g{true};
    const EnvParams params{0.0, 1.0, 1.0, p_h};
    parallel_trials(seed_count, threads, [&](std::int64_t s) {
        GrowthSeedResult r;
        r.seed = seed_base + static_cast<std::uint64_t>(s);
        LayeredEnv env(params, r.seed);
        RadiiReport rep = layer_radii(g, env, N, radius_cap);
        r.radii = rep.radius;
        r.capped = rep.capped;
        r.rn_ge_n = !rep.capped;
        for (std::size_t n = 1; n < r.radii.size(); ++n)
            if (r.radii[n] < static_cast<double>(n)) r.rn_ge_n = false;
        for (std::size_t n = static_cast<std::size_t>(n_min); n < r.radii.size(); ++n) {
            const double ln = std::log(static_cast<double>(n));
            const double ratio = r.radii[n] / (static_cast<double>(n) * ln * ln);
            r.max_tail_ratio = std::max(r.max_tail_ratio, ratio);
        }
        out.seeds[static_cast<std::size_t>(s)] = std::move(r);
    });

    out.all_tail_below_one = true;
    out.all_rn_ge_n = true;
    for (const auto& r : out.seeds) {
        if (r.capped || r.max_tail_ratio >= 1.0) out.all_tail_below_one = false;
        if (!r.rn_ge_n) out.all_rn_ge_n = false;
    }
    return out;
}

struct CriticalLayersResult {
    double p_b = 0.0;
    double p_h = 0.0;
    std::vector<SurvivalEstimate> levels;
    bool nonincreasing = false;  // exact under shared per-trial seeds
    double final_p_hat = 0.0;
};

// Survival table for the square-lattice layer stack at critical horizontal
// density p_h = 1/2 with every layer bad. Any p_b > 0 is conjectured
// supercritical; p_b = 0 is rejected because the stack cannot climb at all.
inline CriticalLayersResult critical_layers_experiment(double p_b,
                                                       const std::vector<int>& n_levels,
                                                       std::int64_t trials,
                                                       std::uint64_t seed = 0,
                                                       double p_h = 0.5,
                                                       const ExplorationBudget& budget = {},
                                                       int threads = 1) {
    if (!(p_b > 0.0 && p_b <= 1.0))
        throw std::domain_error("critical_layers_experiment: p_b must lie in (0, 1]");
    if (!(p_h >= 0.0 && p_h <= 1.0))
        throw std::invalid_argument("critical_layers_experiment: p_h must lie in [0, 1]");
    if (n_levels.empty())
        throw std::invalid_argument("critical_layers_experiment: n_levels must be nonempty");
    for (std::size_t i = 0; i < n_levels.size(); ++i) {
        if (n_levels[i] < 1)
            throw std::invalid_argument("critical_layers_experiment: levels must be >= 1");
        if (i > 0 && n_levels[i] <= n_levels[i - 1])
            throw std::invalid_argument("critical_layers_experiment: levels must be increasing");
    }
    if (trials < 1) throw std::invalid_argument("critical_layers_experiment: trials must be >= 1");

    Z2ZPlusGraph g;
    const EnvParams params{1.0, p_b, p_b, p_h};
    CriticalLayersResult out;
    out.p_b = p_b;
    out.p_h = p_h;
    for (int N : n_levels)
        out.levels.push_back(survival_prob(g, params, N, trials, seed, PercMode::Bond, budget, threads));

    // Same seed set at every level, so reaching N' >= N implies reaching N and
    // the estimates are monotone by construction; a violation is a bug.
    out.nonincreasing = true;
    for (std::size_t i = 1; i < out.levels.size(); ++i)
        if (out.levels[i].reached > out.levels[i - 1].reached) out.nonincreasing = false;
    out.final_p_hat = out.levels.back().p_hat;
    return out;
}

}  // namespace percolab
