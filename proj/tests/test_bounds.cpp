#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include <percolab/bounds.hpp>
#include <percolab/estimator.hpp>
#include <percolab/exploration.hpp>
#include <percolab/graphs.hpp>

using namespace percolab;

namespace {

double chi_se(const ChiEstimate& e) { return (e.hi - e.lo) / (2.0 * 1.959963984540054); }

// Weighted least-squares slope of y against x.
double weighted_slope(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& w) {
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += w[i] * (x[i] - mx) * (y[i] - my);
        den += w[i] * (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

}  // namespace

TEST_CASE("the closed-form subcritical bound is exact") {
    REQUIRE(subcritical_bound(0.5, 2.0) == 0.0078125);
    REQUIRE(subcritical_bound(1.0, 1.0) == 0.0625);
    REQUIRE_THROWS_AS(subcritical_bound(0.0, 2.0), std::invalid_argument);
    REQUIRE_THROWS_AS(subcritical_bound(1.1, 2.0), std::invalid_argument);
    REQUIRE_THROWS_AS(subcritical_bound(0.5, 0.5), std::invalid_argument);
}

TEST_CASE("the estimated bound degenerates and reproduces across seeds") {
    // p_h = 0 gives chi exactly 1 and the pure closed form.
    const auto degenerate = subcritical_bound_mc(0.7, 0.0, 64, 100, 3);
    REQUIRE(degenerate.chi.chi_hat == 1.0);
    REQUIRE(degenerate.bound == subcritical_bound(0.7, 1.0));

    const auto a = subcritical_bound_mc(0.5, 0.2, 40'000, 1000, 1);
    const auto b = subcritical_bound_mc(0.5, 0.2, 40'000, 1000, 2);
    const double gap = std::abs(a.chi.chi_hat - b.chi.chi_hat);
    REQUIRE(gap < 4.0 * std::sqrt(chi_se(a.chi) * chi_se(a.chi) +
                                  chi_se(b.chi) * chi_se(b.chi)));
    REQUIRE(std::abs(a.bound - b.bound) < 0.1 * a.bound);
}

TEST_CASE("bad blocks are located inside their dyadic windows") {
    SECTION("an all-bad environment fills every window at its first slot") {
        LayeredEnv env(EnvParams{1.0, 0.9, 0.5, 0.3}, 12);
        const auto blocks = locate_bad_blocks(env, 8);
        REQUIRE(blocks.size() == 8);
        for (const auto& b : blocks) {
            REQUIRE(b.window_lo == (std::int64_t{1} << b.n));
            REQUIRE(b.window_hi == (std::int64_t{1} << (b.n + 1)) - b.n);
            REQUIRE_FALSE(b.degenerate);
            REQUIRE(b.found);
            REQUIRE(b.start == b.window_lo);
        }
    }

    SECTION("window arithmetic at delta one half") {
        LayeredEnv env(EnvParams{0.5, 0.9, 0.5, 0.3}, 1);
        const auto blocks = locate_bad_blocks(env, 3);
        REQUIRE(blocks[0].window_lo == 4);
        REQUIRE(blocks[0].window_hi == 15);
        REQUIRE(blocks[1].window_lo == 16);
        REQUIRE(blocks[1].window_hi == 62);
        REQUIRE(blocks[2].window_lo == 64);
        REQUIRE(blocks[2].window_hi == 253);
    }

    SECTION("found blocks really are runs of bad layers inside the window") {
        for (std::uint64_t seed : {5u, 6u, 7u}) {
            LayeredEnv env(EnvParams{0.5, 0.9, 0.5, 0.3}, seed);
            for (const auto& b : locate_bad_blocks(env, 6)) {
                if (!b.found) continue;
                REQUIRE(b.start >= b.window_lo);
                REQUIRE(b.start < b.window_hi);
                for (int k = 0; k < b.n; ++k)
                    REQUIRE(env.layer_type(b.start + k) == LayerType::Bad);
            }
        }
    }

    SECTION("at delta one half nearly every seed fills all six windows") {
        // Disjoint-slot counting gives miss probability at most
        // sum_n exp(-3 * 2^n / n), under 0.006 in total; scanning every
        // offset only helps.
        int all_found = 0;
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            LayeredEnv env(EnvParams{0.5, 0.9, 0.5, 0.3}, 1000 + seed);
            const auto blocks = locate_bad_blocks(env, 6);
            bool ok = true;
            for (const auto& b : blocks) ok = ok && b.found;
            all_found += ok ? 1 : 0;
        }
        REQUIRE(all_found >= 194);
    }

    SECTION("oversized windows are rejected before scanning") {
        LayeredEnv env(EnvParams{1.0, 0.9, 0.5, 0.3}, 1);
        REQUIRE_THROWS_AS(locate_bad_blocks(env, 27), std::invalid_argument);
        REQUIRE_THROWS_AS(locate_bad_blocks(env, 0), std::invalid_argument);
    }
}

TEST_CASE("block crossing probabilities hit their degenerate endpoints") {
    SECTION("closed vertical bonds never cross") {
        const auto est = block_crossing_prob(3, 0.5, 0.0, 0.3, 2, 1.0, 2000, 9);
        REQUIRE(est.successes == 0);
        REQUIRE(est.p_hat == 0.0);
        REQUIRE(est.entry_count == 13);
    }

    SECTION("open vertical bonds always cross") {
        const auto est = block_crossing_prob(4, 1.0, 1.0, 0.0, 0, 1.0, 500, 9);
        REQUIRE(est.successes == est.trials);
        REQUIRE(est.p_hat == 1.0);
        REQUIRE(est.entry_count == 1);
        REQUIRE(est.first_moment_bound == 256.0);  // (4 chi p_b)^n with chi = 1
    }

    SECTION("entry diamonds have the right cardinality") {
        for (int w : {0, 1, 2, 4}) {
            const auto est = block_crossing_prob(1, 1.0, 0.5, 0.0, w, 1.0, 2, 1);
            REQUIRE(est.entry_count == 2 * w * w + 2 * w + 1);
        }
    }

    SECTION("invalid inputs are rejected") {
        REQUIRE_THROWS_AS(block_crossing_prob(0, 0.5, 0.1, 0.1, 2, 1.0, 10),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(block_crossing_prob(2, 0.0, 0.1, 0.1, 2, 1.0, 10),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(block_crossing_prob(2, 0.5, 0.1, 0.1, 2, 0.5, 10),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(block_crossing_prob(2, 0.5, 0.1, 0.1, -1, 1.0, 10),
                          std::invalid_argument);
    }
}

TEST_CASE("block crossings decay geometrically in the bound regime") {
    const double delta = 0.5;
    const double p_h = 0.2;
    const auto chi = chi_estimate(p_h, 30'000, 1000, 21);
    const double p_b = 0.5 * subcritical_bound(delta, std::max(1.0, chi.chi_hat));

    std::vector<double> xs, ys, ws;
    std::int64_t trials = 10'000;
    for (int n = 1; n <= 3; ++n) {
        const auto est =
            block_crossing_prob(n, delta, p_b, p_h, 2, std::max(1.0, chi.chi_hat), trials,
                                400 + n);
        REQUIRE(est.condition < 1.0);
        // First-moment majorant, with generous slack for the Monte Carlo noise.
        REQUIRE(est.p_hat <= est.first_moment_bound + 4.0 * (est.hi - est.p_hat));
        if (est.successes >= 5) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(est.p_hat));
            ws.push_back(static_cast<double>(est.successes));
        }
        trials *= 8;  // deeper blocks need more attempts per success
    }
    REQUIRE(xs.size() >= 2);
    REQUIRE(weighted_slope(xs, ys, ws) < -1.0);
}

TEST_CASE("growth ratios respect the polylog envelope") {
    SECTION("the closed horizontal environment is pure counting") {
        const auto check = growth_ratio_check(0.0, 64, 1, 5, 8);
        REQUIRE(check.seeds.size() == 1);
        const auto& r = check.seeds.front();
        REQUIRE_FALSE(r.capped);
        REQUIRE(r.rn_ge_n);
        for (std::size_t n = 0; n < r.radii.size(); ++n)
            REQUIRE(r.radii[n] == static_cast<double>(n));
        const double ln8 = std::log(8.0);
        REQUIRE_THAT(r.max_tail_ratio, Catch::Matchers::WithinAbs(1.0 / (ln8 * ln8), 1e-12));
        REQUIRE(check.all_tail_below_one);
        REQUIRE(check.all_rn_ge_n);
    }

    SECTION("a sparse horizontal environment stays inside the envelope") {
        // The n ln^2 n envelope is asymptotic; at this density the radii
        // outrun it below n ~ 16, so the tail check starts at 24.
        const auto check = growth_ratio_check(0.3, 96, 3, 11, 24);
        REQUIRE(check.all_tail_below_one);
        REQUIRE(check.all_rn_ge_n);
        for (const auto& r : check.seeds) {
            REQUIRE_FALSE(r.capped);
            REQUIRE(r.max_tail_ratio < 1.0);
        }
    }

    SECTION("parameter validation") {
        REQUIRE_THROWS_AS(growth_ratio_check(0.5, 64, 1, 1), std::invalid_argument);
        REQUIRE_THROWS_AS(growth_ratio_check(0.2, 4, 1, 1, 8), std::invalid_argument);
        REQUIRE_THROWS_AS(growth_ratio_check(0.2, 64, 0, 1), std::invalid_argument);
        REQUIRE_THROWS_AS(growth_ratio_check(0.2, 64, 1, 1, 1), std::invalid_argument);
    }
}

TEST_CASE("the critical layer stack survives and is exactly monotone") {
    REQUIRE_THROWS_AS(critical_layers_experiment(0.0, {10}, 100), std::domain_error);
    REQUIRE_THROWS_AS(critical_layers_experiment(1.2, {10}, 100), std::domain_error);
    REQUIRE_THROWS_AS(critical_layers_experiment(0.3, {}, 100), std::invalid_argument);
    REQUIRE_THROWS_AS(critical_layers_experiment(0.3, {10, 10}, 100), std::invalid_argument);

    const auto res = critical_layers_experiment(0.3, {10, 20, 40}, 3000, 77);
    REQUIRE(res.levels.size() == 3);
    REQUIRE(res.nonincreasing);
    REQUIRE(res.final_p_hat == res.levels.back().p_hat);
    REQUIRE(res.levels.front().reached >= res.levels.back().reached);
    REQUIRE(res.final_p_hat > 0.05);
}

TEST_CASE("the vertical-only stack is dominated by the full lattice trial by trial") {
    // Shared site packing means both graphs read the same environment, and
    // one edge set contains the other.
    Z2ZPlusGraph stack;
    HexGraph hex{true};
    const EnvParams params{1.0, 0.2, 0.2, 0.5};
    const int N = 30;
    const std::int64_t trials = 1500;

    std::vector<TrialRecord> rec_stack, rec_hex;
    const auto s = survival_prob(stack, params, N, trials, 404, PercMode::Bond, {}, 1,
                                 &rec_stack);
    const auto h = survival_prob(hex, params, N, trials, 404, PercMode::Bond, {}, 1,
                                 &rec_hex);
    for (std::int64_t t = 0; t < trials; ++t) {
        const auto& a = rec_stack[static_cast<std::size_t>(t)];
        const auto& b = rec_hex[static_cast<std::size_t>(t)];
        REQUIRE(a.seed == b.seed);
        if (a.reached) REQUIRE(b.reached);
    }
    REQUIRE(h.reached >= s.reached);
    REQUIRE(s.reached > 0);
}
