// Acceptance gate: ten end-to-end checks, one PASS/FAIL line each on
// stdout.  A check passes only if its assertions hold AND it finishes
// inside its wall-clock budget.  Exit code is the number of failures.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <percolab/percolab.hpp>

using namespace percolab;

namespace {

std::ostringstream why;

std::string run_binary(const std::string& args, int* rc) {
    const std::string cmd = std::string(PERCOLAB_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        *rc = -1;
        return {};
    }
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    *rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

double dist3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// 1: every site has 12 unit-distance neighbors split 4/4/4 into the fixed
// up, in-layer and down offset sets.
bool check_geometry() {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::int32_t> horiz(-100000, 100000);
    std::uniform_int_distribution<std::int32_t> vert(1, 4000);
    using Off = std::array<std::int32_t, 3>;
    const std::set<Off> want_up{{0, 0, 1}, {-1, 0, 1}, {0, -1, 1}, {-1, -1, 1}};
    const std::set<Off> want_h{{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}};
    const std::set<Off> want_down{{0, 0, -1}, {1, 0, -1}, {0, 1, -1}, {1, 1, -1}};

    for (int i = 0; i < 1000; ++i) {
        const SiteH v{horiz(rng), horiz(rng), vert(rng)};
        const auto cv = cartesian(v);
        std::set<Off> up, h, down;
        int count = 0;
        auto visit = [&](const SiteH& w, std::set<Off>& bucket) {
            if (std::abs(dist3(cartesian(w), cv) - 1.0) > 1e-12) return false;
            bucket.insert(Off{w.a1 - v.a1, w.a2 - v.a2, w.a3 - v.a3});
            ++count;
            return true;
        };
        for (const SiteH& w : neighbors_up(v))
            if (!visit(w, up)) return false;
        for (const SiteH& w : neighbors_horizontal(v))
            if (!visit(w, h)) return false;
        for (const SiteH& w : neighbors_down(v))
            if (!visit(w, down)) return false;
        if (count != 12 || up != want_up || h != want_h || down != want_down) {
            why << "offset sets differ at site " << i;
            return false;
        }
    }
    return true;
}

// 2: with all upward edges open and no horizontal ones, layer n of the
// origin cluster is a square of (n+1)^2 sites.
bool check_pyramid() {
    LayeredEnv env(EnvParams{0.0, 1.0, 0.0, 0.0}, 5);
    ExplorationBudget budget;
    budget.max_height = 50;
    const auto rep = explore(HexGraph{false}, env, SiteH{}, budget, PercMode::Bond);
    for (int n = 0; n <= 50; ++n) {
        const auto it = rep.per_layer_count.find(n);
        const std::int64_t want = static_cast<std::int64_t>(n + 1) * (n + 1);
        if (it == rep.per_layer_count.end() || it->second != want) {
            why << "layer " << n << " count off";
            return false;
        }
    }
    return rep.termination == Termination::HeightReached;
}

// 3: the unoriented square-lattice bond threshold, read from box
// crossings up to 256^2, lands on 1/2 within 0.01.
bool check_square_threshold() {
    const auto est =
        estimate_pc(UnorientedZ2{}, PercMode::Bond, {64, 128, 256}, 10000, 0.004, 2026);
    why << "p_hat " << est.p_hat;
    return std::abs(est.p_hat - 0.5) <= 0.010 && est.converged;
}

// 4: red-cluster size laws against exact boosted-Bernoulli enumeration on
// the 3-path (bond) and the 3-leaf star (site).
bool check_coupling_oracle() {
    const std::int64_t trials = 100000;
    double worst = 0.0;
    for (const double p : {0.2, 0.4, 0.6, 0.8}) {
        Star path{2};
        const double fb = f_red(p, path.max_degree());
        std::map<std::int64_t, double> law_bond{
            {1, (1 - fb) * (1 - fb)}, {2, 2 * fb * (1 - fb)}, {3, fb * fb}};
        Star star{3};
        const double fs = f_red(p, star.max_degree());
        std::map<std::int64_t, double> law_site;
        for (int k = 0; k <= 3; ++k)
            law_site[k + 1] = ((k == 0 || k == 3) ? 1.0 : 3.0) * std::pow(fs, k) *
                              std::pow(1 - fs, 3 - k);

        std::map<std::int64_t, double> sim_bond, sim_site;
        for (std::int64_t t = 0; t < trials; ++t) {
            const std::uint64_t seed = 900 + static_cast<std::uint64_t>(t);
            sim_bond[static_cast<std::int64_t>(
                run_coupling_bond(path, p, path.origin(), {}, seed).red.size())] +=
                1.0 / static_cast<double>(trials);
            sim_site[static_cast<std::int64_t>(
                run_coupling_site(star, p, star.origin(), {}, seed).red.size())] +=
                1.0 / static_cast<double>(trials);
        }
        auto tv = [](const std::map<std::int64_t, double>& a,
                     const std::map<std::int64_t, double>& b) {
            double d = 0.0;
            for (const auto& [k, v] : a) d += std::abs(v - (b.count(k) ? b.at(k) : 0.0));
            for (const auto& [k, v] : b)
                if (!a.count(k)) d += v;
            return d / 2.0;
        };
        worst = std::max({worst, tv(sim_bond, law_bond), tv(sim_site, law_site)});
    }
    why << "worst tv " << worst;
    return worst < 0.02;
}

// 5: more room strictly lowers the estimated threshold, with separated
// 95% intervals: 3d below 2d, and the stacked ladder below its base.
bool check_strict_inequalities() {
    const std::vector<int> levels{50, 200};
    const auto e2 =
        estimate_pc(OrientedZ<2>{}, PercMode::Bond, levels, 10000, 0.004, 71);
    const auto e3 =
        estimate_pc(OrientedZ<3>{}, PercMode::Bond, levels, 10000, 0.004, 72);
    const auto el = estimate_pc(Ladder<OrientedZ<2>>{OrientedZ<2>{}, 0}, PercMode::Bond,
                                levels, 10000, 0.004, 73);
    why << "2d " << e2.p_hat << " 3d " << e3.p_hat << " ladder " << el.p_hat;
    if (!(e3.p_hat < e2.p_hat && el.p_hat < e2.p_hat)) return false;
    return e3.ci_hi < e2.ci_lo && el.ci_hi < e2.ci_lo;
}

// 6: layer radii stay under n (ln n)^2 from n = 50 on and never fall
// below n, over 20 seeds and 300 layers.
bool check_growth() {
    const auto g = growth_ratio_check(0.3, 300, 20, 600, 50);
    for (const auto& s : g.seeds)
        if (s.capped) {
            why << "seed " << s.seed << " capped";
            return false;
        }
    return g.all_tail_below_one && g.all_rn_ge_n;
}

// 7: with p_b at half the closed-form bound, block-crossing probabilities
// over lengths 2..8 decay geometrically: weighted log-linear slope
// negative at 4 sigma.
bool check_block_decay() {
    const auto chi = chi_estimate(0.2, 100000, 1000, 31);
    const double chi_hat = std::max(1.0, chi.chi_hat);
    const double p_b = 0.5 * subcritical_bound(0.5, chi_hat);

    std::vector<double> xs, ys, ws;
    double prev_positive = 2.0;
    bool ordered = true;
    for (int n = 2; n <= 8; ++n) {
        std::int64_t trials = 300000;
        if (n == 3) trials = 1000000;
        if (n == 4) trials = 4000000;
        const auto est = block_crossing_prob(n, 0.5, p_b, 0.2, 2, chi_hat, trials,
                                             static_cast<std::uint64_t>(7000 + n));
        if (est.successes > 0) {
            if (est.p_hat > prev_positive) ordered = false;
            prev_positive = est.p_hat;
        }
        if (est.successes >= 5) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(est.p_hat));
            ws.push_back(est.p_hat * static_cast<double>(est.trials) / (1.0 - est.p_hat));
        }
    }
    if (xs.size() < 2 || !ordered) {
        why << "usable points " << xs.size();
        return false;
    }
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sw += ws[i];
        sx += ws[i] * xs[i];
        sy += ws[i] * ys[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += ws[i] * (xs[i] - mx) * (ys[i] - my);
        den += ws[i] * (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = num / den;
    const double z = slope / std::sqrt(1.0 / den);
    why << "slope " << slope << " z " << z;
    return z <= -4.0;
}

// 8: identical configs give byte-identical outputs at any thread count,
// and edge states do not depend on query order.
bool check_determinism() {
    int rc1 = 0, rc2 = 0;
    const std::string sweep_args =
        "sweep --graph oz2 --p-from 0.3 --p-to 0.7 --p-step 0.2 --N 30 --trials 300 --seed 12";
    const std::string a = run_binary(sweep_args + " --threads 1", &rc1);
    const std::string b = run_binary(sweep_args + " --threads 4", &rc2);
    if (rc1 != 0 || rc2 != 0 || a.empty() || a != b) {
        why << "thread-count outputs differ";
        return false;
    }
    const std::string pc_args = "pc --graph oz1 --levels 10 --trials 200 --tol 0.02 --seed 3";
    const std::string c = run_binary(pc_args, &rc1);
    const std::string d = run_binary(pc_args, &rc2);
    if (rc1 != 0 || rc2 != 0 || c.empty() || c != d) {
        why << "rerun outputs differ";
        return false;
    }

    LayeredEnv env(EnvParams{0.4, 0.8, 0.3, 0.25}, 99);
    std::vector<EdgeKey> keys;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100000; ++i)
        keys.push_back(make_edge_key(rng() >> 12, rng() >> 12,
                                     (i % 2) ? EdgeClass::Horizontal : EdgeClass::Upward,
                                     static_cast<std::uint16_t>(i % 5), i % 3 == 0));
    std::vector<char> first;
    first.reserve(keys.size());
    for (const auto& k : keys) first.push_back(env.open(k, 0.37) ? 1 : 0);
    std::vector<std::size_t> order(keys.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t i : order)
        if ((env.open(keys[i], 0.37) ? 1 : 0) != first[i]) {
            why << "edge state changed under reordering";
            return false;
        }
    return true;
}

// 9: on shared per-edge randomness the survival indicator is pointwise
// non-decreasing in p, seed by seed.
bool check_monotone_coupling() {
    const std::vector<double> grid{0.3, 0.45, 0.6, 0.75, 0.9};
    OrientedZ<2> g;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        int prev = 0;
        bool first = true;
        for (const double p : grid) {
            const auto s = survival_prob(g, EnvParams::uniform(p), 40, 1, seed);
            const int ind = s.reached > 0 ? 1 : 0;
            if (!first && ind < prev) {
                why << "seed " << seed << " dropped at p " << p;
                return false;
            }
            prev = ind;
            first = false;
        }
    }
    return true;
}

// 10: every layer bad at p_b = 0.2 over critical in-layer density still
// reaches height 200 in at least 1% of 10^4 trials.
bool check_critical_layers() {
    const auto r = critical_layers_experiment(0.2, {200}, 10000, 424, 0.5);
    why << "survival " << r.final_p_hat;
    return r.final_p_hat >= 0.01;
}

struct Criterion {
    const char* name;
    double budget_s;
    std::function<bool()> fn;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"C01 unit-neighbor geometry", 1.0, check_geometry},
        {"C02 pyramid layer counts", 1.0, check_pyramid},
        {"C03 square-lattice threshold", 600.0, check_square_threshold},
        {"C04 coupling law oracle", 60.0, check_coupling_oracle},
        {"C05 strict threshold ordering", 1800.0, check_strict_inequalities},
        {"C06 growth envelope", 300.0, check_growth},
        {"C07 block-crossing decay", 600.0, check_block_decay},
        {"C08 determinism", 60.0, check_determinism},
        {"C09 monotone coupling", 120.0, check_monotone_coupling},
        {"C10 critical layer survival", 900.0, check_critical_layers},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        why.str("");
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        std::string error;
        try {
            ok = c.fn();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs <= c.budget_s;
        const bool pass = ok && in_budget;
        char line[256];
        std::snprintf(line, sizeof line, "%s %s (%.1fs, budget %.0fs)", c.name,
                      pass ? "PASS" : "FAIL", secs, c.budget_s);
        std::cout << line << "\n" << std::flush;
        if (!pass) {
            ++failures;
            std::cerr << c.name << ": " << (error.empty() ? why.str() : error)
                      << (in_budget ? "" : " [over budget]") << "\n";
        }
    }
    return failures;
}
