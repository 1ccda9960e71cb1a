// Command-line frontend: reproducible experiments over the library with
// config files, deterministic seeding and machine-readable CSV/JSON output.
// Exit codes: 0 success or inconclusive verdict, 2 config error, 3
// non-convergence.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <percolab/percolab.hpp>

namespace {

using nlohmann::json;
using namespace percolab;

std::string g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// JSON writer that routes every double through %.17g; everything else is
// delegated to the library serializer (strings for escaping, exact
// integers, bools, null). Objects iterate in sorted key order.
void write_json(std::ostream& os, const json& j, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
    if (j.is_object()) {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad_in << json(it.key()).dump() << ": ";
            write_json(os, it.value(), depth + 1);
        }
        os << "\n" << pad << "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            os << "[]";
            return;
        }
        os << "[\n";
        bool first = true;
        for (const auto& v : j) {
            if (!first) os << ",\n";
            first = false;
            os << pad_in;
            write_json(os, v, depth + 1);
        }
        os << "\n" << pad << "]";
    } else if (j.is_number_float()) {
        os << g17(j.get<double>());
    } else {
        os << j.dump();
    }
}

std::string json_payload(const json& j) {
    std::ostringstream os;
    write_json(os, j, 0);
    os << "\n";
    return os.str();
}

// RFC 4180: quote fields containing separators or quotes, double inner
// quotes, CRLF record terminators.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << csv_field(fields[i]);
    }
    os << "\r\n";
}

void deliver(const std::string& out_path, const std::string& payload) {
    if (out_path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file '" + out_path + "'");
    f << payload;
}

// Flag > config-file value > default. Every merged key is also the
// whitelist for unknown-field detection.
struct ConfigMerge {
    const CLI::App& cmd;
    json cfg;
    std::set<std::string> allowed;

    ConfigMerge(const CLI::App& c, const std::string& path) : cmd(c) {
        if (path.empty()) return;
        std::ifstream f(path);
        if (!f) throw std::invalid_argument("cannot open config file '" + path + "'");
        try {
            f >> cfg;
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("config file is not valid JSON: ") +
                                        e.what());
        }
        if (!cfg.is_object())
            throw std::invalid_argument("config file must hold a JSON object");
    }

    template <class T>
    bool take(const std::string& flag, const std::string& key, T& val) {
        allowed.insert(key);
        if (cmd.count(flag) > 0) return true;
        if (!cfg.is_object() || !cfg.contains(key)) return false;
        try {
            val = cfg.at(key).get<T>();
        } catch (const json::exception&) {
            throw std::invalid_argument("config field '" + key + "' has the wrong type");
        }
        return true;
    }

    AnyGraph graph(const std::string& flag_value, const std::string& fallback = "") {
        allowed.insert("graph");
        if (cmd.count("--graph") > 0) return parse_graph(flag_value);
        if (cfg.is_object() && cfg.contains("graph")) {
            const json& g = cfg.at("graph");
            if (g.is_string()) return parse_graph(g.get<std::string>());
            return graph_from_json(g);
        }
        if (fallback.empty()) throw std::invalid_argument("--graph is required");
        return parse_graph(fallback);
    }

    void finish() const {
        if (!cfg.is_object()) return;
        for (auto it = cfg.begin(); it != cfg.end(); ++it)
            if (!allowed.count(it.key()))
                throw std::invalid_argument("unknown config field '" + it.key() + "'");
    }
};

PercMode parse_mode(const std::string& s) {
    if (s == "bond") return PercMode::Bond;
    if (s == "site") return PercMode::Site;
    throw std::invalid_argument("--mode must be 'bond' or 'site'");
}

void require_set(bool present, const char* flag) {
    if (!present)
        throw std::invalid_argument(std::string(flag) + " is required");
}

std::string graph_text(const AnyGraph& g) { return graph_to_json(g).dump(); }

json survival_json(const SurvivalEstimate& s) {
    return json{{"N", s.N},           {"trials", s.trials}, {"reached", s.reached},
                {"capped", s.capped}, {"p_hat", s.p_hat},   {"ci_lo", s.lo},
                {"ci_hi", s.hi}};
}

// Common per-command knobs.
struct Shared {
    std::string config_path;
    std::string out_path;
    std::string graph_flag;
    std::string mode_flag = "bond";
    std::uint64_t seed = 0;
    int threads = 0;

    void attach(CLI::App* cmd, bool with_graph, bool with_mode) {
        cmd->add_option("--config", config_path, "JSON config file; flags override it");
        cmd->add_option("--out", out_path, "write the primary output here instead of stdout");
        cmd->add_option("--seed", seed, "base seed; trial t uses seed + t");
        cmd->add_option("--threads", threads,
                        "worker threads (0 = all cores); results do not depend on it");
        if (with_graph)
            cmd->add_option("--graph", graph_flag, "graph shorthand or inline GraphSpec JSON");
        if (with_mode) cmd->add_option("--mode", mode_flag, "bond or site");
    }

    int resolve_threads(ConfigMerge& m) {
        m.take("--threads", "threads", threads);
        if (threads < 0) throw std::invalid_argument("--threads must be >= 0");
        if (threads == 0) {
            const unsigned hc = std::thread::hardware_concurrency();
            threads = hc == 0 ? 1 : static_cast<int>(hc);
        }
        return threads;
    }
};

// Environment assembly; p_g falls back to p_b so that all-bad setups do
// not have to spell out an unused good-layer parameter.
EnvParams resolve_env(ConfigMerge& m, double& delta, double& p_g, double& p_b, double& p_h) {
    const bool has_pg = m.take("--p-g", "p_g", p_g);
    m.take("--delta", "delta", delta);
    m.take("--p-b", "p_b", p_b);
    m.take("--p-h", "p_h", p_h);
    if (!has_pg) p_g = std::max(p_g, p_b);
    return EnvParams{delta, p_g, p_b, p_h};
}

json verdict_json(const std::string& check, json params, double statistic,
                  const json& threshold, const std::string& verdict) {
    return json{{"check", check},
                {"params", std::move(params)},
                {"statistic", statistic},
                {"threshold", threshold},
                {"verdict", verdict}};
}

json trace_to_json(const CouplingTrace& tr) {
    json steps = json::array();
    for (const auto& st : tr.steps) {
        const char* rule = st.rule == RedRule::Direct   ? "direct"
                           : st.rule == RedRule::Detour ? "detour"
                                                        : "none";
        steps.push_back(json{{"base_key", {st.base_key.a, st.base_key.b, st.base_key.c}},
                             {"tail", st.tail_code},
                             {"head", st.head_code},
                             {"h", st.anchor_height},
                             {"rule", rule},
                             {"copy", st.copy_index},
                             {"level_open", st.level_open},
                             {"copy_open", st.copy_open},
                             {"above_open", st.above_open}});
    }
    json red = json::array();
    for (const auto& [code, h] : tr.red) red.push_back(json{code, h});
    return json{{"site_mode", tr.site_mode},
                {"p", tr.p},
                {"p_vert", tr.p_vert},
                {"delta", tr.delta},
                {"seed", tr.seed},
                {"origin_code", tr.origin_code},
                {"explored", tr.explored},
                {"budget_capped", tr.budget_capped},
                {"red", red},
                {"steps", steps}};
}

CouplingTrace trace_from_json(const json& j) {
    try {
        CouplingTrace tr;
        tr.site_mode = j.at("site_mode").get<bool>();
        tr.p = j.at("p").get<double>();
        tr.p_vert = j.at("p_vert").get<double>();
        tr.delta = j.at("delta").get<std::int32_t>();
        tr.seed = j.at("seed").get<std::uint64_t>();
        tr.origin_code = j.at("origin_code").get<std::uint64_t>();
        tr.explored = j.at("explored").get<std::int64_t>();
        tr.budget_capped = j.at("budget_capped").get<bool>();
        for (const auto& r : j.at("red"))
            tr.red.emplace_back(r.at(0).get<std::uint64_t>(), r.at(1).get<std::int32_t>());
        for (const auto& s : j.at("steps")) {
            CouplingStep st;
            st.base_key = EdgeKey{s.at("base_key").at(0).get<std::uint64_t>(),
                                  s.at("base_key").at(1).get<std::uint64_t>(),
                                  s.at("base_key").at(2).get<std::uint64_t>()};
            st.tail_code = s.at("tail").get<std::uint64_t>();
            st.head_code = s.at("head").get<std::uint64_t>();
            st.anchor_height = s.at("h").get<std::int32_t>();
            const std::string rule = s.at("rule").get<std::string>();
            st.rule = rule == "direct"   ? RedRule::Direct
                      : rule == "detour" ? RedRule::Detour
                                         : RedRule::None;
            st.copy_index = s.at("copy").get<std::uint16_t>();
            st.level_open = s.at("level_open").get<bool>();
            st.copy_open = s.at("copy_open").get<bool>();
            st.above_open = s.at("above_open").get<bool>();
            tr.steps.push_back(st);
        }
        return tr;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed trace file: ") + e.what());
    }
}

// survive: survival table, one CSV row per requested level.
int cmd_survive(Shared& sh, ConfigMerge& m, std::vector<int>& levels, std::int64_t& trials,
                std::int64_t& max_sites, double& delta, double& p_g, double& p_b,
                double& p_h) {
    const bool has_graph = m.cmd.count("--graph") || (m.cfg.is_object() && m.cfg.contains("graph"));
    require_set(has_graph, "--graph");
    AnyGraph g = m.graph(sh.graph_flag);
    const EnvParams env = resolve_env(m, delta, p_g, p_b, p_h);
    m.take("--mode", "mode", sh.mode_flag);
    m.take("--N", "N_levels", levels);
    m.take("--trials", "trials", trials);
    m.take("--seed", "seed", sh.seed);
    m.take("--max-sites", "max_sites", max_sites);
    const int threads = sh.resolve_threads(m);
    m.finish();
    const PercMode mode = parse_mode(sh.mode_flag);
    if (levels.empty()) throw std::invalid_argument("--N is required");

    ExplorationBudget budget;
    budget.max_sites = max_sites;
    const std::string gtext = graph_text(g);

    std::ostringstream os;
    csv_row(os, {"graph", "mode", "delta", "p_g", "p_b", "p_h", "N", "trials", "seed",
                 "reached", "capped", "p_hat", "ci_lo", "ci_hi"});
    for (int N : levels) {
        const auto s = survival_prob_any(g, env, N, trials, sh.seed, mode, budget, threads);
        csv_row(os, {gtext, sh.mode_flag, g17(delta), g17(p_g), g17(p_b), g17(p_h),
                     std::to_string(N), std::to_string(s.trials), std::to_string(sh.seed),
                     std::to_string(s.reached), std::to_string(s.capped), g17(s.p_hat),
                     g17(s.lo), g17(s.hi)});
    }
    deliver(sh.out_path, os.str());
    return 0;
}

// pc: bisection estimate, JSON report, exit 3 when not converged.
int cmd_pc(Shared& sh, ConfigMerge& m, std::vector<int>& levels, std::int64_t& trials,
           double& tol, double& threshold, std::int64_t& max_sites) {
    const bool has_graph = m.cmd.count("--graph") || (m.cfg.is_object() && m.cfg.contains("graph"));
    require_set(has_graph, "--graph");
    AnyGraph g = m.graph(sh.graph_flag);
    m.take("--mode", "mode", sh.mode_flag);
    m.take("--levels", "levels", levels);
    m.take("--trials", "trials", trials);
    m.take("--tol", "tol", tol);
    m.take("--threshold", "threshold", threshold);
    m.take("--seed", "seed", sh.seed);
    m.take("--max-sites", "max_sites", max_sites);
    const int threads = sh.resolve_threads(m);
    m.finish();
    const PercMode mode = parse_mode(sh.mode_flag);

    ExplorationBudget budget;
    budget.max_sites = max_sites;
    const PcEstimate est =
        estimate_pc_any(g, mode, levels, trials, tol, sh.seed, threshold, budget, threads);

    json curve = json::array();
    for (const auto& pt : est.curve)
        curve.push_back(json{{"p", pt.p},
                             {"N", pt.N},
                             {"trials", pt.trials},
                             {"survivors", pt.survivors},
                             {"p_hat", pt.p_hat},
                             {"lo", pt.lo},
                             {"hi", pt.hi},
                             {"capped", pt.capped}});
    const json out{{"command", "pc"},
                   {"graph", graph_to_json(g)},
                   {"mode", sh.mode_flag},
                   {"levels", est.n_levels},
                   {"trials", est.trials_per_point},
                   {"tol", est.tol},
                   {"threshold", est.threshold},
                   {"seed", sh.seed},
                   {"p_hat", est.p_hat},
                   {"ci_lo", est.ci_lo},
                   {"ci_hi", est.ci_hi},
                   {"converged", est.converged},
                   {"curve", curve}};
    deliver(sh.out_path, json_payload(out));
    return est.converged ? 0 : 3;
}

int cmd_chi(Shared& sh, ConfigMerge& m, double& p_h, std::int64_t& trials, int& radius_cap) {
    const bool has_ph = m.take("--p-h", "p_h", p_h);
    require_set(has_ph, "--p-h");
    m.take("--trials", "trials", trials);
    m.take("--radius-cap", "radius_cap", radius_cap);
    m.take("--seed", "seed", sh.seed);
    const int threads = sh.resolve_threads(m);
    m.finish();

    const ChiEstimate est = chi_estimate(p_h, trials, radius_cap, sh.seed, threads);
    const json out{{"command", "chi"},    {"p_h", est.p_h},
                   {"trials", est.trials}, {"radius_cap", est.radius_cap},
                   {"seed", sh.seed},      {"chi_hat", est.chi_hat},
                   {"ci_lo", est.lo},      {"ci_hi", est.hi},
                   {"capped", est.capped}};
    deliver(sh.out_path, json_payload(out));
    return 0;
}

// coupling: one witnessed trace (optionally exported), the built-in exact
// oracle self-test, or re-verification of an exported trace.
int cmd_coupling(Shared& sh, ConfigMerge& m, double& p, std::int64_t& max_steps,
                 std::int64_t& max_red, std::string& trace_path, std::string& verify_path,
                 bool selftest, std::int64_t& trials) {
    m.take("--p", "p", p);
    m.take("--mode", "mode", sh.mode_flag);
    m.take("--seed", "seed", sh.seed);
    m.take("--trials", "trials", trials);
    m.take("--max-steps", "max_steps", max_steps);
    m.take("--max-red", "max_red", max_red);
    const PercMode mode = parse_mode(sh.mode_flag);

    if (!verify_path.empty()) {
        m.finish();
        std::ifstream f(verify_path);
        if (!f) throw std::invalid_argument("cannot open trace file '" + verify_path + "'");
        json j;
        try {
            f >> j;
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("trace file is not valid JSON: ") + e.what());
        }
        const VerifyResult v = verify_witness(trace_from_json(j));
        json out = verdict_json("coupling_witness", json{{"trace", verify_path}},
                                v.ok ? 1.0 : 0.0, 1.0, v.ok ? "pass" : "fail");
        if (!v.ok) {
            out["step"] = v.step;
            out["issue"] = v.issue;
        }
        deliver(sh.out_path, json_payload(out));
        return 0;
    }

    if (selftest) {
        m.finish();
        // Exact laws on the two smallest nontrivial bases: a path bond
        // cluster is origin plus two independent boosted edges, a star site
        // cluster is origin plus a binomial number of boosted leaves.
        const std::vector<double> grid{0.2, 0.4, 0.6, 0.8};
        double max_tv = 0.0;
        Star path{2};
        Star star{3};
        for (double pp : grid) {
            const double fb = f_red(pp, path.max_degree());
            std::map<std::int64_t, double> law_bond{{1, (1 - fb) * (1 - fb)},
                                                    {2, 2 * fb * (1 - fb)},
                                                    {3, fb * fb}};
            const double fs = f_red(pp, star.max_degree());
            std::map<std::int64_t, double> law_site;
            for (int k = 0; k <= 3; ++k) {
                const double binom = (k == 0 || k == 3) ? 1.0 : 3.0;
                law_site[k + 1] =
                    binom * std::pow(fs, k) * std::pow(1 - fs, 3 - k);
            }
            std::map<std::int64_t, double> sim_bond, sim_site;
            for (std::int64_t t = 0; t < trials; ++t) {
                const auto tb =
                    run_coupling_bond(path, pp, path.origin(), {}, sh.seed + static_cast<std::uint64_t>(t));
                sim_bond[static_cast<std::int64_t>(tb.red.size())] += 1.0 / static_cast<double>(trials);
                const auto ts =
                    run_coupling_site(star, pp, star.origin(), {}, sh.seed + static_cast<std::uint64_t>(t));
                sim_site[static_cast<std::int64_t>(ts.red.size())] += 1.0 / static_cast<double>(trials);
            }
            auto tv = [](const std::map<std::int64_t, double>& a,
                         const std::map<std::int64_t, double>& b) {
                double d = 0.0;
                for (const auto& [k, v] : a) d += std::abs(v - (b.count(k) ? b.at(k) : 0.0));
                for (const auto& [k, v] : b)
                    if (!a.count(k)) d += v;
                return d / 2.0;
            };
            max_tv = std::max(max_tv, tv(sim_bond, law_bond));
            max_tv = std::max(max_tv, tv(sim_site, law_site));
        }
        const json out = verdict_json(
            "coupling_oracle",
            json{{"trials", trials}, {"p_grid", grid}, {"seed", sh.seed}}, max_tv, 0.02,
            max_tv < 0.02 ? "pass" : "inconclusive");
        deliver(sh.out_path, json_payload(out));
        return 0;
    }

    const bool has_p = m.cmd.count("--p") || (m.cfg.is_object() && m.cfg.contains("p"));
    require_set(has_p, "--p");
    const bool has_graph = m.cmd.count("--graph") || (m.cfg.is_object() && m.cfg.contains("graph"));
    require_set(has_graph, "--graph");
    AnyGraph g = m.graph(sh.graph_flag);
    m.finish();

    CouplingBudget budget;
    budget.max_steps = max_steps;
    budget.max_red = max_red;
    const CouplingTrace tr = std::visit(
        [&](const auto& gg) {
            return mode == PercMode::Site
                       ? run_coupling_site(gg, p, gg.origin(), budget, sh.seed)
                       : run_coupling_bond(gg, p, gg.origin(), budget, sh.seed, -1.0);
        },
        g);
    const VerifyResult v = verify_witness(tr);
    if (!trace_path.empty()) {
        std::ofstream f(trace_path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot open trace file '" + trace_path + "'");
        f << json_payload(trace_to_json(tr));
    }
    const json out{{"command", "coupling"},
                   {"graph", graph_to_json(g)},
                   {"mode", sh.mode_flag},
                   {"p", tr.p},
                   {"f_red", f_red(tr.p, tr.delta)},
                   {"delta", tr.delta},
                   {"seed", tr.seed},
                   {"red_size", tr.red.size()},
                   {"explored", tr.explored},
                   {"budget_capped", tr.budget_capped},
                   {"verified", v.ok}};
    deliver(sh.out_path, json_payload(out));
    return 0;
}

int cmd_sweep(Shared& sh, ConfigMerge& m, double& p_from, double& p_to, double& p_step,
              std::vector<int>& levels, std::int64_t& trials, std::int64_t& max_sites) {
    const bool has_graph = m.cmd.count("--graph") || (m.cfg.is_object() && m.cfg.contains("graph"));
    require_set(has_graph, "--graph");
    AnyGraph g = m.graph(sh.graph_flag);
    m.take("--mode", "mode", sh.mode_flag);
    m.take("--p-from", "p_from", p_from);
    m.take("--p-to", "p_to", p_to);
    m.take("--p-step", "p_step", p_step);
    m.take("--N", "N_levels", levels);
    m.take("--trials", "trials", trials);
    m.take("--seed", "seed", sh.seed);
    m.take("--max-sites", "max_sites", max_sites);
    const int threads = sh.resolve_threads(m);
    m.finish();
    const PercMode mode = parse_mode(sh.mode_flag);
    if (!(p_step > 1e-12)) throw std::invalid_argument("--p-step must be positive");
    if (levels.empty()) throw std::invalid_argument("--N is required");

    ExplorationBudget budget;
    budget.max_sites = max_sites;
    const std::string gtext = graph_text(g);

    std::ostringstream os;
    csv_row(os, {"graph", "mode", "p", "N", "trials", "seed", "reached", "capped", "p_hat",
                 "ci_lo", "ci_hi"});
    for (int k = 0;; ++k) {
        double p = p_from + static_cast<double>(k) * p_step;
        if (p > p_to + 1e-9) break;
        p = std::round(p * 1e9) / 1e9;  // snap accumulated step error
        for (int N : levels) {
            const auto s =
                survival_prob_any(g, EnvParams::uniform(p), N, trials, sh.seed, mode, budget, threads);
            csv_row(os, {gtext, sh.mode_flag, g17(p), std::to_string(N),
                         std::to_string(s.trials), std::to_string(sh.seed),
                         std::to_string(s.reached), std::to_string(s.capped), g17(s.p_hat),
                         g17(s.lo), g17(s.hi)});
        }
    }
    deliver(sh.out_path, os.str());
    return 0;
}

int cmd_radii(Shared& sh, ConfigMerge& m, double& p_h, int& N, int& seeds, int& radius_cap) {
    AnyGraph g = m.graph(sh.graph_flag, "hex_h");
    const bool has_ph = m.take("--p-h", "p_h", p_h);
    require_set(has_ph, "--p-h");
    m.take("--N", "N", N);
    m.take("--seeds", "seeds", seeds);
    m.take("--radius-cap", "radius_cap", radius_cap);
    m.take("--seed", "seed", sh.seed);
    m.finish();
    if (seeds < 1) throw std::invalid_argument("--seeds must be >= 1");

    const EnvParams env_params{0.0, 1.0, 0.0, p_h};
    std::ostringstream os;
    csv_row(os, {"seed", "n", "radius", "completed", "capped", "died"});
    for (int s = 0; s < seeds; ++s) {
        const std::uint64_t seed = sh.seed + static_cast<std::uint64_t>(s);
        const RadiiReport rep = std::visit(
            [&](const auto& gg) -> RadiiReport {
                using G = std::decay_t<decltype(gg)>;
                if constexpr (HasLayerRadius<G>) {
                    LayeredEnv env(env_params, seed);
                    return layer_radii(gg, env, N, radius_cap);
                } else {
                    throw std::invalid_argument(
                        "--graph has no layer structure for radii");
                }
            },
            g);
        for (int n = 0; n < rep.completed; ++n)
            csv_row(os, {std::to_string(seed), std::to_string(n),
                         g17(rep.radius[static_cast<std::size_t>(n)]),
                         std::to_string(rep.completed), rep.capped ? "1" : "0",
                         rep.died ? "1" : "0"});
    }
    deliver(sh.out_path, os.str());
    return 0;
}

// bounds: one named checker per run, JSON verdict to stdout, raw series
// CSV via --out.
int cmd_bounds(Shared& sh, ConfigMerge& m, std::string& check, double& delta, double& p_h,
               double& p_b, std::vector<int>& ns, int& n_max, int& entry_width,
               int& entry_cap, std::int64_t& trials, int& radius_cap, int& N, int& seeds,
               int& n_min, std::vector<int>& levels) {
    m.take("--check", "check", check);
    m.take("--delta", "delta", delta);
    m.take("--p-h", "p_h", p_h);
    const bool has_pb = m.take("--p-b", "p_b", p_b) || m.cmd.count("--p-b") > 0;
    m.take("--n", "ns", ns);
    m.take("--n-max", "n_max", n_max);
    m.take("--entry-width", "entry_width", entry_width);
    m.take("--entry-cap", "entry_cap", entry_cap);
    m.take("--trials", "trials", trials);
    m.take("--radius-cap", "radius_cap", radius_cap);
    m.take("--N", "N", N);
    m.take("--seeds", "seeds", seeds);
    m.take("--n-min", "n_min", n_min);
    m.take("--levels", "levels", levels);
    m.take("--seed", "seed", sh.seed);
    const int threads = sh.resolve_threads(m);
    m.finish();

    const bool has_delta = m.cmd.count("--delta") || (m.cfg.is_object() && m.cfg.contains("delta"));
    const bool has_ph = m.cmd.count("--p-h") || (m.cfg.is_object() && m.cfg.contains("p_h"));

    if (check == "subcritical") {
        require_set(has_delta, "--delta");
        require_set(has_ph, "--p-h");
        const auto r = subcritical_bound_mc(delta, p_h, trials, radius_cap, sh.seed, threads);
        if (!sh.out_path.empty()) {
            std::ostringstream csv;
            csv_row(csv, {"delta", "p_h", "trials", "chi_hat", "chi_lo", "chi_hi", "bound"});
            csv_row(csv, {g17(delta), g17(p_h), std::to_string(trials), g17(r.chi.chi_hat),
                          g17(r.chi.lo), g17(r.chi.hi), g17(r.bound)});
            deliver(sh.out_path, csv.str());
        }
        json params{{"delta", delta},       {"p_h", p_h},
                    {"trials", trials},     {"radius_cap", radius_cap},
                    {"seed", sh.seed},      {"chi_hat", r.chi.chi_hat},
                    {"chi_lo", r.chi.lo},   {"chi_hi", r.chi.hi}};
        std::string verdict = "pass";
        json threshold;
        if (has_pb) {
            params["p_b"] = p_b;
            threshold = p_b;
            verdict = p_b < r.bound ? "pass" : "inconclusive";
        }
        std::cout << json_payload(verdict_json("subcritical_bound", params, r.bound,
                                               threshold, verdict));
        return 0;
    }

    if (check == "blocks") {
        require_set(has_delta, "--delta");
        LayeredEnv env(EnvParams{delta, 1.0, 0.0, 0.0}, sh.seed);
        const auto blocks = locate_bad_blocks(env, n_max);
        int found = 0;
        std::ostringstream csv;
        csv_row(csv, {"n", "window_lo", "window_hi", "start", "found"});
        json series = json::array();
        for (const auto& b : blocks) {
            found += b.found ? 1 : 0;
            csv_row(csv, {std::to_string(b.n), std::to_string(b.window_lo),
                          std::to_string(b.window_hi), std::to_string(b.start),
                          b.found ? "1" : "0"});
            series.push_back(json{{"n", b.n},
                                  {"window_lo", b.window_lo},
                                  {"window_hi", b.window_hi},
                                  {"start", b.start},
                                  {"found", b.found}});
        }
        if (!sh.out_path.empty()) deliver(sh.out_path, csv.str());
        json params{{"delta", delta}, {"n_max", n_max}, {"seed", sh.seed}, {"blocks", series}};
        std::cout << json_payload(verdict_json("bad_blocks", params, static_cast<double>(found),
                                               static_cast<double>(n_max),
                                               found == n_max ? "pass" : "inconclusive"));
        return 0;
    }

    if (check == "crossing") {
        require_set(has_delta, "--delta");
        require_set(has_ph, "--p-h");
        const auto chi = chi_estimate(p_h, std::max<std::int64_t>(trials, 2), radius_cap,
                                      sh.seed, threads);
        const double chi_hat = std::max(1.0, chi.chi_hat);
        if (!has_pb) p_b = 0.5 * subcritical_bound(delta, chi_hat);
        if (ns.empty()) ns = {2, 3, 4};

        std::ostringstream csv;
        csv_row(csv, {"n", "entry_width", "trials", "successes", "p_hat", "ci_lo", "ci_hi",
                      "first_moment_bound", "condition"});
        std::vector<double> xs, ys, ws;
        json series = json::array();
        for (int n : ns) {
            int w = entry_width;
            if (w < 0) {
                // Envelope width c_{n+1} (ln c_{n+1})^2, truncated to the cap.
                const double c = std::pow(2.0 / delta, n + 1);
                const double lnc = std::log(c);
                w = static_cast<int>(std::min<double>(entry_cap, std::floor(c * lnc * lnc)));
            }
            const auto est = block_crossing_prob(n, delta, p_b, p_h, w, chi_hat, trials,
                                                 sh.seed, 4'000'000, threads);
            csv_row(csv, {std::to_string(n), std::to_string(w), std::to_string(est.trials),
                          std::to_string(est.successes), g17(est.p_hat), g17(est.lo),
                          g17(est.hi), g17(est.first_moment_bound), g17(est.condition)});
            series.push_back(json{{"n", n},
                                  {"entry_width", w},
                                  {"successes", est.successes},
                                  {"p_hat", est.p_hat},
                                  {"first_moment_bound", est.first_moment_bound},
                                  {"condition", est.condition}});
            if (est.successes >= 5) {
                xs.push_back(static_cast<double>(n));
                ys.push_back(std::log(est.p_hat));
                // Delta-method weight for log of a binomial proportion.
                const double var = (1.0 - est.p_hat) /
                                   (est.p_hat * static_cast<double>(est.trials));
                ws.push_back(1.0 / var);
            }
        }
        if (!sh.out_path.empty()) deliver(sh.out_path, csv.str());

        double slope = 0.0, slope_z = 0.0;
        std::string verdict = "inconclusive";
        if (xs.size() >= 2) {
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
            slope = num / den;
            slope_z = slope / std::sqrt(1.0 / den);
            if (slope_z <= -4.0) verdict = "pass";
        }
        json params{{"delta", delta},   {"p_h", p_h},     {"p_b", p_b},
                    {"chi_hat", chi_hat}, {"trials", trials}, {"seed", sh.seed},
                    {"slope", slope},   {"series", series}};
        const json out = verdict_json("block_crossing_decay", params, slope_z, -4.0, verdict);
        std::cout << json_payload(out);
        return 0;
    }

    if (check == "growth") {
        require_set(has_ph, "--p-h");
        const auto g = growth_ratio_check(p_h, N, seeds, sh.seed, n_min, radius_cap, threads);
        double max_ratio = 0.0;
        std::ostringstream csv;
        csv_row(csv, {"seed", "n", "radius"});
        for (const auto& r : g.seeds) {
            max_ratio = std::max(max_ratio, r.max_tail_ratio);
            for (std::size_t n = 0; n < r.radii.size(); ++n)
                csv_row(csv, {std::to_string(r.seed), std::to_string(n), g17(r.radii[n])});
        }
        if (!sh.out_path.empty()) deliver(sh.out_path, csv.str());
        json params{{"p_h", p_h},       {"N", N},         {"seeds", seeds},
                    {"n_min", n_min},   {"seed", sh.seed}, {"all_rn_ge_n", g.all_rn_ge_n}};
        const std::string verdict =
            g.all_tail_below_one && g.all_rn_ge_n ? "pass" : "inconclusive";
        std::cout << json_payload(verdict_json("growth_envelope", params, max_ratio, 1.0,
                                               verdict));
        return 0;
    }

    if (check == "critical") {
        require_set(has_pb, "--p-b");
        if (levels.empty()) levels = {50, 100, 200};
        const auto r = critical_layers_experiment(p_b, levels, trials, sh.seed,
                                                  has_ph ? p_h : 0.5, {}, threads);
        std::ostringstream csv;
        csv_row(csv, {"N", "trials", "reached", "p_hat", "ci_lo", "ci_hi"});
        json series = json::array();
        for (const auto& lv : r.levels) {
            csv_row(csv, {std::to_string(lv.N), std::to_string(lv.trials),
                          std::to_string(lv.reached), g17(lv.p_hat), g17(lv.lo), g17(lv.hi)});
            series.push_back(survival_json(lv));
        }
        if (!sh.out_path.empty()) deliver(sh.out_path, csv.str());
        json params{{"p_b", r.p_b},   {"p_h", r.p_h},   {"trials", trials},
                    {"seed", sh.seed}, {"nonincreasing", r.nonincreasing}, {"series", series}};
        const std::string verdict =
            r.nonincreasing && r.final_p_hat >= 0.01 ? "pass" : "inconclusive";
        std::cout << json_payload(verdict_json("critical_layers", params, r.final_p_hat,
                                               0.01, verdict));
        return 0;
    }

    throw std::invalid_argument(
        "--check must be one of subcritical, blocks, crossing, growth, critical");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"percolation experiments on layered lattices"};
    app.require_subcommand(1);

    Shared sh_survive, sh_pc, sh_chi, sh_coupling, sh_sweep, sh_radii, sh_bounds;

    auto* survive = app.add_subcommand("survive", "survival-to-height table");
    sh_survive.attach(survive, true, true);
    std::vector<int> survive_levels;
    std::int64_t survive_trials = 1000;
    std::int64_t survive_max_sites = 4'000'000;
    double sv_delta = 0.0, sv_pg = 0.0, sv_pb = 0.0, sv_ph = 0.0;
    survive->add_option("--delta", sv_delta, "bad-layer density");
    survive->add_option("--p-g", sv_pg, "good-layer vertical probability");
    survive->add_option("--p-b", sv_pb, "bad-layer vertical probability");
    survive->add_option("--p-h", sv_ph, "horizontal probability");
    survive->add_option("--N", survive_levels, "target heights, one CSV row each");
    survive->add_option("--trials", survive_trials, "independent trials per level");
    survive->add_option("--max-sites", survive_max_sites, "per-trial site budget");

    auto* pc = app.add_subcommand("pc", "critical-parameter bisection estimate");
    sh_pc.attach(pc, true, true);
    std::vector<int> pc_levels{16, 32, 64};
    std::int64_t pc_trials = 2000;
    std::int64_t pc_max_sites = 4'000'000;
    double pc_tol = 0.005, pc_threshold = -1.0;
    pc->add_option("--levels", pc_levels, "increasing heights (or box sides)");
    pc->add_option("--trials", pc_trials, "trials per curve point at the last level");
    pc->add_option("--tol", pc_tol, "bracket width to bisect down to");
    pc->add_option("--threshold", pc_threshold,
                   "survival threshold (default: 1/2 box crossing, 0.05 heights)");
    pc->add_option("--max-sites", pc_max_sites, "per-trial site budget");

    auto* chi = app.add_subcommand("chi", "mean cluster size on the square lattice");
    sh_chi.attach(chi, false, false);
    double chi_ph = 0.0;
    std::int64_t chi_trials = 10'000;
    int chi_radius_cap = 1000;
    chi->add_option("--p-h", chi_ph, "edge probability, below 1/2");
    chi->add_option("--trials", chi_trials, "independent clusters");
    chi->add_option("--radius-cap", chi_radius_cap, "truncation radius");

    auto* coupling = app.add_subcommand("coupling", "ladder coupling traces and oracles");
    sh_coupling.attach(coupling, true, true);
    double cp_p = 0.0;
    std::int64_t cp_max_steps = 1'000'000, cp_max_red = 1'000'000, cp_trials = 20'000;
    std::string cp_trace, cp_verify;
    bool cp_selftest = false;
    coupling->add_option("--p", cp_p, "base parameter");
    coupling->add_option("--trials", cp_trials, "trials for --selftest");
    coupling->add_option("--max-steps", cp_max_steps, "step budget");
    coupling->add_option("--max-red", cp_max_red, "red-vertex budget");
    coupling->add_option("--trace", cp_trace, "export the full witnessed trace here");
    coupling->add_option("--verify", cp_verify, "re-verify an exported trace file");
    coupling->add_flag("--selftest", cp_selftest, "run the exact-law oracle comparison");

    auto* sweep = app.add_subcommand("sweep", "survival grid over p and N");
    sh_sweep.attach(sweep, true, true);
    double sw_from = 0.1, sw_to = 0.9, sw_step = 0.1;
    std::vector<int> sw_levels{50, 100};
    std::int64_t sw_trials = 1000, sw_max_sites = 4'000'000;
    sweep->add_option("--p-from", sw_from, "first p");
    sweep->add_option("--p-to", sw_to, "last p (inclusive)");
    sweep->add_option("--p-step", sw_step, "p increment");
    sweep->add_option("--N", sw_levels, "target heights");
    sweep->add_option("--trials", sw_trials, "trials per grid point");
    sweep->add_option("--max-sites", sw_max_sites, "per-trial site budget");

    auto* radii = app.add_subcommand("radii", "per-layer cluster radii series");
    sh_radii.attach(radii, true, false);
    double rd_ph = 0.0;
    int rd_N = 100, rd_seeds = 1, rd_radius_cap = (1 << 19) - 2;
    radii->add_option("--p-h", rd_ph, "horizontal probability, below 1/2");
    radii->add_option("--N", rd_N, "layers to grow");
    radii->add_option("--seeds", rd_seeds, "number of independent runs");
    radii->add_option("--radius-cap", rd_radius_cap, "abort radius");

    auto* bounds = app.add_subcommand("bounds", "decay, growth, and block certifiers");
    sh_bounds.attach(bounds, false, false);
    std::string bd_check;
    double bd_delta = 0.0, bd_ph = 0.0, bd_pb = 0.0;
    std::vector<int> bd_ns, bd_levels;
    int bd_nmax = 6, bd_entry_width = -1, bd_entry_cap = 8, bd_radius_cap = 1000;
    int bd_N = 120, bd_seeds = 5, bd_nmin = 8;
    std::int64_t bd_trials = 20'000;
    bounds->add_option("--check", bd_check,
                       "subcritical | blocks | crossing | growth | critical");
    bounds->add_option("--delta", bd_delta, "bad-layer density");
    bounds->add_option("--p-h", bd_ph, "horizontal probability");
    bounds->add_option("--p-b", bd_pb, "bad-layer vertical probability");
    bounds->add_option("--n", bd_ns, "block lengths for crossing");
    bounds->add_option("--n-max", bd_nmax, "deepest block window");
    bounds->add_option("--entry-width", bd_entry_width,
                       "entry diamond radius (default: envelope, capped)");
    bounds->add_option("--entry-cap", bd_entry_cap, "cap for the default entry width");
    bounds->add_option("--trials", bd_trials, "Monte Carlo trials");
    bounds->add_option("--radius-cap", bd_radius_cap, "chi truncation radius");
    bounds->add_option("--N", bd_N, "layers for growth");
    bounds->add_option("--seeds", bd_seeds, "seeds for growth");
    bounds->add_option("--n-min", bd_nmin, "first layer checked against the envelope");
    bounds->add_option("--levels", bd_levels, "survival levels for critical");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const auto started = std::chrono::steady_clock::now();
    int rc = 0;
    try {
        if (app.got_subcommand(survive)) {
            ConfigMerge m(*survive, sh_survive.config_path);
            rc = cmd_survive(sh_survive, m, survive_levels, survive_trials, survive_max_sites,
                             sv_delta, sv_pg, sv_pb, sv_ph);
        } else if (app.got_subcommand(pc)) {
            ConfigMerge m(*pc, sh_pc.config_path);
            rc = cmd_pc(sh_pc, m, pc_levels, pc_trials, pc_tol, pc_threshold, pc_max_sites);
        } else if (app.got_subcommand(chi)) {
            ConfigMerge m(*chi, sh_chi.config_path);
            rc = cmd_chi(sh_chi, m, chi_ph, chi_trials, chi_radius_cap);
        } else if (app.got_subcommand(coupling)) {
            ConfigMerge m(*coupling, sh_coupling.config_path);
            rc = cmd_coupling(sh_coupling, m, cp_p, cp_max_steps, cp_max_red, cp_trace,
                              cp_verify, cp_selftest, cp_trials);
        } else if (app.got_subcommand(sweep)) {
            ConfigMerge m(*sweep, sh_sweep.config_path);
            rc = cmd_sweep(sh_sweep, m, sw_from, sw_to, sw_step, sw_levels, sw_trials,
                           sw_max_sites);
        } else if (app.got_subcommand(radii)) {
            ConfigMerge m(*radii, sh_radii.config_path);
            rc = cmd_radii(sh_radii, m, rd_ph, rd_N, rd_seeds, rd_radius_cap);
        } else if (app.got_subcommand(bounds)) {
            ConfigMerge m(*bounds, sh_bounds.config_path);
            rc = cmd_bounds(sh_bounds, m, bd_check, bd_delta, bd_ph, bd_pb, bd_ns, bd_nmax,
                            bd_entry_width, bd_entry_cap, bd_trials, bd_radius_cap, bd_N,
                            bd_seeds, bd_nmin, bd_levels);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    std::cerr << "elapsed_ms " << elapsed.count() << "\n";
    return rc;
}
