// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "safehaul/bandit.hpp"
#include "safehaul/channel.hpp"
#include "safehaul/config.hpp"
#include "safehaul/engine.hpp"

using namespace safehaul;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void info(const std::string& text) {
    std::printf("  info: %s\n", text.c_str());
    std::fflush(stdout);
}

// Finished runs keyed by (variant label, algorithm, seed); several criteria share runs.
struct RunKey {
    std::string label;
    Algorithm algo;
    std::uint64_t seed;
    auto operator<=>(const RunKey&) const = default;
};

struct RunOutcome {
    RunSummary summary;
    InvariantCounters invariants;
    double seconds = 0.0;
};

std::map<RunKey, RunOutcome> cache;

const RunOutcome& run(const Variant& v, Algorithm algo, std::uint64_t seed) {
    const RunKey key{v.label, algo, seed};
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    RunConfig c = v.config;
    c.algo = algo;
    const auto t0 = Clock::now();
    Simulation sim(c, seed);
    sim.run();
    RunOutcome out{sim.summary(), sim.invariants(), seconds_since(t0)};
    out.summary.rows.clear();
    return cache.emplace(key, std::move(out)).first->second;
}

Variant variant(int scenario, const std::string& label) {
    for (Variant& v : scenario_variants(scenario, RunConfig{})) {
        if (v.label == label) return v;
    }
    throw std::invalid_argument("no variant " + label);
}

std::vector<double> uniform_samples(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform01(rng);
    return v;
}

void cvar_oracle() {
    const auto t0 = Clock::now();
    Rng rng = make_rng(2024, Stream::agent);
    auto v = uniform_samples(rng, 100000);
    std::sort(v.begin(), v.end(), std::greater<>());
    const double tail = estimate_cvar(v, 0.1);
    const double all = estimate_cvar(v, 1.0);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    const double secs = seconds_since(t0);
    const double rel = std::abs(all - mean) / mean;
    const bool ok = std::abs(tail - 0.95) <= 0.01 && rel <= 1e-12 && secs < 1.0;
    report("cvar_oracle", ok,
           fmt::format("CVaR_0.1 = {:.5f} (target 0.95 +- 0.01), CVaR_1 vs mean rel err {:.2e}, {:.3f} s", tail, rel,
                       secs));
}

void estimator_cross_check() {
    const auto t0 = Clock::now();
    Rng rng = make_rng(77, Stream::agent);
    std::size_t checks = 0, bad = 0;
    double worst = 0.0;
    for (int set = 0; set < 1000; ++set) {
        const std::size_t k = 1 + uniform_index(rng, 500);
        std::vector<double> v(k);
        const int shape = set % 4;
        for (auto& x : v) {
            const double u = uniform01(rng);
            switch (shape) {
                case 0: x = 30.0 * u; break;
                case 1: x = -std::log(1.0 - u); break;                 // exponential
                case 2: x = u < 0.9 ? 2.0 : 40.0; break;               // two-point
                default: x = std::floor(5.0 * u) + 0.5 * uniform01(rng);  // clustered
            }
        }
        std::vector<double> desc = v;
        std::sort(desc.begin(), desc.end(), std::greater<>());
        const double range = desc.front() - desc.back();
        for (double alpha : {0.05, 0.1, 0.5, 1.0}) {
            const double gap = std::abs(estimate_cvar(desc, alpha) - cvar_reference(v, alpha));
            const double bound = range / static_cast<double>(tail_count(k, alpha));
            // Rounding slack only; the bound is zero for constant sets.
            const double slack = 1e-12 * std::max(1.0, std::abs(desc.front()));
            ++checks;
            if (gap > bound + slack) ++bad;
            if (bound > 0.0) worst = std::max(worst, gap / bound);
        }
    }
    const double secs = seconds_since(t0);
    report("estimator_cross_check", bad == 0 && secs < 30.0,
           fmt::format("{} of {} checks outside range/ceil(alpha K), worst gap/bound {:.3f}, {:.2f} s", bad, checks,
                       worst, secs));
}

void risk_neutral_reduction() {
    RunConfig base;
    base.topology.n_nodes = 4;
    base.topology.n_donors = 1;
    base.traffic.n_ues = 8;
    base.traffic.rate_mbps = 40.0;
    base.learner.eta = 0.0;
    base.slots = 10000;
    auto trace_of = [&](Algorithm algo) {
        RunConfig c = base;
        c.algo = algo;
        Simulation sim(c, 1);
        std::vector<std::tuple<std::uint64_t, std::uint32_t, Action, Action, double>> trace;
        sim.set_action_trace([&](const ActionTrace& t) {
            trace.emplace_back(t.slot, index(t.node), t.proposed, t.executed, t.reward_ms);
        });
        sim.run();
        return std::make_pair(trace, sim.topology().size());
    };
    const auto [sh, nodes] = trace_of(Algorithm::safehaul);
    const auto [rn, nodes_rn] = trace_of(Algorithm::risk_neutral);
    std::size_t first_diff = sh.size();
    for (std::size_t i = 0; i < std::min(sh.size(), rn.size()); ++i) {
        const auto& [s1, n1, p1, e1, r1] = sh[i];
        const auto& [s2, n2, p2, e2, r2] = rn[i];
        if (s1 != s2 || n1 != n2 || p1 != p2 || e1 != e2 || std::memcmp(&r1, &r2, sizeof(double)) != 0) {
            first_diff = i;
            break;
        }
    }
    const bool ok = nodes == 5 && nodes_rn == 5 && sh.size() == rn.size() && first_diff == sh.size() && !sh.empty();
    report("risk_neutral_reduction", ok,
           fmt::format("{}-node topology, {} traced decisions each, first difference at {}", nodes, sh.size(),
                       first_diff == sh.size() ? std::string("none") : std::to_string(first_diff)));
}

std::vector<Variant> conservation_presets() {
    std::vector<Variant> out;
    for (int s : {1, 2, 3, 4}) {
        for (Variant& v : scenario_variants(s, RunConfig{})) {
            if (v.config.topology.n_nodes != 25) continue;  // network-size sweep: the 25-node point
            out.push_back(std::move(v));
        }
    }
    return out;
}

void conservation_suite() {
    const auto t0 = Clock::now();
    std::map<std::string, std::uint64_t> totals;
    std::size_t runs = 0;
    std::uint64_t other = 0;
    for (const Variant& v : conservation_presets()) {
        for (Algorithm algo : v.algos) {
            for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                const RunOutcome& r = run(v, algo, seed);
                ++runs;
                totals["conservation"] += r.invariants.conservation;
                totals["capacity"] += r.invariants.capacity;
                totals["half_duplex"] += r.invariants.half_duplex;
                totals["deadline"] += r.invariants.deadline;
                other += r.invariants.causality + r.invariants.path + r.invariants.reward_bound;
            }
        }
    }
    std::uint64_t sum = 0;
    std::string detail;
    for (const auto& [k, n] : totals) {
        sum += n;
        detail += fmt::format("{}={} ", k, n);
    }
    report("conservation_suite", sum == 0,
           fmt::format("{} runs (all presets at 25 nodes, 10^4 slots, seeds 1-5): {}({:.0f} s)", runs, detail,
                       seconds_since(t0)));
    info(fmt::format("causality, path and reward-bound violations over the same runs: {}", other));
}

// Synthetic instance: one IAB-node next to two donors. Path A (to the first
// donor) costs 6 ms every time; path B costs 2 ms w.p. 0.9 and 40 ms w.p. 0.1.
// Idle costs the node's queueing time (1 ms) plus its best mean path estimate.
struct SteeringCounts {
    std::size_t a = 0, b = 0, total = 0;
};

template <typename Agent>
SteeringCounts steer(Agent& agent, const ActionSet& set, std::uint64_t seed) {
    Rng env = make_rng(seed, Stream::traffic);
    const Action path_a = set.actions[0], path_b = set.actions[1];
    SteeringCounts c;
    for (std::uint64_t slot = 1; slot <= 10000; ++slot) {
        const Action act = agent.propose(set.actions, ProposalContext{});
        double r = 0.0;
        if (act == path_a) {
            r = 6.0;
        } else if (act == path_b) {
            r = uniform01(env) < 0.9 ? 2.0 : 40.0;
        } else {
            r = 1.0 + std::min(agent.mean_latency(path_a), agent.mean_latency(path_b));
        }
        agent.observe(act, r);
        if (slot >= 5000) {
            ++c.total;
            c.a += act == path_a;
            c.b += act == path_b;
        }
    }
    return c;
}

void risk_aversion_steering() {
    const Topology t({{node_id(0), {0.0, 0.0}, 15.0, NodeKind::iab_node, 512},
                      {node_id(1), {100.0, 0.0}, 15.0, NodeKind::iab_donor, 512},
                      {node_id(2), {-100.0, 0.0}, 15.0, NodeKind::iab_donor, 512}},
                     300.0);
    const ActionSet set = action_set(t, node_id(0));  // transmit(0,1), transmit(0,2), idle
    LearnerConfig cfg;
    cfg.alpha = 0.1;
    cfg.eta = 1.0;
    auto trial = [&](std::uint64_t seed) {
        SafehaulAgent sh(set, cfg, make_rng(seed, Stream::agent), make_rng(seed, Stream::reservoir));
        RiskNeutralAgent rn(set, cfg, make_rng(seed, Stream::agent));
        return std::make_pair(steer(sh, set, seed), steer(rn, set, seed));
    };
    const auto [sh, rn] = trial(1);
    const double sh_a = static_cast<double>(sh.a) / static_cast<double>(sh.total);
    const double rn_b = static_cast<double>(rn.b) / static_cast<double>(rn.total);
    report("risk_aversion_steering", sh_a >= 0.9 && rn_b >= 0.9,
           fmt::format("seed 1, slots 5000-10000: Safehaul on path A {:.1f}%, risk-neutral on path B {:.1f}% "
                       "(expected Q: A = 6 + 6 = 12, B = 5.8 + 40 = 45.8)",
                       100.0 * sh_a, 100.0 * rn_b));
    std::size_t sh_ok = 0, rn_ok = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto [s, r] = trial(seed);
        sh_ok += static_cast<double>(s.a) >= 0.9 * static_cast<double>(s.total);
        rn_ok += static_cast<double>(r.b) >= 0.9 * static_cast<double>(r.total);
    }
    info(fmt::format("seeds 1-20: Safehaul half holds on {}/20, risk-neutral half on {}/20", sh_ok, rn_ok));
}

double binomial_tail(int n, int k) {
    double p = 0.0;
    for (int i = k; i <= n; ++i) {
        double c = 1.0;
        for (int j = 0; j < i; ++j) c = c * static_cast<double>(n - j) / static_cast<double>(j + 1);
        p += c * std::pow(0.5, n);
    }
    return p;
}

void variance_reduction() {
    const auto t0 = Clock::now();
    const Variant v = variant(2, "s2_n25");
    int wins = 0;
    std::vector<double> sh_spreads, rn_spreads;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto& sh = run(v, Algorithm::safehaul, seed).summary;
        const auto& rn = run(v, Algorithm::risk_neutral, seed).summary;
        const double a = sh.latency ? sh.latency->spread() : NAN;
        const double b = rn.latency ? rn.latency->spread() : NAN;
        sh_spreads.push_back(a);
        rn_spreads.push_back(b);
        wins += a < b;  // ties and missing values count against Safehaul
    }
    const double p = binomial_tail(20, wins);
    const double secs = seconds_since(t0);
    const auto mean = [](const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); };
    report("variance_reduction", p < 0.05 && secs < 600.0,
           fmt::format("25 nodes, seeds 1-20: Safehaul spread lower on {}/20 seeds, sign-test p = {:.4f}; mean p90-p10 "
                       "{:.3f} ms vs {:.3f} ms ({:.0f} s)",
                       wins, p, mean(sh_spreads), mean(rn_spreads), secs));
}

double mean_latency_over_seeds(const Variant& v, std::uint64_t seeds) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        const auto& s = run(v, Algorithm::safehaul, seed).summary;
        if (s.mean_latency_ms) {
            sum += *s.mean_latency_ms;
            ++n;
        }
    }
    return n == seeds ? sum / static_cast<double>(n) : NAN;
}

void donor_scaling() {
    std::vector<double> lat;
    std::string detail;
    for (int d : {1, 2, 3, 5}) {
        lat.push_back(mean_latency_over_seeds(variant(3, fmt::format("s3_d{}", d)), 10));
        detail += fmt::format("D={}: {:.3f} ms  ", d, lat.back());
    }
    bool ok = lat.back() < lat.front();
    for (std::size_t i = 1; i < lat.size(); ++i) ok = ok && lat[i] <= lat[i - 1];
    report("donor_scaling", ok, detail + "(10 seeds)");
}

void risk_level_sweep() {
    const double low = mean_latency_over_seeds(variant(4, "s4_a0.1"), 10);
    const double high = mean_latency_over_seeds(variant(4, "s4_a0.7"), 10);
    report("risk_level_sweep", low <= high,
           fmt::format("alpha 0.1: {:.3f} ms, alpha 0.7: {:.3f} ms (10 seeds)", low, high));
}

void beamforming_checks() {
    const AntennaArray array;  // 8 x 8
    const Direction boresight{0.0, std::numbers::pi / 2};
    auto w = steering_vector(array, boresight);
    for (auto& c : w) c /= std::sqrt(static_cast<double>(w.size()));
    const double gain = beamforming_gain(w, array, boresight);
    const double pl = pathloss_db(100.0, 28.0, true);
    report("beamforming_checks", std::abs(gain - 64.0) <= 1e-9 && std::abs(pl - 103.34) <= 0.01,
           fmt::format("boresight gain {:.12f} (64), UMi LOS pathloss at 100 m / 28 GHz {:.4f} dB (103.34)", gain, pl));
}

std::string run_to_csv(const RunConfig& c, std::uint64_t seed, const std::filesystem::path& dir, double& secs) {
    const auto t0 = Clock::now();
    Simulation sim(c, seed);
    sim.run();
    secs = seconds_since(t0);
    write_outputs(sim.summary(), dir);
    std::ifstream in(dir / "metrics.csv", std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void performance_and_determinism() {
    const Variant v = variant(1, "s1");
    const auto root = std::filesystem::temp_directory_path() / "safehaul_acceptance";
    std::filesystem::remove_all(root);
    double first = 0.0, second = 0.0;
    const std::string a = run_to_csv(v.config, 3, root / "a", first);
    const std::string b = run_to_csv(v.config, 3, root / "b", second);
    std::filesystem::remove_all(root);
    const bool same = !a.empty() && a == b;
    report("performance_determinism", std::max(first, second) < 60.0 && same,
           fmt::format("25 nodes x 10^4 slots, 100 UEs at 80 Mbps: {:.2f} s and {:.2f} s single-threaded; "
                       "metrics.csv {} ({} bytes)",
                       first, second, same ? "byte-identical" : "differs", a.size()));
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    cvar_oracle();
    estimator_cross_check();
    risk_neutral_reduction();
    conservation_suite();
    risk_aversion_steering();
    variance_reduction();
    donor_scaling();
    risk_level_sweep();
    beamforming_checks();
    performance_and_determinism();
    std::printf("%d criteria failed, %.0f s total\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
