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

#include "safehaul/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace safehaul {

std::string to_string(Algorithm algo) {
    switch (algo) {
        case Algorithm::safehaul: return "safehaul";
        case Algorithm::risk_neutral: return "risk_neutral";
        case Algorithm::mlr: return "mlr";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "safehaul") return Algorithm::safehaul;
    if (name == "risk_neutral") return Algorithm::risk_neutral;
    if (name == "mlr") return Algorithm::mlr;
    throw std::invalid_argument(fmt::format("unknown algorithm '{}' (expected safehaul, risk_neutral or mlr)", name));
}

GeneratorParams TopologyConfig::generator() const {
    GeneratorParams g;
    g.n_nodes = n_nodes;
    g.n_donors = n_donors;
    g.area_m2 = effective_area_m2();
    g.max_link_range_m = max_link_range_m;
    g.height_m = height_m;
    g.buffer_capacity = buffer_capacity;
    g.max_attempts = max_attempts;
    return g;
}

std::uint64_t MacConfig::deadline_slots() const {
    return static_cast<std::uint64_t>(std::llround(t_max_ms / slot_ms));
}

std::uint64_t RunConfig::window_start_slot() const {
    return 1 + static_cast<std::uint64_t>(std::floor(static_cast<double>(slots) * burn_in_fraction));
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& v : violations) msg += "\n  - " + v;
          return msg;
      }()),
      violations_(std::move(violations)) {}

namespace {

/// Reads known keys of one JSON object and reports everything else.
class Section {
public:
    Section(const nlohmann::json& j, std::string path, std::vector<std::string>& problems)
        : j_(j), path_(std::move(path)), problems_(problems) {
        if (!j_.is_object()) problems_.push_back(fmt::format("{} must be an object", where()));
    }
    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    ~Section() {
        if (!j_.is_object()) return;
        for (const auto& [key, value] : j_.items()) {
            if (!known_.contains(key)) problems_.push_back(fmt::format("unknown key '{}'", qualified(key)));
        }
    }

    const nlohmann::json* find(const std::string& key) {
        known_.insert(key);
        if (!j_.is_object()) return nullptr;
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void read(const std::string& key, double& out) {
        if (auto* v = find(key)) {
            if (v->is_number()) out = v->get<double>();
            else mismatch(key, "a number");
        }
    }
    void read(const std::string& key, std::optional<double>& out) {
        if (auto* v = find(key)) {
            if (v->is_null()) out.reset();
            else if (v->is_number()) out = v->get<double>();
            else mismatch(key, "a number or null");
        }
    }
    void read(const std::string& key, bool& out) {
        if (auto* v = find(key)) {
            if (v->is_boolean()) out = v->get<bool>();
            else mismatch(key, "a boolean");
        }
    }
    void read(const std::string& key, std::string& out) {
        if (auto* v = find(key)) {
            if (v->is_string()) out = v->get<std::string>();
            else mismatch(key, "a string");
        }
    }
    template <typename Int>
        requires std::is_integral_v<Int>
    void read(const std::string& key, Int& out) {
        if (auto* v = find(key)) {
            if (!v->is_number_integer()) return mismatch(key, "an integer");
            const auto x = v->get<std::int64_t>();
            if (std::is_unsigned_v<Int> && x < 0) return mismatch(key, "a non-negative integer");
            out = static_cast<Int>(x);
        }
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "configuration" : "'" + path_ + "'"; }
    void mismatch(const std::string& key, const char* expected) {
        problems_.push_back(fmt::format("'{}' must be {}", qualified(key), expected));
    }

    const nlohmann::json& j_;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> known_;
};

template <typename Fn>
void with_section(Section& parent, const std::string& key, std::vector<std::string>& problems, Fn&& fn) {
    if (auto* v = parent.find(key)) {
        Section s(*v, parent.qualified(key), problems);
        fn(s);
    }
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j, RunConfig c, std::vector<std::string>& problems) {
    Section root(j, "", problems);
    std::string algo = to_string(c.algo);
    root.read("algo", algo);
    try {
        c.algo = parse_algorithm(algo);
    } catch (const std::invalid_argument& e) {
        problems.push_back(e.what());
    }
    root.read("slots", c.slots);
    root.read("seeds", c.n_seeds);
    root.read("first_seed", c.first_seed);
    root.read("burn_in_fraction", c.burn_in_fraction);

    with_section(root, "topology", problems, [&](Section& s) {
        auto& t = c.topology;
        s.read("file", t.file);
        s.read("n_nodes", t.n_nodes);
        s.read("n_donors", t.n_donors);
        s.read("area_m2", t.area_m2);
        s.read("max_link_range_m", t.max_link_range_m);
        s.read("height_m", t.height_m);
        s.read("buffer_capacity", t.buffer_capacity);
        s.read("max_attempts", t.max_attempts);
    });
    with_section(root, "channel", problems, [&](Section& s) {
        auto& ch = c.channel;
        s.read("carrier_ghz", ch.carrier_ghz);
        s.read("bandwidth_hz", ch.bandwidth_hz);
        s.read("noise_figure_db", ch.noise_figure_db);
        s.read("tx_power_dbm", ch.tx_power_dbm);
        s.read("shadowing", ch.shadowing);
        s.read("p_block", ch.blockage.p_block);
        s.read("p_recover", ch.blockage.p_recover);
        s.read("array_h", ch.array.n_h);
        s.read("array_v", ch.array.n_v);
        s.read("element_spacing", ch.array.spacing);
        s.read("antenna_gain_db", ch.array.gain_db);
        s.read("wide_az", ch.wide_az);
        s.read("wide_el", ch.wide_el);
        s.read("narrow_az", ch.narrow_az);
        s.read("narrow_el", ch.narrow_el);
        s.read("sector_az_deg", ch.sector_az_deg);
        s.read("sector_el_deg", ch.sector_el_deg);
        s.read("backhaul_symbol_fraction", ch.backhaul_symbol_fraction);
    });
    with_section(root, "learner", problems, [&](Section& s) {
        auto& l = c.learner;
        s.read("alpha", l.alpha);
        s.read("eta", l.eta);
        s.read("epsilon0", l.epsilon0);
        s.read("epsilon_decay", l.epsilon_decay);
        s.read("history_cap", l.history_cap);
    });
    with_section(root, "consensus", problems, [&](Section& s) {
        s.read("w_queueing", c.consensus.queueing);
        s.read("w_load", c.consensus.load);
    });
    with_section(root, "traffic", problems, [&](Section& s) {
        auto& t = c.traffic;
        s.read("n_ues", t.n_ues);
        s.read("rate_mbps", t.rate_mbps);
        s.read("packet_bits", t.packet_bits);
        std::string process = t.process == ArrivalProcess::cbr ? "cbr" : "poisson";
        s.read("process", process);
        if (process == "cbr") t.process = ArrivalProcess::cbr;
        else if (process == "poisson") t.process = ArrivalProcess::poisson;
        else problems.push_back(fmt::format("'traffic.process' must be \"cbr\" or \"poisson\", got \"{}\"", process));
    });
    with_section(root, "mac", problems, [&](Section& s) {
        s.read("t_max_ms", c.mac.t_max_ms);
        s.read("slot_ms", c.mac.slot_ms);
        s.read("symbols_per_slot", c.mac.symbols_per_slot);
    });
    with_section(root, "trace", problems, [&](Section& s) {
        s.read("events", c.trace_events);
        s.read("proposals", c.trace_proposals);
    });
    return c;
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["algo"] = to_string(c.algo);
    j["slots"] = c.slots;
    j["seeds"] = c.n_seeds;
    j["first_seed"] = c.first_seed;
    j["burn_in_fraction"] = c.burn_in_fraction;
    j["topology"] = {{"file", c.topology.file},
                     {"n_nodes", c.topology.n_nodes},
                     {"n_donors", c.topology.n_donors},
                     {"area_m2", c.topology.effective_area_m2()},
                     {"max_link_range_m", c.topology.max_link_range_m},
                     {"height_m", c.topology.height_m},
                     {"buffer_capacity", c.topology.buffer_capacity},
                     {"max_attempts", c.topology.max_attempts}};
    const auto& ch = c.channel;
    j["channel"] = {{"carrier_ghz", ch.carrier_ghz},
                    {"bandwidth_hz", ch.bandwidth_hz},
                    {"noise_figure_db", ch.noise_figure_db},
                    {"tx_power_dbm", ch.tx_power_dbm},
                    {"shadowing", ch.shadowing},
                    {"p_block", ch.blockage.p_block},
                    {"p_recover", ch.blockage.p_recover},
                    {"array_h", ch.array.n_h},
                    {"array_v", ch.array.n_v},
                    {"element_spacing", ch.array.spacing},
                    {"antenna_gain_db", ch.array.gain_db},
                    {"wide_az", ch.wide_az},
                    {"wide_el", ch.wide_el},
                    {"narrow_az", ch.narrow_az},
                    {"narrow_el", ch.narrow_el},
                    {"sector_az_deg", ch.sector_az_deg},
                    {"sector_el_deg", ch.sector_el_deg},
                    {"backhaul_symbol_fraction", ch.backhaul_symbol_fraction}};
    j["learner"] = {{"alpha", c.learner.alpha},
                    {"eta", c.learner.eta},
                    {"epsilon0", c.learner.epsilon0},
                    {"epsilon_decay", c.learner.epsilon_decay},
                    {"history_cap", c.learner.history_cap}};
    j["consensus"] = {{"w_queueing", c.consensus.queueing}, {"w_load", c.consensus.load}};
    j["traffic"] = {{"n_ues", c.traffic.n_ues},
                    {"rate_mbps", c.traffic.rate_mbps},
                    {"packet_bits", c.traffic.packet_bits},
                    {"process", c.traffic.process == ArrivalProcess::cbr ? "cbr" : "poisson"}};
    j["mac"] = {{"t_max_ms", c.mac.t_max_ms}, {"slot_ms", c.mac.slot_ms}, {"symbols_per_slot", c.mac.symbols_per_slot}};
    j["trace"] = {{"events", c.trace_events}, {"proposals", c.trace_proposals}};
    return j;
}

std::vector<std::string> validate(const RunConfig& c) {
    std::vector<std::string> v = c.learner.violations();
    auto need = [&](bool ok, std::string msg) {
        if (!ok) v.push_back(std::move(msg));
    };
    need(c.slots >= 1, "slots must be at least 1");
    need(c.n_seeds >= 1, "seeds must be at least 1");
    need(c.burn_in_fraction >= 0.0 && c.burn_in_fraction < 1.0,
         fmt::format("burn_in_fraction = {} must lie in [0, 1)", c.burn_in_fraction));

    const auto& t = c.topology;
    if (t.file.empty()) {
        need(t.n_nodes >= 1, "topology.n_nodes must be at least 1");
        need(t.n_donors >= 1, "topology.n_donors must be at least 1");
        need(t.effective_area_m2() > 0.0, fmt::format("topology.area_m2 = {} must be positive", t.effective_area_m2()));
        need(t.max_link_range_m > 0.0, "topology.max_link_range_m must be positive");
        need(t.height_m > 0.0, "topology.height_m must be positive");
        need(t.buffer_capacity >= 1, "topology.buffer_capacity must be positive");
        need(t.max_attempts >= 1, "topology.max_attempts must be at least 1");
    }

    const auto& ch = c.channel;
    need(ch.carrier_ghz > 0.0, "channel.carrier_ghz must be positive");
    need(ch.bandwidth_hz > 0.0, "channel.bandwidth_hz must be positive");
    need(std::isfinite(ch.noise_figure_db), "channel.noise_figure_db must be finite");
    need(std::isfinite(ch.tx_power_dbm), "channel.tx_power_dbm must be finite");
    need(ch.blockage.p_block >= 0.0 && ch.blockage.p_block <= 1.0, "channel.p_block must lie in [0, 1]");
    need(ch.blockage.p_recover >= 0.0 && ch.blockage.p_recover <= 1.0, "channel.p_recover must lie in [0, 1]");
    need(ch.array.n_h >= 1 && ch.array.n_v >= 1, "channel.array_h and channel.array_v must be at least 1");
    need(ch.array.spacing > 0.0, "channel.element_spacing must be positive");
    need(ch.wide_az >= 1 && ch.wide_el >= 1 && ch.narrow_az >= 1 && ch.narrow_el >= 1,
         "codebook sizes must be at least 1");
    need(ch.wide_az * ch.wide_el < ch.narrow_az * ch.narrow_el, "the wide codebook must have fewer beams than the narrow one");
    need(ch.sector_az_deg > 0.0 && ch.sector_az_deg <= 180.0, "channel.sector_az_deg must lie in (0, 180]");
    need(ch.sector_el_deg >= 0.0 && ch.sector_el_deg <= 180.0, "channel.sector_el_deg must lie in [0, 180]");
    need(ch.backhaul_symbol_fraction > 0.0 && ch.backhaul_symbol_fraction <= 1.0,
         "channel.backhaul_symbol_fraction must lie in (0, 1]");

    need(c.consensus.queueing >= 0.0 && c.consensus.load >= 0.0, "consensus weights must be non-negative");
    need(c.traffic.rate_mbps >= 0.0 && std::isfinite(c.traffic.rate_mbps), "traffic.rate_mbps must be non-negative");
    need(c.traffic.packet_bits >= 1, "traffic.packet_bits must be positive");
    need(c.mac.slot_ms > 0.0, "mac.slot_ms must be positive");
    need(c.mac.t_max_ms > 0.0, "mac.t_max_ms must be positive");
    need(c.mac.symbols_per_slot >= 1, "mac.symbols_per_slot must be positive");
    if (c.mac.slot_ms > 0.0 && c.mac.t_max_ms > 0.0) {
        need(c.mac.deadline_slots() >= 1, "mac.t_max_ms must span at least one slot");
    }
    return v;
}

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open config {}", path.string()));
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace

std::vector<std::string> validate_file(const std::filesystem::path& path) {
    std::vector<std::string> problems;
    const RunConfig c = config_from_json(read_json(path), RunConfig{}, problems);
    for (auto& v : validate(c)) problems.push_back(std::move(v));
    return problems;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::vector<std::string> problems;
    RunConfig c = config_from_json(read_json(path), RunConfig{}, problems);
    for (auto& v : validate(c)) problems.push_back(std::move(v));
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return c;
}

std::vector<Variant> scenario_variants(int scenario, const RunConfig& base) {
    const std::vector<Algorithm> all{Algorithm::safehaul, Algorithm::risk_neutral, Algorithm::mlr};
    std::vector<Variant> out;
    switch (scenario) {
        case 1: {
            RunConfig c = base;
            c.traffic.n_ues = 100;
            c.traffic.rate_mbps = 80.0;
            out.push_back({"s1", c, all});
            break;
        }
        case 2:
            for (std::size_t n : {25, 50, 75, 100, 200}) {
                RunConfig c = base;
                c.topology.n_nodes = n;
                c.topology.area_m2.reset();
                c.traffic.n_ues = 2 * n;
                c.traffic.rate_mbps = 40.0;
                out.push_back({fmt::format("s2_n{}", n), c, all});
            }
            break;
        case 3:
            for (std::size_t d = 1; d <= 5; ++d) {
                RunConfig c = base;
                c.topology.n_donors = d;
                c.traffic.n_ues = 100;
                c.traffic.rate_mbps = 40.0;
                out.push_back({fmt::format("s3_d{}", d), c, {Algorithm::safehaul}});
            }
            break;
        case 4:
            for (double a : {0.1, 0.3, 0.5, 0.7, 1.0}) {
                RunConfig c = base;
                c.learner.alpha = a;
                c.learner.eta = 1.0;
                c.traffic.n_ues = 100;
                c.traffic.rate_mbps = 20.0;
                out.push_back({fmt::format("s4_a{}", a), c, {Algorithm::safehaul}});
            }
            break;
        default:
            throw std::invalid_argument(fmt::format("unknown scenario {} (expected 1-4)", scenario));
    }
    return out;
}

}  // namespace safehaul
