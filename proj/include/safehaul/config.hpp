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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "safehaul/bandit.hpp"
#include "safehaul/channel.hpp"
#include "safehaul/consensus.hpp"
#include "safehaul/mac.hpp"
#include "safehaul/topology.hpp"

namespace safehaul {

enum class Algorithm : std::uint8_t { safehaul, risk_neutral, mlr };

std::string to_string(Algorithm algo);
/// Throws std::invalid_argument for an unknown name.
Algorithm parse_algorithm(const std::string& name);

struct TopologyConfig {
    std::string file;  // when set, replaces the generator
    std::size_t n_nodes = 25;
    std::size_t n_donors = 3;
    std::optional<double> area_m2;  // default keeps the node density of 223 nodes per 15 km^2
    double max_link_range_m = 300.0;
    double height_m = 15.0;
    std::size_t buffer_capacity = 512;
    int max_attempts = 100;

    double effective_area_m2() const { return area_m2.value_or(15e6 * static_cast<double>(n_nodes) / 223.0); }
    GeneratorParams generator() const;
};

struct TrafficConfig {
    std::size_t n_ues = 100;
    double rate_mbps = 80.0;
    std::uint32_t packet_bits = 12000;
    ArrivalProcess process = ArrivalProcess::cbr;
};

struct MacConfig {
    double t_max_ms = 30.0;
    double slot_ms = 0.125;
    std::uint32_t symbols_per_slot = 14;

    std::uint64_t deadline_slots() const;
};

struct RunConfig {
    Algorithm algo = Algorithm::safehaul;
    std::uint64_t slots = 10000;
    std::uint64_t n_seeds = 20;
    std::uint64_t first_seed = 1;
    TopologyConfig topology;
    ChannelConfig channel;
    LearnerConfig learner;
    PriorityWeights consensus;
    TrafficConfig traffic;
    MacConfig mac;
    double burn_in_fraction = 0.5;  // share of slots excluded from latency/throughput averages
    bool trace_events = false;
    bool trace_proposals = false;

    std::uint64_t window_start_slot() const;
};

/// Raised with every problem found, one per entry of `violations()`.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Overlays `j` onto `base`. Unknown keys and type mismatches are appended to
/// `problems` instead of throwing.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base, std::vector<std::string>& problems);

/// Effective configuration, defaults included.
nlohmann::ordered_json config_to_json(const RunConfig& config);

/// Range violations of a parsed configuration; empty when valid.
std::vector<std::string> validate(const RunConfig& config);

/// Parse problems followed by range violations of a config file.
std::vector<std::string> validate_file(const std::filesystem::path& path);

/// Parses and validates; throws ConfigError listing every violation.
RunConfig load_config(const std::filesystem::path& path);

/// One configuration of a scenario together with the algorithms it runs.
struct Variant {
    std::string label;
    RunConfig config;
    std::vector<Algorithm> algos;
};

/// Presets 1-4 layered on `base`:
///   1: 100 UEs at 80 Mbps, all algorithms
///   2: network size N in {25, 50, 75, 100, 200} with 2N UEs at 40 Mbps, all algorithms
///   3: donors D in {1, ..., 5}, 100 UEs at 40 Mbps, Safehaul
///   4: risk level alpha in {0.1, 0.3, 0.5, 0.7, 1.0} with eta = 1, 100 UEs at 20 Mbps, Safehaul
std::vector<Variant> scenario_variants(int scenario, const RunConfig& base);

}  // namespace safehaul
