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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "safehaul/types.hpp"

namespace safehaul {

struct Candlestick {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double p10 = 0.0;
    double p90 = 0.0;

    double spread() const noexcept { return p90 - p10; }
};

/// Quantile with linear interpolation between order statistics at position
/// (n - 1) * p of the ascending sample.
double quantile(std::span<const double> sorted, double p);

/// Throws std::invalid_argument on empty input.
Candlestick candlestick(std::span<const double> samples);

using PairKey = std::pair<NodeId, NodeId>;  // (source, donor)

/// Mean of the values, or nullopt when there are none.
std::optional<double> system_average(const std::map<PairKey, double>& pair_averages);

/// One row of metrics.csv. Latency is the mean over (source, donor) pairs of
/// the pair's largest delivery latency in the slot, NaN without deliveries.
/// Drop rate is cumulative since the start of the run.
struct SlotRow {
    std::uint64_t slot = 0;
    double avg_latency_ms = 0.0;
    double throughput_mbps = 0.0;
    double drop_rate = 0.0;
    std::size_t conflicts = 0;
    std::size_t overrides = 0;
};

struct UeSummary {
    std::uint32_t ue = 0;
    NodeId attach{};
    std::optional<double> latency_ms;      // mean of per-slot maxima over slots with deliveries
    std::optional<double> pkt_latency_ms;  // mean over delivered packets
    double throughput_mbps = 0.0;
    double drop_rate = 0.0;
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
};

struct RunSummary {
    std::string algo;
    std::uint64_t seed = 0;
    std::size_t n_nodes = 0;
    std::size_t n_donors = 0;
    nlohmann::ordered_json config;

    std::vector<UeSummary> per_ue;
    std::optional<double> mean_latency_ms;
    std::optional<double> avg_pkt_latency_ms;
    double throughput_mbps = 0.0;
    double drop_rate = 0.0;
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t delivered_bits = 0;
    std::optional<Candlestick> latency;
    std::optional<Candlestick> throughput;
    std::optional<Candlestick> droprate;
    std::map<std::string, std::uint64_t> invariant_violations;

    std::vector<SlotRow> rows;
};

/// Per-run accumulators. Latency and throughput count only slots at or after
/// `window_start`; generation and drops count the whole run.
class Collector {
public:
    Collector(std::vector<NodeId> ue_attach, std::uint64_t window_start, double slot_ms);

    void record_generated(std::uint32_t ue, std::uint64_t count = 1);
    void record_drop(std::uint32_t ue);
    void record_delivery(std::uint32_t ue, NodeId source, NodeId donor, std::uint64_t slot, double latency_ms,
                         std::uint32_t bits);
    /// Closes the slot: folds per-slot maxima into the averages and appends a row.
    void end_slot(std::uint64_t slot, std::size_t conflicts, std::size_t overrides);

    const std::vector<SlotRow>& rows() const noexcept { return rows_; }
    std::uint64_t generated() const noexcept { return generated_; }
    std::uint64_t delivered() const noexcept { return delivered_; }
    std::uint64_t dropped() const noexcept { return dropped_; }
    std::uint64_t delivered_bits() const noexcept { return delivered_bits_total_; }

    /// Mean over in-window slots with deliveries of the pair's per-slot maximum.
    std::map<PairKey, double> pair_average() const;
    /// Fills everything except algo, seed, topology size, config and invariants.
    RunSummary summarize() const;

private:
    struct Running {
        double sum = 0.0;
        std::uint64_t slots = 0;
    };
    struct UeAcc {
        std::uint64_t generated = 0;
        std::uint64_t delivered = 0;
        std::uint64_t dropped = 0;
        std::uint64_t window_bits = 0;
        double pkt_latency_sum = 0.0;
        std::uint64_t pkt_count = 0;
        Running slot_max;
        double current_max = -1.0;
    };

    std::vector<NodeId> attach_;
    std::uint64_t window_start_;
    double slot_ms_;
    std::uint64_t first_slot_ = 0;
    std::uint64_t last_slot_ = 0;
    bool any_slot_ = false;

    std::vector<UeAcc> ues_;
    std::vector<std::uint32_t> touched_ues_;
    std::map<PairKey, Running> pairs_;
    std::map<PairKey, double> slot_pairs_;

    std::uint64_t generated_ = 0;
    std::uint64_t delivered_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t delivered_bits_total_ = 0;
    std::uint64_t window_bits_ = 0;
    std::uint64_t slot_bits_ = 0;
    std::vector<SlotRow> rows_;
};

inline constexpr const char* kMetricsCsvHeader =
    "slot,algo,n_nodes,n_donors,seed,avg_latency_ms,throughput_mbps,drop_rate,conflicts,overrides";

std::string metrics_csv(const RunSummary& summary);
nlohmann::ordered_json summary_json(const RunSummary& summary);

/// Writes metrics.csv and summary.json into `out_dir` (created if missing).
/// Failures raise std::runtime_error naming the path.
void write_outputs(const RunSummary& summary, const std::filesystem::path& out_dir);

/// Cross-seed aggregate of runs sharing one configuration.
nlohmann::ordered_json merge(std::span<const RunSummary> runs);

}  // namespace safehaul
