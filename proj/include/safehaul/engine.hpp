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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "safehaul/agent.hpp"
#include "safehaul/channel.hpp"
#include "safehaul/config.hpp"
#include "safehaul/consensus.hpp"
#include "safehaul/mac.hpp"
#include "safehaul/metrics.hpp"
#include "safehaul/topology.hpp"

namespace safehaul {

/// Runtime assertion failures, counted per rule.
struct InvariantCounters {
    std::uint64_t conservation = 0;  // generated == delivered + dropped + buffered
    std::uint64_t capacity = 0;      // no buffer above its capacity
    std::uint64_t half_duplex = 0;   // at most one active link per node
    std::uint64_t causality = 0;     // bits sent never exceed bits queued at slot start
    std::uint64_t deadline = 0;      // no delivery later than T_max
    std::uint64_t path = 0;          // delivered hops form a walk ending at a donor
    std::uint64_t reward_bound = 0;  // 0 <= reward <= 2 T_max + slot duration

    std::uint64_t total() const noexcept;
    std::map<std::string, std::uint64_t> as_map() const;
};

/// Per-node record of one slot, handed to the action-trace hook.
struct ActionTrace {
    std::uint64_t slot = 0;
    NodeId node{};
    Action proposed;
    Action executed;
    double reward_ms = 0.0;
};

/// One simulated run. Each slot runs, in order: blockage sampling, deadline
/// purge and rx->tx promotion, traffic ingress, buffer snapshot, proposals,
/// consensus, SINR and transmissions, rewards and learning, metrics.
class Simulation {
public:
    Simulation(const RunConfig& config, std::uint64_t seed);
    Simulation(const RunConfig& config, Topology topology, std::uint64_t seed);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    void advance_slot();
    /// Advances until `config.slots` slots have run.
    void run();

    std::uint64_t slot() const noexcept { return slot_; }
    const RunConfig& config() const noexcept { return config_; }
    const Topology& topology() const noexcept { return topology_; }
    const ChannelModel& channel() const noexcept { return *channel_; }
    const Collector& metrics() const noexcept { return metrics_; }
    const InvariantCounters& invariants() const noexcept { return invariants_; }
    const Buffer& buffer(NodeId node) const;
    const Policy& policy(NodeId node) const;
    std::uint64_t buffered_packets() const;

    RunSummary summary() const;

    void set_action_trace(std::function<void(const ActionTrace&)> hook) { trace_hook_ = std::move(hook); }
    /// JSON-lines sink for drop, delivery, override (and optionally proposal) events.
    void set_event_sink(std::ostream* sink) { events_ = sink; }

private:
    void init(std::uint64_t seed);
    void drop(const Packet& packet, NodeId at, const char* cause);
    void deliver(Packet& packet, NodeId donor);
    double next_hop_estimate(NodeId node) const;

    RunConfig config_;
    Topology topology_;
    std::unique_ptr<ChannelModel> channel_;
    std::unique_ptr<BlockageProcess> blockage_;
    std::unique_ptr<TrafficGenerator> traffic_;
    Collector metrics_;
    InvariantCounters invariants_;

    Rng blockage_rng_;
    Rng traffic_rng_;
    Rng consensus_rng_;

    std::vector<std::unique_ptr<Policy>> policies_;   // by node index; null for donors
    std::vector<ActionSet> action_sets_;
    std::vector<std::unique_ptr<Buffer>> buffers_;    // null for donors
    std::vector<std::uint64_t> clear_rate_bits_;      // per candidate edge
    std::vector<std::uint32_t> drops_here_;  // this slot, per node

    EdgeSet edges_;
    std::uint64_t seed_ = 0;
    std::uint64_t slot_ = 0;
    std::uint64_t generated_ = 0;
    std::uint64_t delivered_ = 0;
    std::uint64_t dropped_ = 0;

    std::function<void(const ActionTrace&)> trace_hook_;
    std::ostream* events_ = nullptr;
};

}  // namespace safehaul
