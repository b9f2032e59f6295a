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
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "safehaul/rng.hpp"
#include "safehaul/topology.hpp"
#include "safehaul/types.hpp"

namespace safehaul {

struct Packet {
    std::uint64_t id = 0;
    NodeId source{};
    std::uint32_t ue = 0;
    NodeId bap_routing_id{};  // intended donor
    std::uint32_t size_bits = 12000;
    std::uint64_t created_slot = 0;
    std::uint64_t deadline_slot = 0;  // last slot in which delivery still counts
    std::uint64_t arrival_slot = 0;   // arrival at the node currently holding it
    std::vector<NodeId> hops;         // starts with the source
};

/// RLC-like pair of FIFO queues sharing one capacity. Received packets wait in
/// rx until the next slot boundary moves them to tx.
class Buffer {
public:
    Buffer(NodeId owner, std::size_t capacity);

    NodeId owner() const noexcept { return owner_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return rx_.size() + tx_.size(); }
    std::size_t free_space() const noexcept { return capacity_ - size(); }
    bool full() const noexcept { return size() >= capacity_; }
    const std::deque<Packet>& rx() const noexcept { return rx_; }
    const std::deque<Packet>& tx() const noexcept { return tx_; }
    std::uint64_t tx_bits() const noexcept { return tx_bits_; }

    /// Stamps the arrival slot and appends to rx. Returns false (and leaves
    /// the packet untouched) when full.
    bool push_rx(Packet& packet, std::uint64_t slot);
    /// Moves all of rx to the back of tx.
    void promote();
    /// Removes every packet whose deadline lies before `slot`.
    std::vector<Packet> purge_expired(std::uint64_t slot);
    /// Removes the tx packets at the given positions (ascending) and returns
    /// them in that order.
    std::vector<Packet> take_tx(std::span<const std::size_t> positions);

    /// Sum of arrival slots over all queued packets.
    std::uint64_t arrival_sum() const noexcept { return arrival_sum_; }
    /// Round-robin start position, advanced by each transmission.
    std::size_t next_rr_offset() noexcept { return rr_cursor_++; }

private:
    NodeId owner_;
    std::size_t capacity_;
    std::deque<Packet> rx_;
    std::deque<Packet> tx_;
    std::uint64_t tx_bits_ = 0;
    std::uint64_t arrival_sum_ = 0;
    std::size_t rr_cursor_ = 0;
};

/// Mean over queued packets of (slot - arrival) * slot duration; 0 when empty.
double queueing_time_ms(const Buffer& buffer, std::uint64_t slot, double slot_ms);

enum class ArrivalProcess : std::uint8_t { cbr, poisson };

struct TrafficSource {
    std::uint32_t ue = 0;
    NodeId attach{};
    double rate_bps = 0.0;
    ArrivalProcess process = ArrivalProcess::cbr;
    NodeId bap_routing_id{};
};

struct TrafficTiming {
    std::uint32_t packet_bits = 12000;
    double slot_ms = 0.125;
    std::uint64_t deadline_slots = 240;  // T_max / slot duration
};

/// Per-slot packet arrivals. CBR keeps an exact integer carry (in micro-bits)
/// so the long-run rate matches the configured rate; each CBR source starts
/// at a random phase. Poisson draws a fresh count every slot.
class TrafficGenerator {
public:
    TrafficGenerator(std::vector<TrafficSource> sources, TrafficTiming timing, Rng& rng);

    std::vector<Packet> generate(std::uint64_t slot, Rng& rng);
    std::span<const TrafficSource> sources() const noexcept { return sources_; }

private:
    std::vector<TrafficSource> sources_;
    TrafficTiming timing_;
    std::vector<std::uint64_t> carry_;
    std::vector<std::uint64_t> increment_;
    std::uint64_t threshold_;
    std::uint64_t next_id_ = 0;
};

/// Round-robin split of `symbols_total` among flows with the given needs.
/// Every unsatisfied flow gets an equal share, excess from flows needing less
/// is redistributed, and indivisible leftovers go one symbol at a time in
/// round-robin order starting at `start`.
std::vector<std::uint32_t> schedule_slot(std::span<const std::uint32_t> needs, std::uint32_t symbols_total,
                                         std::size_t start = 0);

/// Static next-hop table keyed by (node, routing id), with an optional
/// per-node default next hop used when no specific entry exists.
struct RoutingTable {
    std::map<std::pair<NodeId, NodeId>, NodeId> entries;
    std::map<NodeId, NodeId> defaults;
};

enum class RouteKind : std::uint8_t { next_hop, delivered, unroutable };

struct Route {
    RouteKind kind = RouteKind::unroutable;
    NodeId next{};
};

Route bap_route(const Packet& packet, NodeId node, const Topology& topology, const RoutingTable& routing);

struct TransmissionRecord {
    Edge link;
    std::uint64_t slot = 0;
    std::uint64_t bits_capacity = 0;
    std::uint64_t bits_moved = 0;
    std::size_t packets_moved = 0;
    double t_tx_ms = 0.0;
};

struct LinkSlot {
    std::uint64_t rate_bits = 0;
    std::uint32_t symbols = 14;
    double slot_ms = 0.125;
};

/// Moves packets from the sender's tx queue across `link`. Symbols are shared
/// among the UE flows present in tx by schedule_slot; each flow sends whole
/// packets in FIFO order within its share, after which any leftover capacity
/// serves remaining packets in FIFO order. The sender stops when the receiver
/// is full. `receiver` is null for a donor, whose packets land in `delivered`.
/// Packets past their deadline never leave; they are returned in `expired`.
TransmissionRecord transmit(Edge link, const LinkSlot& capacity, Buffer& sender, Buffer* receiver, std::uint64_t slot,
                            std::vector<Packet>& delivered, std::vector<Packet>& expired);

}  // namespace safehaul
