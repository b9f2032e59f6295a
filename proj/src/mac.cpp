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

#include "safehaul/mac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

namespace safehaul {

Buffer::Buffer(NodeId owner, std::size_t capacity) : owner_(owner), capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument(fmt::format("buffer of node {} needs positive capacity", index(owner)));
}

bool Buffer::push_rx(Packet& packet, std::uint64_t slot) {
    if (full()) return false;
    packet.arrival_slot = slot;
    arrival_sum_ += slot;
    rx_.push_back(std::move(packet));
    return true;
}

void Buffer::promote() {
    for (Packet& p : rx_) {
        tx_bits_ += p.size_bits;
        tx_.push_back(std::move(p));
    }
    rx_.clear();
}

std::vector<Packet> Buffer::purge_expired(std::uint64_t slot) {
    std::vector<Packet> out;
    auto sweep = [&](std::deque<Packet>& q, bool counted) {
        auto keep = std::stable_partition(q.begin(), q.end(), [&](const Packet& p) { return p.deadline_slot >= slot; });
        for (auto it = keep; it != q.end(); ++it) {
            arrival_sum_ -= it->arrival_slot;
            if (counted) tx_bits_ -= it->size_bits;
            out.push_back(std::move(*it));
        }
        q.erase(keep, q.end());
    };
    sweep(rx_, false);
    sweep(tx_, true);
    return out;
}

std::vector<Packet> Buffer::take_tx(std::span<const std::size_t> positions) {
    std::vector<Packet> out;
    out.reserve(positions.size());
    std::vector<bool> taken(tx_.size(), false);
    for (std::size_t pos : positions) {
        if (pos >= tx_.size() || taken[pos]) throw std::out_of_range("take_tx: bad position");
        taken[pos] = true;
        Packet& p = tx_[pos];
        arrival_sum_ -= p.arrival_slot;
        tx_bits_ -= p.size_bits;
        out.push_back(std::move(p));
    }
    std::size_t w = 0;
    for (std::size_t r = 0; r < tx_.size(); ++r) {
        if (taken[r]) continue;
        if (w != r) tx_[w] = std::move(tx_[r]);
        ++w;
    }
    tx_.resize(w);
    return out;
}

double queueing_time_ms(const Buffer& buffer, std::uint64_t slot, double slot_ms) {
    const std::size_t n = buffer.size();
    if (n == 0) return 0.0;
    const double waited = static_cast<double>(n) * static_cast<double>(slot) - static_cast<double>(buffer.arrival_sum());
    return std::max(0.0, waited / static_cast<double>(n)) * slot_ms;
}

TrafficGenerator::TrafficGenerator(std::vector<TrafficSource> sources, TrafficTiming timing, Rng& rng)
    : sources_(std::move(sources)), timing_(timing), threshold_(static_cast<std::uint64_t>(timing.packet_bits) * 1'000'000u) {
    if (timing.packet_bits == 0) throw std::invalid_argument("packet size must be positive");
    if (!(timing.slot_ms > 0.0)) throw std::invalid_argument("slot duration must be positive");
    for (const TrafficSource& s : sources_) {
        if (!(s.rate_bps >= 0.0) || !std::isfinite(s.rate_bps)) {
            throw std::invalid_argument(fmt::format("UE {} has invalid rate {}", s.ue, s.rate_bps));
        }
        const double micro_bits = s.rate_bps * timing.slot_ms * 1e-3 * 1e6;
        increment_.push_back(static_cast<std::uint64_t>(std::llround(micro_bits)));
        carry_.push_back(s.process == ArrivalProcess::cbr && s.rate_bps > 0.0 ? uniform_index(rng, threshold_) : 0);
    }
}

std::vector<Packet> TrafficGenerator::generate(std::uint64_t slot, Rng& rng) {
    std::vector<Packet> out;
    for (std::size_t i = 0; i < sources_.size(); ++i) {
        const TrafficSource& s = sources_[i];
        std::uint64_t count = 0;
        if (s.process == ArrivalProcess::cbr) {
            carry_[i] += increment_[i];
            count = carry_[i] / threshold_;
            carry_[i] %= threshold_;
        } else if (increment_[i] > 0) {
            std::poisson_distribution<std::uint64_t> dist(static_cast<double>(increment_[i]) / static_cast<double>(threshold_));
            count = dist(rng);
        }
        for (std::uint64_t k = 0; k < count; ++k) {
            Packet p;
            p.id = next_id_++;
            p.source = s.attach;
            p.ue = s.ue;
            p.bap_routing_id = s.bap_routing_id;
            p.size_bits = timing_.packet_bits;
            p.created_slot = slot;
            p.deadline_slot = slot + timing_.deadline_slots;
            p.arrival_slot = slot;
            p.hops.push_back(s.attach);
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<std::uint32_t> schedule_slot(std::span<const std::uint32_t> needs, std::uint32_t symbols_total,
                                         std::size_t start) {
    if (symbols_total == 0) throw std::invalid_argument("schedule_slot: no symbols to allocate");
    std::vector<std::uint32_t> alloc(needs.size(), 0);
    if (needs.empty()) return alloc;
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < needs.size(); ++k) {
        const std::size_t f = (start + k) % needs.size();
        if (needs[f] > 0) active.push_back(f);
    }
    std::uint32_t remaining = symbols_total;
    while (remaining > 0 && !active.empty()) {
        const auto share = static_cast<std::uint32_t>(remaining / active.size());
        if (share == 0) {
            for (std::size_t k = 0; k < remaining; ++k) ++alloc[active[k]];
            break;
        }
        std::vector<std::size_t> still;
        for (std::size_t f : active) {
            const std::uint32_t give = std::min(share, needs[f] - alloc[f]);
            alloc[f] += give;
            remaining -= give;
            if (alloc[f] < needs[f]) still.push_back(f);
        }
        active.swap(still);
    }
    return alloc;
}

Route bap_route(const Packet& packet, NodeId node, const Topology& topology, const RoutingTable& routing) {
    if (topology.is_donor(node)) return {RouteKind::delivered, node};
    if (auto it = routing.entries.find({node, packet.bap_routing_id}); it != routing.entries.end()) {
        return {RouteKind::next_hop, it->second};
    }
    if (auto it = routing.defaults.find(node); it != routing.defaults.end()) return {RouteKind::next_hop, it->second};
    return {RouteKind::unroutable, node};
}

TransmissionRecord transmit(Edge link, const LinkSlot& capacity, Buffer& sender, Buffer* receiver, std::uint64_t slot,
                            std::vector<Packet>& delivered, std::vector<Packet>& expired) {
    TransmissionRecord rec{link, slot, capacity.rate_bits, 0, 0, 0.0};
    if (capacity.symbols == 0) throw std::invalid_argument("transmit: zero symbols per slot");

    const auto& queue = sender.tx();
    std::vector<std::size_t> stale;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        if (queue[i].deadline_slot < slot) stale.push_back(i);
    }
    if (!stale.empty()) {
        for (Packet& p : sender.take_tx(stale)) expired.push_back(std::move(p));
    }
    if (capacity.rate_bits == 0 || queue.empty()) return rec;

    // Flows in order of first appearance in the queue.
    std::vector<std::vector<std::size_t>> flows;
    std::vector<std::uint64_t> flow_bits;
    std::unordered_map<std::uint32_t, std::size_t> flow_of;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        auto [it, fresh] = flow_of.emplace(queue[i].ue, flows.size());
        if (fresh) {
            flows.emplace_back();
            flow_bits.push_back(0);
        }
        flows[it->second].push_back(i);
        flow_bits[it->second] += queue[i].size_bits;
    }

    const double bits_per_symbol = static_cast<double>(capacity.rate_bits) / capacity.symbols;
    std::vector<std::uint32_t> needs(flows.size());
    for (std::size_t f = 0; f < flows.size(); ++f) {
        const double n = std::ceil(static_cast<double>(flow_bits[f]) / bits_per_symbol * (1.0 - 1e-12));
        needs[f] = static_cast<std::uint32_t>(std::min<double>(n, capacity.symbols));
    }
    const std::size_t start = sender.next_rr_offset() % flows.size();
    const auto alloc = schedule_slot(needs, capacity.symbols, start);

    std::size_t room = receiver ? receiver->free_space() : std::numeric_limits<std::size_t>::max();
    std::vector<bool> chosen(queue.size(), false);
    std::uint64_t used = 0;
    auto take = [&](std::size_t i) {
        chosen[i] = true;
        used += queue[i].size_bits;
        --room;
    };
    for (std::size_t k = 0; k < flows.size(); ++k) {
        const std::size_t f = (start + k) % flows.size();
        auto budget = static_cast<std::uint64_t>(std::floor(alloc[f] * bits_per_symbol * (1.0 + 1e-12)));
        for (std::size_t i : flows[f]) {
            const std::uint32_t size = queue[i].size_bits;
            if (room == 0 || size > budget || used + size > capacity.rate_bits) break;
            take(i);
            budget -= size;
        }
    }
    for (std::size_t i = 0; i < queue.size(); ++i) {
        if (chosen[i]) continue;
        if (room == 0 || used + queue[i].size_bits > capacity.rate_bits) break;
        take(i);
    }

    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (chosen[i]) positions.push_back(i);
    }
    rec.bits_moved = used;
    rec.packets_moved = positions.size();
    rec.t_tx_ms = capacity.slot_ms * static_cast<double>(used) / static_cast<double>(capacity.rate_bits);
    for (Packet& p : sender.take_tx(positions)) {
        p.hops.push_back(link.to);
        if (receiver) {
            if (!receiver->push_rx(p, slot)) throw std::logic_error("transmit: receiver overflow");
        } else {
            p.arrival_slot = slot;
            delivered.push_back(std::move(p));
        }
    }
    return rec;
}

}  // namespace safehaul
