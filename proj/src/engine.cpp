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

#include "safehaul/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace safehaul {

std::uint64_t InvariantCounters::total() const noexcept {
    return conservation + capacity + half_duplex + causality + deadline + path + reward_bound;
}

std::map<std::string, std::uint64_t> InvariantCounters::as_map() const {
    return {{"conservation", conservation}, {"capacity", capacity}, {"half_duplex", half_duplex},
            {"causality", causality},       {"deadline", deadline}, {"path", path},
            {"reward_bound", reward_bound}};
}

namespace {

Topology build_topology(const RunConfig& config, std::uint64_t seed) {
    if (!config.topology.file.empty()) return load_topology(config.topology.file);
    return generate_topology(config.topology.generator(), seed);
}

std::vector<NodeId> ue_attachment(const Topology& topology, std::size_t n_ues) {
    const auto nodes = topology.iab_node_ids();
    if (n_ues > 0 && nodes.empty()) throw std::invalid_argument("UEs configured but the topology has no IAB-node");
    std::vector<NodeId> out;
    out.reserve(n_ues);
    for (std::size_t u = 0; u < n_ues; ++u) out.push_back(nodes[u % nodes.size()]);
    return out;
}

NodeId nearest_donor(const Topology& topology, NodeId node) {
    const auto donors = topology.donor_ids();
    return *std::min_element(donors.begin(), donors.end(), [&](NodeId a, NodeId b) {
        return topology.distance_m(node, a) < topology.distance_m(node, b);
    });
}

nlohmann::ordered_json action_json(const Action& a) {
    return {{"kind", to_string(a.kind)}, {"from", index(a.from)}, {"to", index(a.to)}};
}

}  // namespace

Simulation::Simulation(const RunConfig& config, std::uint64_t seed)
    : Simulation(config, build_topology(config, seed), seed) {}

Simulation::Simulation(const RunConfig& config, Topology topology, std::uint64_t seed)
    : config_(config),
      topology_(std::move(topology)),
      metrics_(ue_attachment(topology_, config.traffic.n_ues), config.window_start_slot(), config.mac.slot_ms),
      blockage_rng_(make_rng(seed, Stream::blockage)),
      traffic_rng_(make_rng(seed, Stream::traffic)),
      consensus_rng_(make_rng(seed, Stream::consensus)) {
    if (auto problems = validate(config_); !problems.empty()) throw ConfigError(std::move(problems));
    seed_ = seed;
    init(seed);
}

Simulation::~Simulation() = default;

void Simulation::init(std::uint64_t seed) {
    channel_ = std::make_unique<ChannelModel>(topology_, config_.channel, seed);
    blockage_ = std::make_unique<BlockageProcess>(topology_.candidate_edges().size(), config_.channel.blockage,
                                                  channel_->edge_los());

    const double slot_s = config_.mac.slot_ms * 1e-3;
    for (std::size_t k = 0; k < topology_.candidate_edges().size(); ++k) {
        clear_rate_bits_.push_back(channel_->bits_per_slot(channel_->snr(k), slot_s));
    }

    const std::size_t n = topology_.size();
    policies_.resize(n);
    action_sets_.resize(n);
    buffers_.resize(n);
    drops_here_.assign(n, 0);
    for (NodeId id : topology_.iab_node_ids()) {
        const std::uint32_t i = index(id);
        buffers_[i] = std::make_unique<Buffer>(id, topology_.node(id).buffer_capacity);
        action_sets_[i] = action_set(topology_, id);
        switch (config_.algo) {
            case Algorithm::safehaul:
                policies_[i] = std::make_unique<SafehaulAgent>(action_sets_[i], config_.learner,
                                                               make_rng(seed, Stream::agent, i),
                                                               make_rng(seed, Stream::reservoir, i));
                break;
            case Algorithm::risk_neutral:
                policies_[i] = std::make_unique<RiskNeutralAgent>(action_sets_[i], config_.learner,
                                                                  make_rng(seed, Stream::agent, i));
                break;
            case Algorithm::mlr:
                policies_[i] = std::make_unique<MlrAgent>(topology_, action_sets_[i]);
                break;
        }
    }

    std::vector<TrafficSource> sources;
    const auto attach = ue_attachment(topology_, config_.traffic.n_ues);
    for (std::size_t u = 0; u < attach.size(); ++u) {
        sources.push_back({static_cast<std::uint32_t>(u), attach[u], config_.traffic.rate_mbps * 1e6,
                           config_.traffic.process, nearest_donor(topology_, attach[u])});
    }
    TrafficTiming timing{config_.traffic.packet_bits, config_.mac.slot_ms, config_.mac.deadline_slots()};
    traffic_ = std::make_unique<TrafficGenerator>(std::move(sources), timing, traffic_rng_);
}

const Buffer& Simulation::buffer(NodeId node) const {
    const auto& b = buffers_.at(index(node));
    if (!b) throw std::invalid_argument(fmt::format("node {} has no buffer (donor)", index(node)));
    return *b;
}

const Policy& Simulation::policy(NodeId node) const {
    const auto& p = policies_.at(index(node));
    if (!p) throw std::invalid_argument(fmt::format("node {} runs no policy (donor)", index(node)));
    return *p;
}

std::uint64_t Simulation::buffered_packets() const {
    std::uint64_t total = 0;
    for (const auto& b : buffers_) {
        if (b) total += b->size();
    }
    return total;
}

void Simulation::drop(const Packet& packet, NodeId at, const char* cause) {
    ++dropped_;
    ++drops_here_[index(at)];
    metrics_.record_drop(packet.ue);
    if (events_) {
        nlohmann::ordered_json e{{"slot", slot_}, {"event", "drop"}, {"packet", packet.id}, {"node", index(at)},
                                 {"cause", cause}};
        *events_ << e.dump() << '\n';
    }
}

void Simulation::deliver(Packet& packet, NodeId donor) {
    ++delivered_;
    const double latency = static_cast<double>(slot_ - packet.created_slot) * config_.mac.slot_ms;
    if (slot_ > packet.deadline_slot || latency > config_.mac.t_max_ms + 1e-9) ++invariants_.deadline;

    bool walk = !packet.hops.empty() && packet.hops.front() == packet.source && packet.hops.back() == donor &&
                topology_.is_donor(donor);
    for (std::size_t h = 1; walk && h < packet.hops.size(); ++h) {
        walk = topology_.edge_index({packet.hops[h - 1], packet.hops[h]}).has_value();
    }
    if (!walk) ++invariants_.path;

    metrics_.record_delivery(packet.ue, packet.source, donor, slot_, latency, packet.size_bits);
    if (events_) {
        nlohmann::ordered_json e{{"slot", slot_},      {"event", "delivery"},   {"packet", packet.id},
                                 {"donor", index(donor)}, {"latency_ms", latency}, {"hops", packet.hops.size() - 1}};
        *events_ << e.dump() << '\n';
    }
}

double Simulation::next_hop_estimate(NodeId node) const {
    if (topology_.is_donor(node)) return 0.0;
    const Policy& p = *policies_[index(node)];
    return estimated_next_hop_latency(
        topology_, node, edges_, [&](Edge e) { return p.mean_latency(Action::transmit(e.from, e.to)); },
        config_.mac.t_max_ms);
}

void Simulation::advance_slot() {
    ++slot_;
    const std::size_t n = topology_.size();
    const double slot_ms = config_.mac.slot_ms;
    const double t_max = config_.mac.t_max_ms;
    std::fill(drops_here_.begin(), drops_here_.end(), 0);

    // 1. Link availability.
    edges_ = available_edges(topology_, blockage_->sample(slot_, blockage_rng_).available, slot_);

    // 2. Expired packets leave; last slot's arrivals become sendable.
    for (auto& b : buffers_) {
        if (!b) continue;
        for (const Packet& p : b->purge_expired(slot_)) drop(p, b->owner(), "deadline");
        b->promote();
    }

    // 3. Ingress from the access side.
    for (Packet& p : traffic_->generate(slot_, traffic_rng_)) {
        ++generated_;
        metrics_.record_generated(p.ue);
        if (!buffers_[index(p.source)]->push_rx(p, slot_)) drop(p, p.source, "overflow");
    }

    // 4. Buffer status shared with the coordinator. The reward variant of the
    // queueing time also counts this slot's drops at the node as packets that
    // waited T_max.
    std::vector<double> tq(n, 0.0);
    std::vector<double> tq_reward(n, 0.0);
    std::vector<std::uint64_t> tx_bits(n, 0);
    for (const auto& b : buffers_) {
        if (!b) continue;
        const std::uint32_t i = index(b->owner());
        tq[i] = queueing_time_ms(*b, slot_, slot_ms);
        tx_bits[i] = b->tx_bits();
        const auto queued = static_cast<double>(b->size());
        const auto lost = static_cast<double>(drops_here_[i]);
        tq_reward[i] = lost == 0.0 ? tq[i] : (tq[i] * queued + t_max * lost) / (queued + lost);
    }

    // 5. Proposals.
    std::vector<Proposal> proposals;
    proposals.reserve(topology_.iab_node_ids().size());
    for (NodeId id : topology_.iab_node_ids()) {
        const std::uint32_t i = index(id);
        const auto available = available_actions(action_sets_[i], edges_);
        const ProposalContext ctx{buffers_[i]->tx().empty(), clear_rate_bits_};
        const Action a = policies_[i]->propose(available, ctx);
        if (std::find(available.begin(), available.end(), a) == available.end()) {
            throw std::logic_error(fmt::format("node {} proposed unavailable {}", i, to_string(a)));
        }
        const auto load = buffers_[i]->size();
        proposals.push_back({id, a, tq[i], load,
                             priority(tq[i], static_cast<double>(load), t_max,
                                      static_cast<double>(buffers_[i]->capacity()), config_.consensus)});
        if (events_ && config_.trace_proposals) {
            nlohmann::ordered_json e{{"slot", slot_}, {"event", "proposal"},
                                     {"message", nlohmann::ordered_json::parse(proposal_message(proposals.back()))}};
            *events_ << e.dump() << '\n';
        }
    }

    // 6. Consensus.
    const Resolution res = resolve(proposals, consensus_rng_);
    std::vector<int> busy(n, 0);
    for (const Edge& e : res.activations) {
        ++busy[index(e.from)];
        ++busy[index(e.to)];
    }
    for (int b : busy) {
        if (b > 1) ++invariants_.half_duplex;
    }
    if (events_) {
        for (const auto& [node, action] : res.overridden) {
            nlohmann::ordered_json e{{"slot", slot_}, {"event", "override"}, {"node", index(node)},
                                     {"action", action_json(action)}};
            *events_ << e.dump() << '\n';
        }
    }

    // 7. SINR of the concurrent links and transmissions.
    std::vector<std::size_t> active;
    active.reserve(res.activations.size());
    for (const Edge& e : res.activations) active.push_back(*topology_.edge_index(e));
    const auto sinrs = channel_->evaluate(active);
    std::vector<double> t_tx(n, 0.0);
    std::vector<Packet> delivered, expired;
    for (std::size_t k = 0; k < active.size(); ++k) {
        const Edge link = res.activations[k];
        const LinkSlot cap{channel_->bits_per_slot(sinrs[k].value, slot_ms * 1e-3), config_.mac.symbols_per_slot, slot_ms};
        Buffer& sender = *buffers_[index(link.from)];
        Buffer* receiver = topology_.is_donor(link.to) ? nullptr : buffers_[index(link.to)].get();
        delivered.clear();
        expired.clear();
        const auto rec = transmit(link, cap, sender, receiver, slot_, delivered, expired);
        if (rec.bits_moved > tx_bits[index(link.from)] || rec.bits_moved > rec.bits_capacity) ++invariants_.causality;
        t_tx[index(link.from)] = rec.t_tx_ms;
        for (const Packet& p : expired) drop(p, link.from, "deadline");
        for (Packet& p : delivered) deliver(p, link.to);
    }

    // 8. Rewards for the executed actions.
    std::vector<double> estimate(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) estimate[i] = next_hop_estimate(node_id(i));
    for (const Proposal& p : proposals) {
        const std::uint32_t i = index(p.node);
        const Action done = res.executed(p);
        double r = 0.0;
        if (done.is_transmit()) {
            const std::uint32_t l = index(done.to);
            r = compute_reward(done, tq_reward[i], tq_reward[l], t_tx[i], estimate[l]);
        } else {
            r = compute_reward(done, tq_reward[i], 0.0, 0.0, estimate[i]);
        }
        if (!(r >= 0.0) || r > 2.0 * t_max + slot_ms + 1e-9) ++invariants_.reward_bound;
        policies_[i]->observe(done, r);
        if (trace_hook_) trace_hook_({slot_, p.node, p.action, done, r});
    }

    // 9. Accounting.
    std::uint64_t held = 0;
    for (const auto& b : buffers_) {
        if (!b) continue;
        held += b->size();
        if (b->size() > b->capacity()) ++invariants_.capacity;
    }
    if (generated_ != delivered_ + dropped_ + held) ++invariants_.conservation;
    metrics_.end_slot(slot_, res.conflicts, res.overridden.size());
}

void Simulation::run() {
    while (slot_ < config_.slots) advance_slot();
}

RunSummary Simulation::summary() const {
    RunSummary s = metrics_.summarize();
    s.algo = to_string(config_.algo);
    s.seed = seed_;
    s.n_nodes = topology_.iab_node_ids().size();
    s.n_donors = topology_.donor_ids().size();
    s.config = config_to_json(config_);
    s.invariant_violations = invariants_.as_map();
    return s;
}

}  // namespace safehaul
