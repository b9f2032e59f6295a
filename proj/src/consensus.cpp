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

#include "safehaul/consensus.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

namespace safehaul {

double priority(double tq_ms, double load_pkts, double tq_max_ms, double load_max_pkts, PriorityWeights weights) {
    if (!(tq_max_ms > 0.0) || !(load_max_pkts > 0.0)) {
        throw std::invalid_argument("priority: normalisation constants must be positive");
    }
    return weights.queueing * std::min(tq_ms / tq_max_ms, 1.0) + weights.load * std::min(load_pkts / load_max_pkts, 1.0);
}

std::string proposal_message(const Proposal& p) {
    nlohmann::ordered_json j;
    j["node"] = index(p.node);
    j["action"] = {{"kind", to_string(p.action.kind)}, {"from", index(p.action.from)}, {"to", index(p.action.to)}};
    j["tq_ms"] = p.tq_ms;
    j["load_pkts"] = p.load_pkts;
    return j.dump();
}

namespace {

void check_unique(std::span<const Proposal> proposals) {
    std::unordered_set<NodeId> seen;
    for (const Proposal& p : proposals) {
        if (!seen.insert(p.node).second) {
            throw std::invalid_argument(fmt::format("duplicate proposal from node {}", index(p.node)));
        }
    }
}

}  // namespace

std::vector<ConflictGroup> detect_conflicts(std::span<const Proposal> proposals) {
    check_unique(proposals);
    std::map<NodeId, std::vector<NodeId>> by_target;
    std::unordered_set<NodeId> transmitting;
    for (const Proposal& p : proposals) {
        if (!p.action.is_transmit()) continue;
        by_target[p.action.to].push_back(p.node);
        transmitting.insert(p.node);
    }
    std::vector<ConflictGroup> groups;
    for (auto& [target, senders] : by_target) {
        ConflictGroup g{target, senders};
        if (transmitting.contains(target)) g.members.push_back(target);
        if (g.members.size() < 2) continue;
        std::sort(g.members.begin(), g.members.end());
        groups.push_back(std::move(g));
    }
    return groups;
}

Action Resolution::executed(const Proposal& proposal) const {
    auto it = overridden.find(proposal.node);
    return it == overridden.end() ? proposal.action : it->second;
}

Resolution resolve(std::span<const Proposal> proposals, Rng& rng) {
    Resolution out;
    out.conflicts = detect_conflicts(proposals).size();

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        if (proposals[i].action.is_transmit()) order.push_back(i);
    }
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return proposals[a].priority > proposals[b].priority; });

    std::unordered_set<NodeId> busy;
    std::unordered_map<NodeId, const Proposal*> by_node;
    for (const Proposal& p : proposals) by_node.emplace(p.node, &p);

    for (std::size_t i : order) {
        const Proposal& p = proposals[i];
        const Edge link = p.action.link();
        if (busy.contains(link.from) || busy.contains(link.to)) {
            out.overridden[p.node] = Action::idle(p.node);
            continue;
        }
        busy.insert(link.from);
        busy.insert(link.to);
        out.activations.push_back(link);
    }
    for (const Edge& link : out.activations) {
        const Action rx = Action::receive(link.from, link.to);
        auto it = by_node.find(link.to);
        if (it != by_node.end() && it->second->action != rx) out.overridden[link.to] = rx;
    }
    std::sort(out.activations.begin(), out.activations.end());
    return out;
}

}  // namespace safehaul
