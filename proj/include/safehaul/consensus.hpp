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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "safehaul/rng.hpp"
#include "safehaul/types.hpp"

namespace safehaul {

struct PriorityWeights {
    double queueing = 0.5;
    double load = 0.5;
};

/// w_q * min(tq / tq_max, 1) + w_B * min(load / load_max, 1).
/// Throws std::invalid_argument unless both norms are positive.
double priority(double tq_ms, double load_pkts, double tq_max_ms, double load_max_pkts, PriorityWeights weights);

/// What one IAB-node shares with the coordinator each slot.
struct Proposal {
    NodeId node{};
    Action action;
    double tq_ms = 0.0;
    std::uint64_t load_pkts = 0;
    double priority = 0.0;
};

/// The control message of a proposal:
/// {"node":int,"action":{"kind":str,"from":int,"to":int},"tq_ms":float,"load_pkts":int}
std::string proposal_message(const Proposal& proposal);

/// Proposals that cannot all activate because they involve `contested`: every
/// transmitter aiming at it, plus the node itself when it also transmits.
struct ConflictGroup {
    NodeId contested{};
    std::vector<NodeId> members;  // sorted
};

/// One group per contested node with at least two members, ordered by
/// contested node. Throws std::invalid_argument on two proposals from one node.
std::vector<ConflictGroup> detect_conflicts(std::span<const Proposal> proposals);

struct Resolution {
    std::vector<Edge> activations;            // sorted
    std::map<NodeId, Action> overridden;      // node -> action it must execute
    std::size_t conflicts = 0;                // number of conflict groups

    /// Action the node executes: its override if any, else its proposal.
    Action executed(const Proposal& proposal) const;
};

/// Transmit proposals are granted in order of descending priority (equal
/// priorities in seeded random order); a link is granted only while both of
/// its endpoints are still free. Losing transmitters are forced idle, and the
/// receiver of a granted link is forced to receive on it unless it already
/// proposed exactly that.
Resolution resolve(std::span<const Proposal> proposals, Rng& rng);

}  // namespace safehaul
