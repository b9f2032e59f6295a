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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "safehaul/types.hpp"

namespace safehaul {

enum class NodeKind : std::uint8_t { iab_node, iab_donor };

struct Position {
    double x_m = 0.0;
    double y_m = 0.0;

    bool operator==(const Position&) const = default;
};

struct Node {
    NodeId id{};
    Position position{};
    double height_m = 15.0;
    NodeKind kind = NodeKind::iab_node;
    std::size_t buffer_capacity = 512;  // packets; ignored for donors

    bool is_donor() const noexcept { return kind == NodeKind::iab_donor; }
    bool operator==(const Node&) const = default;
};

/// Raised when a topology violates one of its invariants. `invariant()` names
/// the failed rule (e.g. "donor_reachability").
class TopologyError : public std::runtime_error {
public:
    TopologyError(std::string invariant, const std::string& detail);
    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

/// Immutable deployment: nodes, donors and the candidate links within range.
/// Candidate edges are all ordered pairs of distinct nodes whose 3D distance
/// does not exceed the maximum link range, sorted lexicographically.
class Topology {
public:
    Topology(std::vector<Node> nodes, double max_link_range_m);

    std::span<const Node> nodes() const noexcept { return nodes_; }
    const Node& node(NodeId id) const { return nodes_.at(index(id)); }
    std::size_t size() const noexcept { return nodes_.size(); }
    bool is_donor(NodeId id) const { return node(id).is_donor(); }

    std::span<const NodeId> donor_ids() const noexcept { return donors_; }
    std::span<const NodeId> iab_node_ids() const noexcept { return iab_nodes_; }

    double max_link_range_m() const noexcept { return max_link_range_m_; }
    std::span<const Edge> candidate_edges() const noexcept { return edges_; }
    std::optional<std::size_t> edge_index(Edge e) const;

    /// Indices into candidate_edges() of the links leaving / entering `id`.
    std::span<const std::size_t> out_edges(NodeId id) const { return out_.at(index(id)); }
    std::span<const std::size_t> in_edges(NodeId id) const { return in_.at(index(id)); }

    double distance_m(NodeId a, NodeId b) const;
    double horizontal_distance_m(NodeId a, NodeId b) const;

    /// Minimum number of candidate-edge hops from each node to any donor
    /// (0 for donors, -1 if unreachable).
    std::vector<int> hops_to_donor() const;

    bool operator==(const Topology& other) const;

private:
    std::vector<Node> nodes_;
    double max_link_range_m_;
    std::vector<NodeId> donors_;
    std::vector<NodeId> iab_nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
};

/// Links usable in one slot.
struct EdgeSet {
    std::uint64_t slot = 0;
    std::vector<Edge> edges;  // sorted

    bool contains(Edge e) const;
    std::size_t size() const noexcept { return edges.size(); }
    bool empty() const noexcept { return edges.empty(); }
};

/// Candidate edges minus the blocked ones. `available[k]` refers to
/// candidate_edges()[k].
EdgeSet available_edges(const Topology& topology, const std::vector<bool>& available, std::uint64_t slot);

struct GeneratorParams {
    std::size_t n_nodes = 25;
    std::size_t n_donors = 3;
    double area_m2 = 15e6 * 25.0 / 223.0;
    double max_link_range_m = 300.0;
    double height_m = 15.0;
    std::size_t buffer_capacity = 512;
    int max_attempts = 100;
};

/// Uniform placement of IAB-nodes in a square of the given area with donors
/// on an evenly spaced grid. IAB-nodes get ids [0, N), donors [N, N + D).
/// Placement is redrawn (new sub-seed) until every node reaches a donor.
Topology generate_topology(const GeneratorParams& params, std::uint64_t seed);

Topology load_topology(const std::filesystem::path& path);
void save_topology(const Topology& topology, const std::filesystem::path& path);
std::string topology_to_json(const Topology& topology);
Topology topology_from_json(const std::string& text);

}  // namespace safehaul
