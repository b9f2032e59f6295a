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

#include "safehaul/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "safehaul/rng.hpp"

namespace safehaul {

using json = nlohmann::json;

TopologyError::TopologyError(std::string invariant, const std::string& detail)
    : std::runtime_error(fmt::format("topology invariant violated: {}: {}", invariant, detail)),
      invariant_(std::move(invariant)) {}

Topology::Topology(std::vector<Node> nodes, double max_link_range_m)
    : nodes_(std::move(nodes)), max_link_range_m_(max_link_range_m) {
    if (!(max_link_range_m_ > 0.0)) {
        throw TopologyError("positive_link_range", fmt::format("max_link_range_m = {}", max_link_range_m_));
    }
    std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (index(n.id) != i) {
            throw TopologyError("dense_ids", fmt::format("expected id {} but found {}", i, index(n.id)));
        }
        if (!(n.height_m > 0.0)) {
            throw TopologyError("positive_height", fmt::format("node {} has height {}", i, n.height_m));
        }
        if (!std::isfinite(n.position.x_m) || !std::isfinite(n.position.y_m)) {
            throw TopologyError("finite_position", fmt::format("node {}", i));
        }
        if (n.is_donor()) {
            donors_.push_back(n.id);
        } else {
            if (n.buffer_capacity == 0) {
                throw TopologyError("positive_buffer_capacity", fmt::format("node {}", i));
            }
            iab_nodes_.push_back(n.id);
        }
    }
    if (donors_.empty()) {
        throw TopologyError("nonempty_donors", "topology has no IAB-donor");
    }

    out_.resize(nodes_.size());
    in_.resize(nodes_.size());
    for (std::size_t a = 0; a < nodes_.size(); ++a) {
        for (std::size_t b = 0; b < nodes_.size(); ++b) {
            if (a != b && distance_m(node_id(a), node_id(b)) <= max_link_range_m_) {
                edges_.push_back({node_id(a), node_id(b)});
            }
        }
    }
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        out_[index(edges_[k].from)].push_back(k);
        in_[index(edges_[k].to)].push_back(k);
    }

    const auto hops = hops_to_donor();
    for (NodeId n : iab_nodes_) {
        if (hops[index(n)] < 0) {
            throw TopologyError("donor_reachability", fmt::format("node {} cannot reach any donor", index(n)));
        }
    }
}

std::optional<std::size_t> Topology::edge_index(Edge e) const {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it == edges_.end() || *it != e) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
}

double Topology::horizontal_distance_m(NodeId a, NodeId b) const {
    const auto& pa = node(a).position;
    const auto& pb = node(b).position;
    return std::hypot(pa.x_m - pb.x_m, pa.y_m - pb.y_m);
}

double Topology::distance_m(NodeId a, NodeId b) const {
    return std::hypot(horizontal_distance_m(a, b), node(a).height_m - node(b).height_m);
}

std::vector<int> Topology::hops_to_donor() const {
    std::vector<int> hops(nodes_.size(), -1);
    std::deque<NodeId> frontier;
    for (NodeId d : donors_) {
        hops[index(d)] = 0;
        frontier.push_back(d);
    }
    // Reverse BFS: a node is one hop further than any node it has an out-edge to.
    while (!frontier.empty()) {
        NodeId cur = frontier.front();
        frontier.pop_front();
        for (std::size_t k : in_[index(cur)]) {
            NodeId prev = edges_[k].from;
            if (hops[index(prev)] < 0) {
                hops[index(prev)] = hops[index(cur)] + 1;
                frontier.push_back(prev);
            }
        }
    }
    return hops;
}

bool Topology::operator==(const Topology& other) const {
    return nodes_ == other.nodes_ && max_link_range_m_ == other.max_link_range_m_;
}

bool EdgeSet::contains(Edge e) const { return std::binary_search(edges.begin(), edges.end(), e); }

EdgeSet available_edges(const Topology& topology, const std::vector<bool>& available, std::uint64_t slot) {
    const auto candidates = topology.candidate_edges();
    if (available.size() != candidates.size()) {
        throw std::invalid_argument(
            fmt::format("availability flags cover {} edges, topology has {}", available.size(), candidates.size()));
    }
    EdgeSet set{slot, {}};
    set.edges.reserve(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (available[k]) set.edges.push_back(candidates[k]);
    }
    return set;
}

namespace {

std::vector<Position> donor_grid(std::size_t n_donors, double side) {
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_donors))));
    const auto rows = (n_donors + cols - 1) / cols;
    std::vector<Position> out;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t in_row = std::min(cols, n_donors - r * cols);
        for (std::size_t c = 0; c < in_row; ++c) {
            out.push_back({side * (static_cast<double>(c) + 0.5) / static_cast<double>(in_row),
                           side * (static_cast<double>(r) + 0.5) / static_cast<double>(rows)});
        }
    }
    return out;
}

}  // namespace

Topology generate_topology(const GeneratorParams& p, std::uint64_t seed) {
    if (p.n_nodes < 1 || p.n_donors < 1 || !(p.area_m2 > 0.0)) {
        throw std::invalid_argument("generate_topology requires n_nodes >= 1, n_donors >= 1 and area > 0");
    }
    const double side = std::sqrt(p.area_m2);
    const auto donors = donor_grid(p.n_donors, side);
    for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
        Rng rng = make_rng(seed, Stream::topology, static_cast<std::uint32_t>(attempt));
        std::vector<Node> nodes;
        nodes.reserve(p.n_nodes + p.n_donors);
        for (std::size_t i = 0; i < p.n_nodes; ++i) {
            Position pos{uniform01(rng) * side, uniform01(rng) * side};
            nodes.push_back({node_id(i), pos, p.height_m, NodeKind::iab_node, p.buffer_capacity});
        }
        for (std::size_t d = 0; d < p.n_donors; ++d) {
            nodes.push_back({node_id(p.n_nodes + d), donors[d], p.height_m, NodeKind::iab_donor, p.buffer_capacity});
        }
        try {
            return Topology(std::move(nodes), p.max_link_range_m);
        } catch (const TopologyError& e) {
            if (e.invariant() != "donor_reachability") throw;
        }
    }
    throw TopologyError("donor_reachability", fmt::format(
        "no donor-connected placement after {} attempts (n_nodes={}, n_donors={}, area={} m2, "
        "range={} m)",
        p.max_attempts, p.n_nodes, p.n_donors, p.area_m2, p.max_link_range_m));
}

std::string topology_to_json(const Topology& topology) {
    json j;
    j["nodes"] = json::array();
    for (const Node& n : topology.nodes()) {
        j["nodes"].push_back({{"id", index(n.id)},
                              {"x_m", n.position.x_m},
                              {"y_m", n.position.y_m},
                              {"height_m", n.height_m},
                              {"kind", n.is_donor() ? "donor" : "node"},
                              {"buffer_capacity", n.buffer_capacity}});
    }
    j["max_link_range_m"] = topology.max_link_range_m();
    return j.dump(2);
}

Topology topology_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(fmt::format("topology parse error: {}", e.what()));
    }
    try {
        std::vector<Node> nodes;
        for (const auto& jn : j.at("nodes")) {
            const auto kind = jn.at("kind").get<std::string>();
            if (kind != "donor" && kind != "node") {
                throw std::runtime_error(fmt::format("unknown node kind '{}'", kind));
            }
            const auto id = jn.at("id").get<std::int64_t>();
            if (id < 0) throw TopologyError("dense_ids", fmt::format("negative id {}", id));
            nodes.push_back({node_id(static_cast<std::size_t>(id)),
                             {jn.at("x_m").get<double>(), jn.at("y_m").get<double>()},
                             jn.at("height_m").get<double>(),
                             kind == "donor" ? NodeKind::iab_donor : NodeKind::iab_node,
                             jn.value("buffer_capacity", std::size_t{512})});
        }
        return Topology(std::move(nodes), j.value("max_link_range_m", 300.0));
    } catch (const json::exception& e) {
        throw std::runtime_error(fmt::format("topology parse error: {}", e.what()));
    }
}

Topology load_topology(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open topology file '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return topology_from_json(ss.str());
}

void save_topology(const Topology& topology, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write topology file '{}'", path.string()));
    out << topology_to_json(topology) << '\n';
}

}  // namespace safehaul
