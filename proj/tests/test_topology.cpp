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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <queue>

#include "safehaul/topology.hpp"

using namespace safehaul;

namespace {

Node iab(std::size_t i, double x, double y = 0.0) { return {node_id(i), {x, y}, 15.0, NodeKind::iab_node, 512}; }
Node donor(std::size_t i, double x, double y = 0.0) { return {node_id(i), {x, y}, 15.0, NodeKind::iab_donor, 512}; }

// Line: 0 -- 1 -- 2(donor), 250 m apart, range 300.
Topology line() { return Topology({iab(0, 0.0), iab(1, 250.0), donor(2, 500.0)}, 300.0); }

std::string invariant_of(std::vector<Node> nodes, double range) {
    try {
        Topology t(std::move(nodes), range);
    } catch (const TopologyError& e) {
        return e.invariant();
    }
    return "";
}

// Breadth-first hop count to the nearest donor, written independently of the library.
std::vector<int> bfs_hops(const Topology& t) {
    const std::size_t n = t.size();
    std::vector<int> hops(n, -1);
    std::queue<std::size_t> q;
    for (NodeId d : t.donor_ids()) {
        hops[index(d)] = 0;
        q.push(index(d));
    }
    while (!q.empty()) {
        const std::size_t v = q.front();
        q.pop();
        for (std::size_t u = 0; u < n; ++u) {
            if (hops[u] >= 0 || u == v) continue;
            if (t.distance_m(node_id(u), node_id(v)) <= t.max_link_range_m()) {
                hops[u] = hops[v] + 1;
                q.push(u);
            }
        }
    }
    return hops;
}

}  // namespace

TEST(Topology, CandidateEdgesAreOrderedPairsWithinRange) {
    const Topology t = line();
    const std::vector<Edge> expect{{node_id(0), node_id(1)}, {node_id(1), node_id(0)}, {node_id(1), node_id(2)},
                                   {node_id(2), node_id(1)}};
    ASSERT_EQ(t.candidate_edges().size(), expect.size());
    EXPECT_TRUE(std::equal(expect.begin(), expect.end(), t.candidate_edges().begin()));
    EXPECT_FALSE(t.edge_index({node_id(0), node_id(2)}).has_value());
    EXPECT_EQ(t.edge_index({node_id(1), node_id(2)}), 2u);
}

TEST(Topology, OutAndInEdgesIndexTheCandidates) {
    const Topology t = line();
    for (std::size_t v = 0; v < t.size(); ++v) {
        for (std::size_t k : t.out_edges(node_id(v))) EXPECT_EQ(t.candidate_edges()[k].from, node_id(v));
        for (std::size_t k : t.in_edges(node_id(v))) EXPECT_EQ(t.candidate_edges()[k].to, node_id(v));
    }
    EXPECT_EQ(t.out_edges(node_id(1)).size(), 2u);
}

TEST(Topology, HopsToDonor) {
    const Topology t = line();
    EXPECT_EQ(t.hops_to_donor(), (std::vector<int>{2, 1, 0}));
    EXPECT_EQ(t.donor_ids().size(), 1u);
    EXPECT_EQ(t.iab_node_ids().size(), 2u);
}

TEST(Topology, DistanceIncludesHeightDifference) {
    Node a = iab(0, 0.0);
    Node b = donor(1, 30.0);
    b.height_m = 55.0;
    const Topology t({a, b}, 300.0);
    EXPECT_DOUBLE_EQ(t.horizontal_distance_m(node_id(0), node_id(1)), 30.0);
    EXPECT_DOUBLE_EQ(t.distance_m(node_id(0), node_id(1)), 50.0);
}

TEST(Topology, RejectsBrokenDeployments) {
    EXPECT_EQ(invariant_of({iab(0, 0.0), donor(1, 100.0)}, 0.0), "positive_link_range");
    EXPECT_EQ(invariant_of({iab(0, 0.0), donor(2, 100.0)}, 300.0), "dense_ids");
    EXPECT_EQ(invariant_of({iab(0, 0.0), iab(1, 100.0)}, 300.0), "nonempty_donors");
    EXPECT_EQ(invariant_of({iab(0, 0.0), donor(1, 1000.0)}, 300.0), "donor_reachability");
    EXPECT_EQ(invariant_of({iab(0, NAN), donor(1, 0.0)}, 300.0), "finite_position");
    Node flat = iab(0, 0.0);
    flat.height_m = 0.0;
    EXPECT_EQ(invariant_of({flat, donor(1, 0.0)}, 300.0), "positive_height");
    Node tiny = iab(0, 0.0);
    tiny.buffer_capacity = 0;
    EXPECT_EQ(invariant_of({tiny, donor(1, 0.0)}, 300.0), "positive_buffer_capacity");
}

TEST(Topology, AvailableEdgesDropBlockedLinks) {
    const Topology t = line();
    const EdgeSet es = available_edges(t, {true, false, true, false}, 7);
    EXPECT_EQ(es.slot, 7u);
    EXPECT_EQ(es.size(), 2u);
    EXPECT_TRUE(es.contains({node_id(0), node_id(1)}));
    EXPECT_FALSE(es.contains({node_id(1), node_id(0)}));
    EXPECT_TRUE(es.contains({node_id(1), node_id(2)}));
}

TEST(TopologyGenerator, EveryNodeReachesADonor) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        GeneratorParams p;
        const Topology t = generate_topology(p, seed);
        ASSERT_EQ(t.size(), p.n_nodes + p.n_donors);
        EXPECT_EQ(t.donor_ids().size(), p.n_donors);
        const auto hops = t.hops_to_donor();
        EXPECT_EQ(hops, bfs_hops(t)) << "seed " << seed;
        EXPECT_TRUE(std::none_of(hops.begin(), hops.end(), [](int h) { return h < 0; }));
        const double side = std::sqrt(p.area_m2);
        for (const Node& n : t.nodes()) {
            EXPECT_GE(n.position.x_m, 0.0);
            EXPECT_LE(n.position.x_m, side);
            EXPECT_GE(n.position.y_m, 0.0);
            EXPECT_LE(n.position.y_m, side);
        }
        for (std::size_t i = 0; i < p.n_nodes; ++i) EXPECT_FALSE(t.is_donor(node_id(i)));
    }
}

TEST(TopologyGenerator, SameSeedSameDeployment) {
    GeneratorParams p;
    EXPECT_EQ(generate_topology(p, 42), generate_topology(p, 42));
    EXPECT_FALSE(generate_topology(p, 42) == generate_topology(p, 43));
}

TEST(TopologyGenerator, GivesUpWhenRangeCannotConnect) {
    GeneratorParams p;
    p.area_m2 = 1e10;
    p.max_attempts = 3;
    EXPECT_THROW(generate_topology(p, 1), TopologyError);
}

TEST(TopologyIo, JsonRoundTrip) {
    const Topology t = generate_topology(GeneratorParams{}, 5);
    EXPECT_EQ(topology_from_json(topology_to_json(t)), t);
    const auto path = std::filesystem::temp_directory_path() / "safehaul_topology_roundtrip.json";
    save_topology(t, path);
    EXPECT_EQ(load_topology(path), t);
    std::filesystem::remove(path);
}

TEST(TopologyIo, RejectsUnknownKind) {
    const std::string text =
        R"({"nodes":[{"id":0,"x_m":0,"y_m":0,"height_m":15,"kind":"relay"}],"max_link_range_m":300})";
    EXPECT_THROW(topology_from_json(text), std::exception);
}
