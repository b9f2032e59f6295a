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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace safehaul {

/// Dense node index in [0, N + D), stable for the whole run.
enum class NodeId : std::uint32_t {};

constexpr std::uint32_t index(NodeId id) noexcept { return static_cast<std::uint32_t>(id); }
constexpr NodeId node_id(std::size_t i) noexcept { return static_cast<NodeId>(i); }

/// Directed link (from -> to).
struct Edge {
    NodeId from{};
    NodeId to{};

    auto operator<=>(const Edge&) const = default;
};

enum class ActionKind : std::uint8_t { transmit, receive, idle };

/// A per-slot backhaul decision of one IAB-node. Transmit and receive carry
/// the directed link they refer to; idle is the pseudo-link (n, n).
struct Action {
    ActionKind kind = ActionKind::idle;
    NodeId from{};
    NodeId to{};

    static constexpr Action transmit(NodeId n, NodeId l) noexcept { return {ActionKind::transmit, n, l}; }
    static constexpr Action receive(NodeId l, NodeId n) noexcept { return {ActionKind::receive, l, n}; }
    static constexpr Action idle(NodeId n) noexcept { return {ActionKind::idle, n, n}; }

    constexpr Edge link() const noexcept { return {from, to}; }
    constexpr bool is_transmit() const noexcept { return kind == ActionKind::transmit; }
    constexpr bool is_receive() const noexcept { return kind == ActionKind::receive; }
    constexpr bool is_idle() const noexcept { return kind == ActionKind::idle; }

    auto operator<=>(const Action&) const = default;
};

std::string to_string(ActionKind kind);
std::string to_string(const Action& action);

}  // namespace safehaul

template <>
struct std::hash<safehaul::NodeId> {
    std::size_t operator()(safehaul::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(safehaul::index(id)); }
};

template <>
struct std::hash<safehaul::Edge> {
    std::size_t operator()(const safehaul::Edge& e) const noexcept {
        return (static_cast<std::size_t>(safehaul::index(e.from)) << 32) ^ safehaul::index(e.to);
    }
};

template <>
struct std::hash<safehaul::Action> {
    std::size_t operator()(const safehaul::Action& a) const noexcept {
        return std::hash<safehaul::Edge>{}(a.link()) * 3 + static_cast<std::size_t>(a.kind);
    }
};
