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

#include "safehaul/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace safehaul {

ActionSet action_set(const Topology& topology, NodeId node) {
    if (topology.is_donor(node)) {
        throw std::invalid_argument(fmt::format("node {} is a donor; donors do not run agents", index(node)));
    }
    ActionSet set{node, {}};
    const auto edges = topology.candidate_edges();
    for (std::size_t k : topology.out_edges(node)) set.actions.push_back(Action::transmit(node, edges[k].to));
    for (std::size_t k : topology.in_edges(node)) {
        if (!topology.is_donor(edges[k].from)) set.actions.push_back(Action::receive(edges[k].from, node));
    }
    set.actions.push_back(Action::idle(node));
    return set;
}

std::vector<Action> available_actions(const ActionSet& set, const EdgeSet& edges) {
    std::vector<Action> out;
    out.reserve(set.actions.size());
    for (const Action& a : set.actions) {
        if (a.is_idle() || edges.contains(a.link())) out.push_back(a);
    }
    return out;
}

double estimated_next_hop_latency(const Topology& topology, NodeId node, const EdgeSet& edges,
                                  const std::function<double(Edge)>& mean_of, double t_max_ms) {
    if (topology.is_donor(node)) return 0.0;
    double best = t_max_ms;
    const auto cand = topology.candidate_edges();
    for (std::size_t k : topology.out_edges(node)) {
        if (edges.contains(cand[k])) best = std::min(best, mean_of(cand[k]));
    }
    return best;
}

double compute_reward(const Action& action, double tq_self_ms, double tq_next_ms, double t_tx_ms,
                      double next_hop_est_ms) {
    if (tq_self_ms < 0.0 || tq_next_ms < 0.0 || t_tx_ms < 0.0 || next_hop_est_ms < 0.0) {
        throw std::invalid_argument("compute_reward: inputs must be non-negative");
    }
    if (action.is_transmit()) return tq_next_ms + t_tx_ms + next_hop_est_ms;
    return tq_self_ms + next_hop_est_ms;
}

LearningAgent::LearningAgent(ActionSet set, LearnerConfig config, Rng rng)
    : Policy(std::move(set)),
      config_(config),
      pulls_(set_.actions.size(), 0),
      rng_(std::move(rng)),
      epsilon_(config.epsilon0) {
    for (std::size_t i = 0; i < set_.actions.size(); ++i) arm_of_.emplace(set_.actions[i], i);
}

std::size_t LearningAgent::arm(const Action& action) const {
    auto it = arm_of_.find(action);
    if (it == arm_of_.end()) {
        throw std::invalid_argument(fmt::format("{} is not an action of node {}", to_string(action), index(owner())));
    }
    return it->second;
}

std::uint64_t LearningAgent::pulls(const Action& action) const { return pulls_[arm(action)]; }

Action LearningAgent::propose(std::span<const Action> available, const ProposalContext&) {
    if (available.empty()) throw std::invalid_argument("propose: empty available set");
    if (!started_) {
        started_ = true;
        return Action::idle(owner());
    }
    for (const Action& a : available) {
        if (pulls_[arm(a)] == 0) return a;
    }
    return epsilon_greedy(available, [this](const Action& a) { return q(a); }, epsilon_, rng_);
}

void LearningAgent::observe(const Action& performed, double reward_ms) {
    const std::size_t k = arm(performed);
    update_arm(k, reward_ms);
    ++pulls_[k];
    epsilon_ *= config_.epsilon_decay;
}

SafehaulAgent::SafehaulAgent(ActionSet set, LearnerConfig config, Rng rng, Rng reservoir)
    : LearningAgent(std::move(set), config, std::move(rng)),
      estimates_(set_.actions.size()),
      reservoir_(std::move(reservoir)) {}

double SafehaulAgent::q(const Action& action) const { return estimates_[arm(action)].q(); }

double SafehaulAgent::mean_latency(const Action& action) const { return estimates_[arm(action)].mean_latency(); }

void SafehaulAgent::update_arm(std::size_t k, double reward_ms) { estimates_[k].update(reward_ms, config_, reservoir_); }

RiskNeutralAgent::RiskNeutralAgent(ActionSet set, LearnerConfig config, Rng rng)
    : LearningAgent(std::move(set), config, std::move(rng)), means_(set_.actions.size(), 0.0) {}

void RiskNeutralAgent::update_arm(std::size_t k, double reward_ms) {
    if (!std::isfinite(reward_ms) || reward_ms < 0.0) {
        throw std::invalid_argument(fmt::format("reward must be finite and non-negative, got {}", reward_ms));
    }
    const auto n = static_cast<double>(pulls_[k]);
    means_[k] = (n * means_[k] + reward_ms) / (n + 1.0);
}

Action mlr_policy(std::span<const Action> available, const std::function<std::uint64_t(const Action&)>& rate_of,
                  bool tx_empty) {
    if (available.empty()) throw std::invalid_argument("mlr_policy: empty available set");
    const Action* best = nullptr;
    std::uint64_t best_rate = 0;
    for (const Action& a : available) {
        if (!a.is_transmit()) continue;
        const std::uint64_t r = rate_of(a);
        if (best == nullptr || r > best_rate) {
            best = &a;
            best_rate = r;
        }
    }
    if (tx_empty || best == nullptr) {
        auto idle = std::find_if(available.begin(), available.end(), [](const Action& a) { return a.is_idle(); });
        if (idle != available.end()) return *idle;
        return Action::idle(available.front().from);
    }
    return *best;
}

MlrAgent::MlrAgent(const Topology& topology, ActionSet set)
    : Policy(std::move(set)), topology_(&topology), hops_(topology.hops_to_donor()) {}

Action MlrAgent::propose(std::span<const Action> available, const ProposalContext& context) {
    std::vector<Action> forward;
    forward.reserve(available.size());
    const int own = hops_[index(owner())];
    for (const Action& a : available) {
        if (a.is_idle() || (a.is_transmit() && hops_[index(a.to)] >= 0 && hops_[index(a.to)] < own)) {
            forward.push_back(a);
        }
    }
    if (forward.empty()) return Action::idle(owner());
    auto rate_of = [&](const Action& a) -> std::uint64_t {
        auto k = topology_->edge_index(a.link());
        return k && *k < context.clear_rate_bits.size() ? context.clear_rate_bits[*k] : 0;
    };
    return mlr_policy(forward, rate_of, context.tx_empty);
}

}  // namespace safehaul
