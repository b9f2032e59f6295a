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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "safehaul/bandit.hpp"
#include "safehaul/rng.hpp"
#include "safehaul/topology.hpp"
#include "safehaul/types.hpp"

namespace safehaul {

/// All actions of one IAB-node, in a fixed order: transmits along candidate
/// out-edges, receives along candidate in-edges from IAB-nodes, then idle.
struct ActionSet {
    NodeId owner{};
    std::vector<Action> actions;

    std::size_t size() const noexcept { return actions.size(); }
};

/// Throws std::invalid_argument for a donor.
ActionSet action_set(const Topology& topology, NodeId node);

/// Transmit/receive actions whose link is usable this slot, plus idle.
std::vector<Action> available_actions(const ActionSet& set, const EdgeSet& edges);

/// Lowest mean latency over the available out-links of `node`, as reported by
/// `mean_of(link)`. Donors return 0; a node with no usable out-link returns `t_max_ms`. The
/// result never exceeds `t_max_ms`.
double estimated_next_hop_latency(const Topology& topology, NodeId node, const EdgeSet& edges,
                                  const std::function<double(Edge)>& mean_of, double t_max_ms);

/// transmit(n, l): tq_next + t_tx + next_hop_est.
/// receive / idle: tq_self + next_hop_est (the node's own estimate).
double compute_reward(const Action& action, double tq_self_ms, double tq_next_ms, double t_tx_ms,
                      double next_hop_est_ms);

/// What a policy may look at when proposing.
struct ProposalContext {
    bool tx_empty = true;
    /// Interference-free bits per slot of each candidate edge.
    std::span<const std::uint64_t> clear_rate_bits;
};

class Policy {
public:
    virtual ~Policy() = default;

    NodeId owner() const noexcept { return set_.owner; }
    const ActionSet& actions() const noexcept { return set_; }

    /// Next action; `available` must contain idle.
    virtual Action propose(std::span<const Action> available, const ProposalContext& context) = 0;
    /// Feedback for the action actually executed.
    virtual void observe(const Action& performed, double reward_ms) = 0;
    /// Mean latency learned for an action (0 for policies that do not learn).
    virtual double mean_latency(const Action& action) const = 0;

    /// Alias for observe followed by propose.
    Action step(const Action& performed, double reward_ms, std::span<const Action> available,
                const ProposalContext& context) {
        observe(performed, reward_ms);
        return propose(available, context);
    }

protected:
    explicit Policy(ActionSet set) : set_(std::move(set)) {}
    ActionSet set_;
};

/// Shared learning loop: idle on the first proposal, then every arm once in
/// action-set order (skipping arms that are unavailable at the time), then
/// epsilon-greedy on the minimum of q_of(). Epsilon decays once per
/// observation.
class LearningAgent : public Policy {
public:
    Action propose(std::span<const Action> available, const ProposalContext& context) final;
    void observe(const Action& performed, double reward_ms) final;

    double epsilon() const noexcept { return epsilon_; }
    const LearnerConfig& config() const noexcept { return config_; }
    std::uint64_t pulls(const Action& action) const;
    /// Q of an action; unpulled arms report 0.
    virtual double q(const Action& action) const = 0;

protected:
    LearningAgent(ActionSet set, LearnerConfig config, Rng rng);
    std::size_t arm(const Action& action) const;
    virtual void update_arm(std::size_t arm, double reward_ms) = 0;

    LearnerConfig config_;
    std::vector<std::uint64_t> pulls_;

private:
    Rng rng_;
    double epsilon_;
    bool started_ = false;
    std::unordered_map<Action, std::size_t> arm_of_;
};

/// Risk-averse agent: Q = mean + eta * CVaR_alpha per arm.
class SafehaulAgent final : public LearningAgent {
public:
    SafehaulAgent(ActionSet set, LearnerConfig config, Rng rng, Rng reservoir);

    double q(const Action& action) const override;
    double mean_latency(const Action& action) const override;
    const LinkEstimate& estimate(const Action& action) const { return estimates_.at(arm(action)); }

private:
    void update_arm(std::size_t arm, double reward_ms) override;

    std::vector<LinkEstimate> estimates_;
    Rng reservoir_;
};

/// Risk-neutral baseline: Q = running mean latency.
class RiskNeutralAgent final : public LearningAgent {
public:
    RiskNeutralAgent(ActionSet set, LearnerConfig config, Rng rng);

    double q(const Action& action) const override { return mean_latency(action); }
    double mean_latency(const Action& action) const override { return means_.at(arm(action)); }

private:
    void update_arm(std::size_t arm, double reward_ms) override;

    std::vector<double> means_;
};

/// Greedy maximum-rate choice: the available transmit action with the largest
/// rate, or idle when the TX buffer is empty or no transmit is available.
/// Ties go to the earlier action in `available`.
Action mlr_policy(std::span<const Action> available, const std::function<std::uint64_t(const Action&)>& rate_of,
                  bool tx_empty);

/// Baseline policy wrapping mlr_policy. Only links toward nodes strictly
/// closer (in hops) to a donor are considered.
class MlrAgent final : public Policy {
public:
    MlrAgent(const Topology& topology, ActionSet set);

    Action propose(std::span<const Action> available, const ProposalContext& context) override;
    void observe(const Action&, double) override {}
    double mean_latency(const Action&) const override { return 0.0; }

private:
    const Topology* topology_;
    std::vector<int> hops_;
};

}  // namespace safehaul
