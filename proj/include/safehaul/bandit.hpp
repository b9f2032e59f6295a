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
#include <stdexcept>
#include <string>
#include <vector>

#include "safehaul/rng.hpp"

namespace safehaul {

struct LearnerConfig {
    double alpha = 0.1;            // risk level, (0, 1]
    double eta = 1.0;              // weight of the tail term, [0, 1]
    double epsilon0 = 0.1;         // initial exploration rate
    double epsilon_decay = 0.9995; // multiplicative decay per slot
    std::size_t history_cap = 100000;

    /// Every violated range, empty when valid.
    std::vector<std::string> violations() const;
};

/// Learned state of one arm: pull count, running mean of the observed
/// latency rewards, the reward history in descending order, and the derived
/// CVaR and Q values.
class LinkEstimate {
public:
    std::uint64_t pulls() const noexcept { return pulls_; }
    double mean_latency() const noexcept { return mean_; }
    double cvar() const noexcept { return cvar_; }
    double q() const noexcept { return q_; }
    std::span<const double> rewards_sorted() const noexcept { return sorted_; }

    /// mean' = (K * mean + r) / (K + 1); the reward joins the sorted history.
    /// Once the history holds `history_cap` values, a new reward replaces a
    /// uniformly chosen stored one with probability cap / (K + 1).
    void update_mean(double reward, std::size_t history_cap, Rng& reservoir);

    /// Recompute CVaR and Q from the current history.
    void refresh(double alpha, double eta);

    void update(double reward, const LearnerConfig& config, Rng& reservoir) {
        update_mean(reward, config.history_cap, reservoir);
        refresh(config.alpha, config.eta);
    }

private:
    std::uint64_t pulls_ = 0;
    double mean_ = 0.0;
    double cvar_ = 0.0;
    double q_ = 0.0;
    std::vector<double> sorted_;  // non-increasing
};

/// Number of tail samples averaged by the estimator: ceil(alpha * k).
std::size_t tail_count(std::size_t k, double alpha);

/// Mean of the ceil(alpha * K) largest rewards of a descending list.
/// Throws std::domain_error on an empty list.
double estimate_cvar(std::span<const double> rewards_desc, double alpha);

/// CVaR as min over q of q + E[max(s - q, 0)] / alpha on the empirical
/// distribution. Evaluated at every sample (the objective is piecewise linear
/// with breakpoints there) and at `q_grid` evenly spaced points of the sample
/// range.
double cvar_reference(std::span<const double> samples, double alpha, std::size_t q_grid = 1000);

inline double q_value(double mean, double cvar, double eta) { return mean + eta * cvar; }

/// With probability epsilon a uniform pick from `available`, otherwise the
/// available arm of minimum Q, ties broken uniformly. `q_of(arm)` returns the
/// arm's Q. One uniform draw decides exploration; a second is taken only when
/// exploring or when the minimum is tied.
template <typename Arm, typename QLookup>
Arm epsilon_greedy(std::span<const Arm> available, QLookup&& q_of, double epsilon, Rng& rng) {
    if (available.empty()) throw std::invalid_argument("epsilon_greedy: no available arm");
    if (uniform01(rng) < epsilon) return available[uniform_index(rng, available.size())];
    double best = q_of(available[0]);
    std::vector<std::size_t> ties{0};
    for (std::size_t i = 1; i < available.size(); ++i) {
        const double q = q_of(available[i]);
        if (q < best) {
            best = q;
            ties.assign(1, i);
        } else if (q == best) {
            ties.push_back(i);
        }
    }
    if (ties.size() == 1) return available[ties.front()];
    return available[ties[uniform_index(rng, ties.size())]];
}

template <typename Arm>
Arm epsilon_greedy(const std::map<Arm, double>& q_by_arm, std::span<const Arm> available, double epsilon, Rng& rng) {
    return epsilon_greedy(
        available,
        [&](const Arm& a) {
            auto it = q_by_arm.find(a);
            if (it == q_by_arm.end()) throw std::invalid_argument("epsilon_greedy: available arm without a Q entry");
            return it->second;
        },
        epsilon, rng);
}

}  // namespace safehaul
