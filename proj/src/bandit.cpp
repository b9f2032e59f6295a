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

#include "safehaul/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace safehaul {

std::vector<std::string> LearnerConfig::violations() const {
    std::vector<std::string> out;
    if (!(alpha > 0.0 && alpha <= 1.0)) out.push_back(fmt::format("learner.alpha = {} must lie in (0, 1]", alpha));
    if (!(eta >= 0.0 && eta <= 1.0)) out.push_back(fmt::format("learner.eta = {} must lie in [0, 1]", eta));
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) {
        out.push_back(fmt::format("learner.epsilon0 = {} must lie in [0, 1]", epsilon0));
    }
    if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) {
        out.push_back(fmt::format("learner.epsilon_decay = {} must lie in (0, 1]", epsilon_decay));
    }
    if (history_cap == 0) out.push_back("learner.history_cap must be positive");
    return out;
}

void LinkEstimate::update_mean(double reward, std::size_t history_cap, Rng& reservoir) {
    if (!std::isfinite(reward) || reward < 0.0) {
        throw std::invalid_argument(fmt::format("reward must be finite and non-negative, got {}", reward));
    }
    const auto k = static_cast<double>(pulls_);
    mean_ = (k * mean_ + reward) / (k + 1.0);
    ++pulls_;

    if (sorted_.size() >= history_cap) {
        if (uniform_index(reservoir, pulls_) >= history_cap) return;
        sorted_.erase(sorted_.begin() + static_cast<std::ptrdiff_t>(uniform_index(reservoir, sorted_.size())));
    }
    auto pos = std::upper_bound(sorted_.begin(), sorted_.end(), reward, std::greater<>{});
    sorted_.insert(pos, reward);
}

void LinkEstimate::refresh(double alpha, double eta) {
    cvar_ = sorted_.empty() ? 0.0 : estimate_cvar(sorted_, alpha);
    q_ = q_value(mean_, cvar_, eta);
}

std::size_t tail_count(std::size_t k, double alpha) {
    // The relative nudge keeps products such as 0.1 * 30 from rounding up past
    // an integer.
    const double x = alpha * static_cast<double>(k) * (1.0 - 1e-12);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(x)), 1, k);
}

double estimate_cvar(std::span<const double> rewards_desc, double alpha) {
    if (rewards_desc.empty()) throw std::domain_error("CVaR estimate undefined for an empty reward history");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    const std::size_t m = tail_count(rewards_desc.size(), alpha);
    const double sum = std::accumulate(rewards_desc.begin(), rewards_desc.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
    return sum / static_cast<double>(m);
}

double cvar_reference(std::span<const double> samples, double alpha, std::size_t q_grid) {
    if (samples.empty()) throw std::domain_error("CVaR reference undefined for an empty sample");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    std::vector<double> suffix(s.size() + 1, 0.0);  // suffix[i] = sum of s[i..]
    for (std::size_t i = s.size(); i-- > 0;) suffix[i] = suffix[i + 1] + s[i];
    const double n = static_cast<double>(s.size());

    auto objective = [&](double q) {
        const auto first_above = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), q) - s.begin());
        const double excess = suffix[first_above] - q * static_cast<double>(s.size() - first_above);
        return q + excess / (n * alpha);
    };

    double best = std::numeric_limits<double>::infinity();
    for (double q : s) best = std::min(best, objective(q));
    const double lo = s.front();
    const double hi = s.back();
    for (std::size_t g = 0; g < q_grid && hi > lo; ++g) {
        best = std::min(best, objective(lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(q_grid - 1)));
    }
    return best;
}

}  // namespace safehaul
