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
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "safehaul/bandit.hpp"

using namespace safehaul;

namespace {

// Upper-tail mean straight from the definition: average of the m largest values,
// m = smallest integer with m >= alpha * K.
double tail_mean_oracle(std::vector<double> v, double alpha) {
    std::sort(v.begin(), v.end(), std::greater<>());
    std::size_t m = 1;
    while (static_cast<double>(m) < alpha * static_cast<double>(v.size()) - 1e-9) ++m;
    return std::accumulate(v.begin(), v.begin() + static_cast<long>(m), 0.0) / static_cast<double>(m);
}

std::vector<double> random_samples(Rng& rng, std::size_t n, double scale) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * uniform01(rng) * uniform01(rng);
    return v;
}

}  // namespace

TEST(Cvar, HandExample) {
    const std::vector<double> r{9, 5, 3, 1};
    EXPECT_DOUBLE_EQ(estimate_cvar(r, 0.5), 7.0);
    EXPECT_DOUBLE_EQ(estimate_cvar(r, 0.25), 9.0);
    EXPECT_DOUBLE_EQ(estimate_cvar(r, 1.0), 4.5);
    EXPECT_DOUBLE_EQ(estimate_cvar(r, 0.3), 7.0);  // ceil(1.2) = 2
}

TEST(Cvar, TailCount) {
    EXPECT_EQ(tail_count(10, 0.1), 1u);
    EXPECT_EQ(tail_count(10, 0.3), 3u);  // 0.3 * 10 is 3.0000000000000004 in binary
    EXPECT_EQ(tail_count(10, 0.11), 2u);
    EXPECT_EQ(tail_count(3, 0.01), 1u);
    EXPECT_EQ(tail_count(7, 1.0), 7u);
}

TEST(Cvar, EmptyHistoryThrows) { EXPECT_THROW(estimate_cvar({}, 0.1), std::domain_error); }

TEST(Cvar, MatchesDefinitionOnRandomSets) {
    Rng rng = make_rng(11, Stream::agent);
    for (int trial = 0; trial < 200; ++trial) {
        auto v = random_samples(rng, 1 + uniform_index(rng, 300), 40.0);
        std::vector<double> desc = v;
        std::sort(desc.begin(), desc.end(), std::greater<>());
        for (double alpha : {0.05, 0.1, 0.3, 0.5, 1.0}) {
            EXPECT_NEAR(estimate_cvar(desc, alpha), tail_mean_oracle(v, alpha), 1e-9);
        }
    }
}

TEST(Cvar, BoundedByMeanAndMaxAndMonotoneInAlpha) {
    Rng rng = make_rng(12, Stream::agent);
    for (int trial = 0; trial < 100; ++trial) {
        auto v = random_samples(rng, 50, 10.0);
        std::sort(v.begin(), v.end(), std::greater<>());
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / 50.0;
        double prev = v.front();
        for (int step = 1; step <= 50; ++step) {
            const double alpha = 0.02 * step;
            const double c = estimate_cvar(v, alpha);
            EXPECT_GE(c, mean - 1e-9);
            EXPECT_LE(c, v.front() + 1e-12);
            EXPECT_LE(c, prev + 1e-12);
            prev = c;
        }
    }
}

TEST(Cvar, ReferenceAgreesWithinOneSampleShare) {
    Rng rng = make_rng(13, Stream::agent);
    for (int trial = 0; trial < 100; ++trial) {
        auto v = random_samples(rng, 2 + uniform_index(rng, 200), 30.0);
        std::vector<double> desc = v;
        std::sort(desc.begin(), desc.end(), std::greater<>());
        const double range = desc.front() - desc.back();
        for (double alpha : {0.05, 0.1, 0.5, 1.0}) {
            const double bound = range / static_cast<double>(tail_count(v.size(), alpha)) + 1e-9;
            EXPECT_LE(std::abs(estimate_cvar(desc, alpha) - cvar_reference(v, alpha)), bound);
        }
    }
}

TEST(Cvar, ReferenceIsExactWhenAlphaKIsIntegral) {
    const std::vector<double> v{1, 3, 5, 9};
    EXPECT_NEAR(cvar_reference(v, 0.5), 7.0, 1e-12);
    EXPECT_NEAR(cvar_reference(v, 1.0), 4.5, 1e-12);
}

TEST(LinkEstimate, RunningMean) {
    LinkEstimate e;
    Rng res = make_rng(1, Stream::reservoir);
    e.update_mean(4.0, 100, res);
    e.update_mean(6.0, 100, res);
    EXPECT_EQ(e.pulls(), 2u);
    EXPECT_DOUBLE_EQ(e.mean_latency(), 5.0);
    e.update_mean(8.0, 100, res);
    EXPECT_DOUBLE_EQ(e.mean_latency(), 6.0);
    EXPECT_TRUE(std::is_sorted(e.rewards_sorted().begin(), e.rewards_sorted().end(), std::greater<>()));
}

TEST(LinkEstimate, RejectsNegativeAndNonFiniteRewards) {
    LinkEstimate e;
    Rng res = make_rng(1, Stream::reservoir);
    EXPECT_THROW(e.update_mean(-1.0, 10, res), std::invalid_argument);
    EXPECT_THROW(e.update_mean(NAN, 10, res), std::invalid_argument);
    EXPECT_THROW(e.update_mean(INFINITY, 10, res), std::invalid_argument);
    EXPECT_EQ(e.pulls(), 0u);
}

TEST(LinkEstimate, QCombinesMeanAndTail) {
    LinkEstimate e;
    Rng res = make_rng(1, Stream::reservoir);
    LearnerConfig cfg;
    cfg.alpha = 0.5;
    cfg.eta = 0.5;
    for (double r : {1.0, 9.0, 3.0, 5.0}) e.update(r, cfg, res);
    EXPECT_DOUBLE_EQ(e.mean_latency(), 4.5);
    EXPECT_DOUBLE_EQ(e.cvar(), 7.0);
    EXPECT_DOUBLE_EQ(e.q(), 4.5 + 0.5 * 7.0);
    EXPECT_DOUBLE_EQ(q_value(2.0, 3.0, 0.0), 2.0);
}

TEST(LinkEstimate, HistoryCapHoldsButMeanSeesEverything) {
    LinkEstimate e;
    Rng res = make_rng(2, Stream::reservoir);
    double sum = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double r = static_cast<double>(i % 17);
        sum += r;
        e.update_mean(r, 50, res);
        EXPECT_LE(e.rewards_sorted().size(), 50u);
    }
    EXPECT_EQ(e.rewards_sorted().size(), 50u);
    EXPECT_NEAR(e.mean_latency(), sum / 1000.0, 1e-9);
    EXPECT_TRUE(std::is_sorted(e.rewards_sorted().begin(), e.rewards_sorted().end(), std::greater<>()));
}

TEST(LearnerConfig, Violations) {
    EXPECT_TRUE(LearnerConfig{}.violations().empty());
    LearnerConfig bad;
    bad.alpha = 0.0;
    bad.eta = 2.0;
    bad.epsilon0 = -0.1;
    EXPECT_EQ(bad.violations().size(), 3u);
}

TEST(EpsilonGreedy, GreedyPicksMinimumQ) {
    const std::vector<int> arms{0, 1, 2};
    const std::map<int, double> q{{0, 3.0}, {1, 1.0}, {2, 2.0}};
    Rng rng = make_rng(1, Stream::agent);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(epsilon_greedy<int>(q, arms, 0.0, rng), 1);
}

TEST(EpsilonGreedy, ExploresUniformly) {
    const std::vector<int> arms{0, 1, 2, 3};
    const std::map<int, double> q{{0, 0.0}, {1, 1.0}, {2, 2.0}, {3, 3.0}};
    Rng rng = make_rng(2, Stream::agent);
    std::vector<int> count(4, 0);
    const int n = 40000;
    for (int i = 0; i < n; ++i) ++count[static_cast<std::size_t>(epsilon_greedy<int>(q, arms, 1.0, rng))];
    for (int c : count) EXPECT_NEAR(c / static_cast<double>(n), 0.25, 0.015);
}

TEST(EpsilonGreedy, ExplorationShareMatchesEpsilon) {
    const std::vector<int> arms{0, 1};
    const std::map<int, double> q{{0, 0.0}, {1, 1.0}};
    Rng rng = make_rng(3, Stream::agent);
    int worse = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) worse += epsilon_greedy<int>(q, arms, 0.2, rng);
    EXPECT_NEAR(worse / static_cast<double>(n), 0.1, 0.01);  // half of the explored picks
}

TEST(EpsilonGreedy, TiesSplitEvenly) {
    const std::vector<int> arms{0, 1, 2};
    const std::map<int, double> q{{0, 1.0}, {1, 1.0}, {2, 5.0}};
    Rng rng = make_rng(4, Stream::agent);
    int first = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const int a = epsilon_greedy<int>(q, arms, 0.0, rng);
        ASSERT_NE(a, 2);
        first += a == 0;
    }
    EXPECT_NEAR(first / static_cast<double>(n), 0.5, 0.02);
}

TEST(EpsilonGreedy, ErrorsOnEmptyOrUnknownArms) {
    Rng rng = make_rng(5, Stream::agent);
    const std::map<int, double> q{{0, 1.0}};
    EXPECT_THROW(epsilon_greedy<int>(q, std::vector<int>{}, 0.0, rng), std::invalid_argument);
    EXPECT_THROW(epsilon_greedy<int>(q, std::vector<int>{0, 7}, 0.0, rng), std::invalid_argument);
}
