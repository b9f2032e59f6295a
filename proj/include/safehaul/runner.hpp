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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "safehaul/config.hpp"
#include "safehaul/metrics.hpp"

namespace safehaul {

struct Job {
    std::string variant;
    RunConfig config;  // config.algo selects the policy
    std::uint64_t seed = 1;

    /// out_root/<variant>/<algo>/seed_<seed>
    std::filesystem::path directory(const std::filesystem::path& out_root) const;
};

struct JobResult {
    Job job;
    std::optional<RunSummary> summary;  // empty when the run threw
    std::string error;
    double seconds = 0.0;

    bool ok() const;
};

/// One job per (variant, algorithm, seed). `algos` replaces the variants' own
/// algorithm lists when non-empty. Seeds are first_seed, first_seed + 1, ...
std::vector<Job> expand_jobs(const std::vector<Variant>& variants, const std::vector<Algorithm>& algos);

/// Runs one job; writes its outputs (and events.jsonl when tracing) below
/// `out_root` if given. Exceptions are captured in the result.
JobResult run_job(const Job& job, const std::optional<std::filesystem::path>& out_root);

/// SAFEHAUL_SIM_THREADS if set to a positive integer, else the hardware
/// concurrency (at least 1).
unsigned worker_threads();

/// Runs every job on up to `threads` workers, then writes one
/// merged_summary.json per (variant, algorithm). Returns 0 iff every job
/// completed with no invariant violation.
int run_jobs(const std::vector<Job>& jobs, const std::filesystem::path& out_root, unsigned threads, std::ostream& log);

}  // namespace safehaul
