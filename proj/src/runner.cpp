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

#include "safehaul/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "safehaul/engine.hpp"

namespace safehaul {

std::filesystem::path Job::directory(const std::filesystem::path& out_root) const {
    return out_root / variant / to_string(config.algo) / fmt::format("seed_{}", seed);
}

bool JobResult::ok() const {
    if (!summary) return false;
    for (const auto& [name, count] : summary->invariant_violations) {
        if (count != 0) return false;
    }
    return true;
}

std::vector<Job> expand_jobs(const std::vector<Variant>& variants, const std::vector<Algorithm>& algos) {
    std::vector<Job> jobs;
    for (const Variant& v : variants) {
        for (Algorithm a : algos.empty() ? v.algos : algos) {
            for (std::uint64_t k = 0; k < v.config.n_seeds; ++k) {
                Job j{v.label, v.config, v.config.first_seed + k};
                j.config.algo = a;
                jobs.push_back(std::move(j));
            }
        }
    }
    return jobs;
}

JobResult run_job(const Job& job, const std::optional<std::filesystem::path>& out_root) {
    JobResult r{job, std::nullopt, {}, 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Simulation sim(job.config, job.seed);
        std::ofstream events;
        if (out_root && job.config.trace_events) {
            const auto dir = job.directory(*out_root);
            std::filesystem::create_directories(dir);
            events.open(dir / "events.jsonl", std::ios::trunc);
            if (!events) throw std::runtime_error(fmt::format("cannot write {}", (dir / "events.jsonl").string()));
            sim.set_event_sink(&events);
        }
        sim.run();
        r.summary = sim.summary();
        if (out_root) write_outputs(*r.summary, job.directory(*out_root));
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

unsigned worker_threads() {
    if (const char* env = std::getenv("SAFEHAUL_SIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int run_jobs(const std::vector<Job>& jobs, const std::filesystem::path& out_root, unsigned threads, std::ostream& log) {
    std::vector<JobResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            results[i] = run_job(jobs[i], out_root);
            std::lock_guard lock(log_mutex);
            const auto& r = results[i];
            if (!r.summary) {
                log << fmt::format("[error] {}/{}/seed_{}: {}\n", r.job.variant, to_string(r.job.config.algo), r.job.seed, r.error);
            } else {
                log << fmt::format("[{}] {}/{}/seed_{} in {:.2f} s, mean latency {} ms, drop rate {:.4f}\n",
                                   r.ok() ? "done" : "invariant violation", r.job.variant, to_string(r.job.config.algo),
                                   r.job.seed, r.seconds,
                                   r.summary->mean_latency_ms ? fmt::format("{:.3f}", *r.summary->mean_latency_ms) : "n/a",
                                   r.summary->drop_rate);
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1))));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int status = 0;
    std::map<std::pair<std::string, std::string>, std::vector<RunSummary>> groups;
    for (const auto& r : results) {
        if (!r.ok()) status = 1;
        if (r.summary) groups[{r.job.variant, to_string(r.job.config.algo)}].push_back(*r.summary);
    }
    for (const auto& [key, runs] : groups) {
        const auto path = out_root / key.first / key.second / "merged_summary.json";
        std::ofstream out(path, std::ios::trunc);
        if (!out) {
            log << fmt::format("[error] cannot write {}\n", path.string());
            status = 1;
            continue;
        }
        out << merge(runs).dump(2) << '\n';
    }
    return status;
}

}  // namespace safehaul
