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

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "safehaul/config.hpp"
#include "safehaul/runner.hpp"

using namespace safehaul;

int main(int argc, char** argv) {
    CLI::App app{"Slot-level simulator of self-backhauled mmWave IAB networks"};
    std::string config_path;
    std::optional<int> scenario;
    std::string algo;
    std::optional<std::uint64_t> seeds;
    std::optional<std::uint64_t> slots;
    std::string out = "out";
    bool validate_only = false;

    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--scenario", scenario, "Scenario preset")->check(CLI::Range(1, 4));
    app.add_option("--algo", algo, "Algorithm to run")
        ->check(CLI::IsMember({"safehaul", "risk_neutral", "mlr", "all"}));
    app.add_option("--seeds", seeds, "Number of seeds per configuration")->check(CLI::PositiveNumber);
    app.add_option("--slots", slots, "Slots per run")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "Output directory");
    app.add_flag("--validate-only", validate_only, "Report configuration problems and exit");
    CLI11_PARSE(app, argc, argv);

    std::vector<std::string> problems;
    RunConfig base;
    if (!config_path.empty()) {
        try {
            std::ifstream in(config_path);
            base = config_from_json(nlohmann::json::parse(in), base, problems);
        } catch (const std::exception& e) {
            std::cerr << "error: " << config_path << ": " << e.what() << '\n';
            return 2;
        }
    }
    if (seeds) base.n_seeds = *seeds;
    if (slots) base.slots = *slots;
    for (auto& v : validate(base)) problems.push_back(std::move(v));

    if (validate_only) {
        if (problems.empty()) {
            std::cout << "configuration is valid\n";
            return 0;
        }
        for (const auto& p : problems) std::cout << p << '\n';
        return 1;
    }
    if (!problems.empty()) {
        std::cerr << ConfigError(problems).what() << '\n';
        return 2;
    }

    std::vector<Variant> variants;
    if (scenario) {
        variants = scenario_variants(*scenario, base);
    } else {
        variants.push_back({"run", base, {base.algo}});
    }
    std::vector<Algorithm> algos;
    if (algo == "all") {
        algos = {Algorithm::safehaul, Algorithm::risk_neutral, Algorithm::mlr};
    } else if (!algo.empty()) {
        algos = {parse_algorithm(algo)};
    }
    // Presets change parameters, so recheck each variant.
    for (const Variant& v : variants) {
        if (auto bad = validate(v.config); !bad.empty()) {
            std::cerr << v.label << ": " << ConfigError(bad).what() << '\n';
            return 2;
        }
    }

    const auto jobs = expand_jobs(variants, algos);
    const unsigned threads = worker_threads();
    std::cerr << fmt::format("{} runs on {} thread(s), writing to {}\n", jobs.size(), threads, out);
    return run_jobs(jobs, out, threads, std::cerr);
}
