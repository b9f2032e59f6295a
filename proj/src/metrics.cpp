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

#include "safehaul/metrics.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace safehaul {

double quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Candlestick candlestick(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("candlestick of an empty sample");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    Candlestick c;
    c.min = s.front();
    c.max = s.back();
    c.mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    c.p10 = quantile(s, 0.1);
    c.p90 = quantile(s, 0.9);
    return c;
}

std::optional<double> system_average(const std::map<PairKey, double>& pair_averages) {
    if (pair_averages.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& [key, v] : pair_averages) sum += v;
    return sum / static_cast<double>(pair_averages.size());
}

Collector::Collector(std::vector<NodeId> ue_attach, std::uint64_t window_start, double slot_ms)
    : attach_(std::move(ue_attach)), window_start_(window_start), slot_ms_(slot_ms), ues_(attach_.size()) {}

void Collector::record_generated(std::uint32_t ue, std::uint64_t count) {
    ues_.at(ue).generated += count;
    generated_ += count;
}

void Collector::record_drop(std::uint32_t ue) {
    ++ues_.at(ue).dropped;
    ++dropped_;
}

void Collector::record_delivery(std::uint32_t ue, NodeId source, NodeId donor, std::uint64_t slot, double latency_ms,
                                std::uint32_t bits) {
    UeAcc& acc = ues_.at(ue);
    ++acc.delivered;
    ++delivered_;
    delivered_bits_total_ += bits;
    slot_bits_ += bits;

    auto [it, fresh] = slot_pairs_.emplace(PairKey{source, donor}, latency_ms);
    if (!fresh) it->second = std::max(it->second, latency_ms);
    if (slot < window_start_) return;
    acc.window_bits += bits;
    window_bits_ += bits;
    acc.pkt_latency_sum += latency_ms;
    ++acc.pkt_count;
    if (acc.current_max < 0.0) touched_ues_.push_back(ue);
    acc.current_max = std::max(acc.current_max, latency_ms);
}

void Collector::end_slot(std::uint64_t slot, std::size_t conflicts, std::size_t overrides) {
    if (!any_slot_) first_slot_ = slot;
    any_slot_ = true;
    last_slot_ = slot;

    SlotRow row;
    row.slot = slot;
    row.conflicts = conflicts;
    row.overrides = overrides;
    row.throughput_mbps = static_cast<double>(slot_bits_) / (slot_ms_ * 1e3);
    row.drop_rate = generated_ == 0 ? 0.0 : static_cast<double>(dropped_) / static_cast<double>(generated_);
    if (slot_pairs_.empty()) {
        row.avg_latency_ms = std::numeric_limits<double>::quiet_NaN();
    } else {
        double sum = 0.0;
        for (const auto& [key, v] : slot_pairs_) {
            sum += v;
            if (slot >= window_start_) {
                Running& r = pairs_[key];
                r.sum += v;
                ++r.slots;
            }
        }
        row.avg_latency_ms = sum / static_cast<double>(slot_pairs_.size());
    }
    rows_.push_back(row);

    for (std::uint32_t ue : touched_ues_) {
        UeAcc& acc = ues_[ue];
        acc.slot_max.sum += acc.current_max;
        ++acc.slot_max.slots;
        acc.current_max = -1.0;
    }
    touched_ues_.clear();
    slot_pairs_.clear();
    slot_bits_ = 0;
}

std::map<PairKey, double> Collector::pair_average() const {
    std::map<PairKey, double> out;
    for (const auto& [key, r] : pairs_) {
        if (r.slots > 0) out.emplace(key, r.sum / static_cast<double>(r.slots));
    }
    return out;
}

RunSummary Collector::summarize() const {
    RunSummary s;
    const std::uint64_t lo = std::max(first_slot_, window_start_);
    const std::uint64_t window_slots = any_slot_ && last_slot_ >= lo ? last_slot_ - lo + 1 : 0;
    const double window_ms = static_cast<double>(window_slots) * slot_ms_;
    auto mbps = [&](std::uint64_t bits) { return window_ms > 0.0 ? static_cast<double>(bits) / (window_ms * 1e3) : 0.0; };

    std::vector<double> lat, thr, drop;
    double pkt_sum = 0.0;
    std::uint64_t pkt_count = 0;
    for (std::size_t u = 0; u < ues_.size(); ++u) {
        const UeAcc& a = ues_[u];
        UeSummary ue;
        ue.ue = static_cast<std::uint32_t>(u);
        ue.attach = attach_[u];
        ue.generated = a.generated;
        ue.delivered = a.delivered;
        ue.dropped = a.dropped;
        ue.drop_rate = a.generated == 0 ? 0.0 : static_cast<double>(a.dropped) / static_cast<double>(a.generated);
        ue.throughput_mbps = mbps(a.window_bits);
        if (a.slot_max.slots > 0) {
            ue.latency_ms = a.slot_max.sum / static_cast<double>(a.slot_max.slots);
            lat.push_back(*ue.latency_ms);
        }
        if (a.pkt_count > 0) ue.pkt_latency_ms = a.pkt_latency_sum / static_cast<double>(a.pkt_count);
        pkt_sum += a.pkt_latency_sum;
        pkt_count += a.pkt_count;
        thr.push_back(ue.throughput_mbps);
        drop.push_back(ue.drop_rate);
        s.per_ue.push_back(ue);
    }
    s.mean_latency_ms = system_average(pair_average());
    if (pkt_count > 0) s.avg_pkt_latency_ms = pkt_sum / static_cast<double>(pkt_count);
    s.throughput_mbps = mbps(window_bits_);
    s.generated = generated_;
    s.delivered = delivered_;
    s.dropped = dropped_;
    s.delivered_bits = delivered_bits_total_;
    s.drop_rate = generated_ == 0 ? 0.0 : static_cast<double>(dropped_) / static_cast<double>(generated_);
    if (!lat.empty()) s.latency = candlestick(lat);
    if (!thr.empty()) s.throughput = candlestick(thr);
    if (!drop.empty()) s.droprate = candlestick(drop);
    s.rows = rows_;
    return s;
}

namespace {

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json candle_json(const std::optional<Candlestick>& c) {
    if (!c) return nullptr;
    return {{"min", c->min}, {"p10", c->p10}, {"mean", c->mean}, {"p90", c->p90}, {"max", c->max}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing: {}", path.string(), std::strerror(errno)));
    out << content;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

}  // namespace

std::string metrics_csv(const RunSummary& s) {
    std::string out = kMetricsCsvHeader;
    out += '\n';
    for (const SlotRow& r : s.rows) {
        fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{},{},{}\n", r.slot, s.algo, s.n_nodes, s.n_donors,
                       s.seed, r.avg_latency_ms, r.throughput_mbps, r.drop_rate, r.conflicts, r.overrides);
    }
    return out;
}

nlohmann::ordered_json summary_json(const RunSummary& s) {
    nlohmann::ordered_json j;
    j["config"] = s.config;
    j["seed"] = s.seed;
    j["algo"] = s.algo;
    j["n_nodes"] = s.n_nodes;
    j["n_donors"] = s.n_donors;
    auto& ues = j["per_ue"] = nlohmann::ordered_json::array();
    for (const UeSummary& u : s.per_ue) {
        ues.push_back({{"ue", u.ue},
                       {"attach", index(u.attach)},
                       {"latency_ms", optional_number(u.latency_ms)},
                       {"avg_pkt_latency_ms", optional_number(u.pkt_latency_ms)},
                       {"throughput_mbps", u.throughput_mbps},
                       {"drop_rate", u.drop_rate},
                       {"generated", u.generated},
                       {"delivered", u.delivered},
                       {"dropped", u.dropped}});
    }
    j["system"] = {{"latency_candlestick", candle_json(s.latency)},
                   {"throughput_candlestick", candle_json(s.throughput)},
                   {"droprate_candlestick", candle_json(s.droprate)},
                   {"mean_latency_ms", optional_number(s.mean_latency_ms)},
                   {"avg_pkt_latency_ms", optional_number(s.avg_pkt_latency_ms)},
                   {"throughput_mbps", s.throughput_mbps},
                   {"drop_rate", s.drop_rate},
                   {"generated", s.generated},
                   {"delivered", s.delivered},
                   {"dropped", s.dropped},
                   {"delivered_bits", s.delivered_bits},
                   {"invariant_violations", s.invariant_violations}};
    return j;
}

void write_outputs(const RunSummary& summary, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
    write_file(out_dir / "metrics.csv", metrics_csv(summary));
    write_file(out_dir / "summary.json", summary_json(summary).dump(2) + "\n");
}

nlohmann::ordered_json merge(std::span<const RunSummary> runs) {
    nlohmann::ordered_json j;
    if (runs.empty()) return j;
    std::vector<double> lat, thr, drop, means, spreads;
    auto& seeds = j["seeds"] = nlohmann::ordered_json::array();
    for (const RunSummary& r : runs) {
        seeds.push_back(r.seed);
        for (const UeSummary& u : r.per_ue) {
            if (u.latency_ms) lat.push_back(*u.latency_ms);
            thr.push_back(u.throughput_mbps);
            drop.push_back(u.drop_rate);
        }
        if (r.mean_latency_ms) means.push_back(*r.mean_latency_ms);
        if (r.latency) spreads.push_back(r.latency->spread());
    }
    auto candle = [](const std::vector<double>& v) { return v.empty() ? std::optional<Candlestick>{} : candlestick(v); };
    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? std::optional<double>{} : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    j["algo"] = runs.front().algo;
    j["config"] = runs.front().config;
    j["system"] = {{"latency_candlestick", candle_json(candle(lat))},
                   {"throughput_candlestick", candle_json(candle(thr))},
                   {"droprate_candlestick", candle_json(candle(drop))},
                   {"mean_latency_ms", optional_number(mean(means))},
                   {"mean_latency_spread_ms", optional_number(mean(spreads))}};
    return j;
}

}  // namespace safehaul
