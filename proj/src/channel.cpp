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

#include "safehaul/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace safehaul {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2 * kPi);
    if (a < 0) a += 2 * kPi;
    return a - kPi;
}

double deg(double d) { return d * kPi / 180.0; }

}  // namespace

ComplexVector steering_vector(const AntennaArray& array, Direction dir) {
    ComplexVector a(array.elements());
    const double k = 2.0 * kPi * array.spacing;
    const double h_step = std::sin(dir.azimuth) * std::sin(dir.elevation);
    const double v_step = std::cos(dir.elevation);
    for (int iv = 0; iv < array.n_v; ++iv) {
        for (int ih = 0; ih < array.n_h; ++ih) {
            const double phase = k * (ih * h_step + iv * v_step);
            a[static_cast<std::size_t>(iv * array.n_h + ih)] = std::polar(1.0, phase);
        }
    }
    return a;
}

double beamforming_gain(std::span<const std::complex<double>> weights, const AntennaArray& array, Direction dir) {
    const ComplexVector a = steering_vector(array, dir);
    if (weights.size() != a.size()) throw std::invalid_argument("beam weights do not match the array size");
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(weights[i]) * a[i];
    return std::norm(acc);
}

bool Codebook::cell_contains(std::size_t k, Direction dir) const {
    const int ia = static_cast<int>(k % static_cast<std::size_t>(n_az));
    const int ie = static_cast<int>(k / static_cast<std::size_t>(n_az));
    auto inside = [](double x, double lo, double hi, int i, int n) {
        if (hi <= lo) return true;  // degenerate span: a single row of cells
        const double step = (hi - lo) / n;
        const double a = lo + i * step;
        const double b = lo + (i + 1) * step;
        return x >= a && (x < b || (i == n - 1 && x <= b));
    };
    return inside(dir.azimuth, sector.az_min, sector.az_max, ia, n_az) &&
           inside(dir.elevation, sector.el_min, sector.el_max, ie, n_el);
}

Codebook build_codebook(const AntennaArray& array, const AngularSector& sector, int n_az, int n_el,
                        CodebookLevel level) {
    if (n_az < 1 || n_el < 1) throw std::invalid_argument("codebook needs at least one beam");
    Codebook book;
    book.level = level;
    book.sector = sector;
    book.n_az = n_az;
    book.n_el = n_el;
    const double scale = 1.0 / std::sqrt(static_cast<double>(array.elements()));
    const double az_step = (sector.az_max - sector.az_min) / n_az;
    const double el_step = (sector.el_max - sector.el_min) / n_el;
    for (int ie = 0; ie < n_el; ++ie) {
        for (int ia = 0; ia < n_az; ++ia) {
            Direction dir{sector.az_min + (ia + 0.5) * az_step, sector.el_min + (ie + 0.5) * el_step};
            ComplexVector w = steering_vector(array, dir);
            for (auto& x : w) x *= scale;
            book.beams.push_back({std::move(w), dir});
        }
    }
    return book;
}

namespace {

std::vector<double> gains_toward(const Codebook& book, const AntennaArray& array, Direction dir) {
    std::vector<double> g;
    g.reserve(book.size());
    for (const auto& b : book.beams) g.push_back(beamforming_gain(b.weights, array, dir));
    return g;
}

}  // namespace

BeamSearchResult wide_beam_search(const AntennaArray& tx, const AntennaArray& rx, const LinkGeometry& geometry,
                                  const Codebook& tx_wide, const Codebook& rx_wide) {
    const auto gt = gains_toward(tx_wide, tx, geometry.at_tx);
    const auto gr = gains_toward(rx_wide, rx, geometry.at_rx);
    std::size_t bi = 0, bj = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        for (std::size_t j = 0; j < gr.size(); ++j) {
            if (gt[i] * gr[j] > best) {
                best = gt[i] * gr[j];
                bi = i;
                bj = j;
            }
        }
    }
    return {tx_wide.beams[bi], rx_wide.beams[bj], best};
}

BeamSearchResult hierarchical_beam_search(const AntennaArray& tx, const AntennaArray& rx, const LinkGeometry& geometry,
                                          const BeamCodebooks& tx_books, const BeamCodebooks& rx_books) {
    BeamSearchResult sweep = wide_beam_search(tx, rx, geometry, tx_books.wide, rx_books.wide);

    auto refine_side = [](const Codebook& wide, const Codebook& narrow, const BeamVector& winner,
                          const AntennaArray& array, Direction dir) {
        // The winner is identified by its grid direction.
        std::size_t w = 0;
        for (std::size_t k = 0; k < wide.size(); ++k) {
            if (wide.beams[k].direction.azimuth == winner.direction.azimuth &&
                wide.beams[k].direction.elevation == winner.direction.elevation) {
                w = k;
                break;
            }
        }
        std::vector<const BeamVector*> candidates{&winner};
        for (const auto& b : narrow.beams) {
            if (wide.cell_contains(w, b.direction)) candidates.push_back(&b);
        }
        std::vector<double> gains;
        gains.reserve(candidates.size());
        for (const auto* b : candidates) gains.push_back(beamforming_gain(b->weights, array, dir));
        return std::pair{candidates, gains};
    };

    const auto [tx_cand, tx_gain] = refine_side(tx_books.wide, tx_books.narrow, sweep.tx, tx, geometry.at_tx);
    const auto [rx_cand, rx_gain] = refine_side(rx_books.wide, rx_books.narrow, sweep.rx, rx, geometry.at_rx);

    std::size_t bi = 0, bj = 0;
    double best = tx_gain[0] * rx_gain[0];
    for (std::size_t i = 0; i < tx_cand.size(); ++i) {
        for (std::size_t j = 0; j < rx_cand.size(); ++j) {
            if (tx_gain[i] * rx_gain[j] > best) {
                best = tx_gain[i] * rx_gain[j];
                bi = i;
                bj = j;
            }
        }
    }
    return {*tx_cand[bi], *rx_cand[bj], best};
}

double pathloss_db(double distance_3d_m, double carrier_ghz, bool los) {
    if (!(distance_3d_m > 0.0)) throw std::invalid_argument("pathloss requires a positive distance");
    const double pl_los = 32.4 + 21.0 * std::log10(distance_3d_m) + 20.0 * std::log10(carrier_ghz);
    if (los) return pl_los;
    const double pl_nlos = 35.3 * std::log10(distance_3d_m) + 22.4 + 21.3 * std::log10(carrier_ghz);
    return std::max(pl_los, pl_nlos);
}

double shadowing_sigma_db(bool los) { return los ? 4.0 : 7.82; }

double los_probability_umi(double distance_2d_m) {
    if (distance_2d_m <= 18.0) return 1.0;
    return 18.0 / distance_2d_m + std::exp(-distance_2d_m / 36.0) * (1.0 - 18.0 / distance_2d_m);
}

SinrSample sinr(double signal_mw, std::span<const double> interferers_mw, double noise_mw) {
    if (signal_mw < 0.0 || !(noise_mw > 0.0)) throw std::invalid_argument("sinr requires signal >= 0 and noise > 0");
    double interference = 0.0;
    for (double p : interferers_mw) {
        if (p < 0.0) throw std::invalid_argument("interferer power must be non-negative");
        interference += p;
    }
    return {signal_mw, interference, noise_mw, signal_mw / (interference + noise_mw)};
}

std::uint64_t link_rate_bits(double sinr_linear, double bandwidth_hz, double slot_duration_s, double fraction) {
    if (sinr_linear < 0.0) throw std::invalid_argument("sinr must be non-negative");
    const double bits = bandwidth_hz * slot_duration_s * std::log2(1.0 + sinr_linear) * fraction;
    // Absorb representation error of products such as 400e6 * 1.25e-4.
    return static_cast<std::uint64_t>(std::floor(bits * (1.0 + 1e-12)));
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double thermal_noise_mw(double bandwidth_hz, double noise_figure_db) {
    return dbm_to_mw(-174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

BlockageProcess::BlockageProcess(std::size_t n_edges, BlockageConfig config, std::vector<bool> los)
    : config_(config) {
    if (los.size() != n_edges) throw std::invalid_argument("LOS flags must cover every candidate edge");
    state_.available.assign(n_edges, true);
    state_.los = std::move(los);
}

const BlockageState& BlockageProcess::sample(std::uint64_t slot, Rng& rng) {
    for (std::size_t k = 0; k < state_.available.size(); ++k) {
        const double u = uniform01(rng);
        if (state_.available[k]) {
            if (u < config_.p_block) state_.available[k] = false;
        } else {
            if (u < config_.p_recover) state_.available[k] = true;
        }
    }
    state_.slot = slot;
    return state_;
}

ChannelModel::ChannelModel(const Topology& topology, const ChannelConfig& config, std::uint64_t seed)
    : topology_(&topology), config_(config), noise_mw_(thermal_noise_mw(config.bandwidth_hz, config.noise_figure_db)) {
    const AngularSector sector{-deg(config.sector_az_deg) / 2, deg(config.sector_az_deg) / 2,
                               kPi / 2 - deg(config.sector_el_deg) / 2, kPi / 2 + deg(config.sector_el_deg) / 2};
    books_.wide = build_codebook(config.array, sector, config.wide_az, config.wide_el, CodebookLevel::wide);
    books_.narrow = build_codebook(config.array, sector, config.narrow_az, config.narrow_el, CodebookLevel::narrow);

    const std::size_t n = topology.size();
    pair_los_.assign(n * n, false);
    pair_loss_db_.assign(n * n, 0.0);
    Rng rng = make_rng(seed, Stream::channel);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double d2 = topology.horizontal_distance_m(node_id(a), node_id(b));
            const double d3 = topology.distance_m(node_id(a), node_id(b));
            const bool los = uniform01(rng) < los_probability_umi(d2);
            const double z = normal(rng);
            const double shadow = config.shadowing ? z * shadowing_sigma_db(los) : 0.0;
            const double loss = pathloss_db(std::max(d3, 1.0), config.carrier_ghz, los) + shadow;
            pair_los_[a * n + b] = pair_los_[b * n + a] = los;
            pair_loss_db_[a * n + b] = pair_loss_db_[b * n + a] = loss;
        }
    }

    const auto edges = topology.candidate_edges();
    edge_los_.resize(edges.size());
    beams_.reserve(edges.size());
    tx_panel_.resize(edges.size());
    rx_panel_.resize(edges.size());
    signal_mw_.resize(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const Edge e = edges[k];
        edge_los_[k] = pair_los_[index(e.from) * n + index(e.to)];
        const PanelView vt = view(e.from, e.to);
        const PanelView vr = view(e.to, e.from);
        tx_panel_[k] = vt.panel;
        rx_panel_[k] = vr.panel;
        beams_.push_back(hierarchical_beam_search(config.array, config.array, {vt.dir, vr.dir}, books_, books_));
        signal_mw_[k] = dbm_to_mw(config.tx_power_dbm + config.array.gain_db + 10.0 * std::log10(beams_[k].gain) -
                                  pathloss_with_shadowing_db(e.from, e.to));
    }
}

double ChannelModel::pathloss_with_shadowing_db(NodeId a, NodeId b) const {
    return pair_loss_db_[index(a) * topology_->size() + index(b)];
}

ChannelModel::PanelView ChannelModel::view(NodeId from, NodeId to, int forced_panel) const {
    const auto& pf = topology_->node(from);
    const auto& pt = topology_->node(to);
    const double phi = std::atan2(pt.position.y_m - pf.position.y_m, pt.position.x_m - pf.position.x_m);
    const double zenith = std::atan2(topology_->horizontal_distance_m(from, to), pt.height_m - pf.height_m);
    PanelView v;
    if (forced_panel >= 0) {
        v.panel = forced_panel;
    } else {
        double best = 1e9;
        for (int p = 0; p < 3; ++p) {
            const double local = std::abs(wrap_angle(phi - p * 2.0 * kPi / 3.0));
            if (local < best) {
                best = local;
                v.panel = p;
            }
        }
    }
    v.dir = {wrap_angle(phi - v.panel * 2.0 * kPi / 3.0), zenith};
    v.front = std::abs(v.dir.azimuth) <= kPi / 2;
    return v;
}

double ChannelModel::directional_gain(const BeamVector& beam, const PanelView& v) const {
    if (!v.front) return 0.0;
    return beamforming_gain(beam.weights, config_.array, v.dir);
}

double ChannelModel::interference_mw(std::size_t interferer, std::size_t victim) {
    const auto edges = topology_->candidate_edges();
    const std::uint64_t key = static_cast<std::uint64_t>(interferer) * edges.size() + victim;
    if (auto it = interference_cache_.find(key); it != interference_cache_.end()) return it->second;

    const NodeId src = edges[interferer].from;
    const NodeId dst = edges[victim].to;
    double power = 0.0;
    if (src != dst) {
        const double g_tx = directional_gain(beams_[interferer].tx, view(src, dst, tx_panel_[interferer]));
        const double g_rx = directional_gain(beams_[victim].rx, view(dst, src, rx_panel_[victim]));
        if (g_tx > 0.0 && g_rx > 0.0) {
            power = dbm_to_mw(config_.tx_power_dbm + config_.array.gain_db + 10.0 * std::log10(g_tx * g_rx) -
                              pathloss_with_shadowing_db(src, dst));
        }
    }
    interference_cache_.emplace(key, power);
    return power;
}

std::vector<SinrSample> ChannelModel::evaluate(std::span<const std::size_t> active) {
    std::vector<SinrSample> out;
    out.reserve(active.size());
    std::vector<double> interferers;
    for (std::size_t i = 0; i < active.size(); ++i) {
        interferers.clear();
        for (std::size_t j = 0; j < active.size(); ++j) {
            if (j != i) interferers.push_back(interference_mw(active[j], active[i]));
        }
        out.push_back(sinr(signal_mw_[active[i]], interferers, noise_mw_));
    }
    return out;
}

std::uint64_t ChannelModel::bits_per_slot(double sinr_linear, double slot_duration_s) const {
    return link_rate_bits(sinr_linear, config_.bandwidth_hz, slot_duration_s, config_.backhaul_symbol_fraction);
}

}  // namespace safehaul
