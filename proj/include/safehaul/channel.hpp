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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <unordered_map>
#include <vector>

#include "safehaul/rng.hpp"
#include "safehaul/topology.hpp"

namespace safehaul {

/// Uniform planar array. Spacing is in wavelengths.
struct AntennaArray {
    int n_h = 8;
    int n_v = 8;
    double spacing = 0.5;
    double gain_db = 33.0;

    std::size_t elements() const noexcept { return static_cast<std::size_t>(n_h) * static_cast<std::size_t>(n_v); }
};

/// Azimuth is measured from the panel broadside, elevation from the zenith
/// (pi/2 is the horizon).
struct Direction {
    double azimuth = 0.0;
    double elevation = std::numbers::pi / 2;
};

using ComplexVector = std::vector<std::complex<double>>;

/// Array response; element (i_h, i_v) is stored at i_v * n_h + i_h.
ComplexVector steering_vector(const AntennaArray& array, Direction dir);

/// |w^H a(dir)|^2 for unit-norm weights; bounded by the element count.
double beamforming_gain(std::span<const std::complex<double>> weights, const AntennaArray& array, Direction dir);

struct BeamVector {
    ComplexVector weights;
    Direction direction;
};

enum class CodebookLevel : std::uint8_t { wide, narrow };

struct AngularSector {
    double az_min = -std::numbers::pi / 3;
    double az_max = std::numbers::pi / 3;
    double el_min = std::numbers::pi / 2;
    double el_max = std::numbers::pi / 2;
};

/// Normalised steering vectors on a regular azimuth x elevation grid of cell
/// centres. Beam (ia, ie) lives at index ie * n_az + ia.
struct Codebook {
    CodebookLevel level = CodebookLevel::narrow;
    AngularSector sector;
    int n_az = 1;
    int n_el = 1;
    std::vector<BeamVector> beams;

    std::size_t size() const noexcept { return beams.size(); }
    /// True if `dir` falls inside the grid cell of beam `k` (closed on the low side).
    bool cell_contains(std::size_t k, Direction dir) const;
};

Codebook build_codebook(const AntennaArray& array, const AngularSector& sector, int n_az, int n_el,
                        CodebookLevel level = CodebookLevel::narrow);

struct BeamCodebooks {
    Codebook wide;
    Codebook narrow;
};

/// True departure / arrival directions of a link in the local frames of the
/// transmitting and receiving panels.
struct LinkGeometry {
    Direction at_tx;
    Direction at_rx;
};

struct BeamSearchResult {
    BeamVector tx;
    BeamVector rx;
    double gain = 0.0;  // linear, tx gain times rx gain
};

/// Sector-level sweep over wide x wide pairs, then refinement over the narrow
/// beams lying inside the winning wide cells. The winning wide pair stays a
/// candidate during refinement, so the result never loses to the sweep.
BeamSearchResult hierarchical_beam_search(const AntennaArray& tx, const AntennaArray& rx, const LinkGeometry& geometry,
                                          const BeamCodebooks& tx_books, const BeamCodebooks& rx_books);

/// Stage one of the hierarchical search on its own.
BeamSearchResult wide_beam_search(const AntennaArray& tx, const AntennaArray& rx, const LinkGeometry& geometry,
                                  const Codebook& tx_wide, const Codebook& rx_wide);

// UMi street canyon large-scale model.
double pathloss_db(double distance_3d_m, double carrier_ghz, bool los);
double shadowing_sigma_db(bool los);
double los_probability_umi(double distance_2d_m);

struct SinrSample {
    double signal_mw = 0.0;
    double interference_mw = 0.0;
    double noise_mw = 0.0;
    double value = 0.0;
};

SinrSample sinr(double signal_mw, std::span<const double> interferers_mw, double noise_mw);

/// Transmissible bits in one slot: floor(B * T * log2(1 + sinr) * fraction).
std::uint64_t link_rate_bits(double sinr_linear, double bandwidth_hz, double slot_duration_s, double fraction = 1.0);

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);
double thermal_noise_mw(double bandwidth_hz, double noise_figure_db);

struct BlockageConfig {
    double p_block = 0.01;    // available -> blocked, per slot
    double p_recover = 0.2;   // blocked -> available, per slot
};

struct BlockageState {
    std::uint64_t slot = 0;
    std::vector<bool> available;  // per candidate edge
    std::vector<bool> los;        // per candidate edge, frozen for the run
};

/// Independent two-state Markov chain per candidate edge. All edges start
/// available at slot 0.
class BlockageProcess {
public:
    BlockageProcess(std::size_t n_edges, BlockageConfig config, std::vector<bool> los);

    const BlockageState& state() const noexcept { return state_; }
    /// Advance every chain by one step and stamp the state with `slot`.
    const BlockageState& sample(std::uint64_t slot, Rng& rng);

private:
    BlockageConfig config_;
    BlockageState state_;
};

struct ChannelConfig {
    double carrier_ghz = 28.0;
    double bandwidth_hz = 400e6;
    double noise_figure_db = 10.0;
    double tx_power_dbm = 30.0;
    bool shadowing = true;
    BlockageConfig blockage;
    AntennaArray array;
    int wide_az = 4;
    int wide_el = 2;
    int narrow_az = 16;
    int narrow_el = 4;
    double sector_az_deg = 120.0;
    double sector_el_deg = 30.0;
    double backhaul_symbol_fraction = 1.0;
};

/// Per-run physical layer: frozen LOS states and shadowing per node pair,
/// beam pairs per candidate edge (found once by hierarchical search, since
/// nodes are static), and SINR of concurrently active links.
///
/// Every node carries three panels with broadsides 120 degrees apart; a link
/// uses the panel facing its peer. Directions behind a panel get zero gain.
class ChannelModel {
public:
    ChannelModel(const Topology& topology, const ChannelConfig& config, std::uint64_t seed);

    const ChannelConfig& config() const noexcept { return config_; }
    const BeamSearchResult& link_beams(std::size_t edge) const { return beams_.at(edge); }
    const std::vector<bool>& edge_los() const noexcept { return edge_los_; }

    double pathloss_with_shadowing_db(NodeId a, NodeId b) const;
    double signal_mw(std::size_t edge) const { return signal_mw_.at(edge); }
    double noise_mw() const noexcept { return noise_mw_; }
    /// Power the transmitter of `interferer` leaks into the receiver of `victim`.
    double interference_mw(std::size_t interferer, std::size_t victim);

    /// SINR of every link in `active` (edge indices), all transmitting at once.
    std::vector<SinrSample> evaluate(std::span<const std::size_t> active);
    double snr(std::size_t edge) const { return signal_mw_.at(edge) / noise_mw_; }
    std::uint64_t bits_per_slot(double sinr_linear, double slot_duration_s) const;

private:
    struct PanelView {
        int panel = 0;
        Direction dir;
        bool front = true;
    };
    PanelView view(NodeId from, NodeId to, int forced_panel = -1) const;
    double directional_gain(const BeamVector& beam, const PanelView& v) const;

    const Topology* topology_;
    ChannelConfig config_;
    BeamCodebooks books_;
    double noise_mw_;
    std::vector<bool> pair_los_;       // n x n
    std::vector<double> pair_loss_db_; // n x n, pathloss + shadowing
    std::vector<bool> edge_los_;
    std::vector<BeamSearchResult> beams_;
    std::vector<int> tx_panel_;
    std::vector<int> rx_panel_;
    std::vector<double> signal_mw_;
    std::unordered_map<std::uint64_t, double> interference_cache_;
};

}  // namespace safehaul
