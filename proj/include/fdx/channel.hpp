// SPDX-License-Identifier: Apache-2.0
//
// fdxtrack: full-duplex beam tracking for LEO satellite ground terminals
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

#include "fdx/common.hpp"
#include "fdx/phased_array.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fdx
{
    /// Scalar link parameters. Powers in dBm, gains in dBi.
    /// Element gains fold the terminal's per-element gain into the channel vectors.
    struct LinkBudget
    {
        double sat_tx_power_dbm = 15.5; // downlink satellite transmit power
        double sat_tx_gain_dbi = 30.5;  // downlink satellite antenna gain toward the user
        double sat_rx_gain_dbi = 30.5;  // uplink satellite antenna gain toward the user
        double sat_noise_dbm = -93.1;   // uplink satellite receiver noise
        double ut_tx_power_dbm = 36.0;
        double ut_noise_dbm = -95.64;
        double carrier_hz = 20e9;
        double ut_tx_elem_gain_dbi = 0.0;
        double ut_rx_elem_gain_dbi = 0.0;

        void validate() const;
        double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
    };

    /// Element gain such that a matched beam on `geom` peaks at `peak_gain_dbi`.
    double element_gain_for_peak(const UpaGeometry &geom, double peak_gain_dbi);

    /// Default budget with terminal gains calibrated to 29 dBi transmit and 39.7 dBi receive peaks.
    LinkBudget default_link_budget(const UpaGeometry &tx, const UpaGeometry &rx);

    enum class Link
    {
        uplink,
        downlink
    };

    struct ChannelVector
    {
        CVector coeffs;
        Link link = Link::uplink;
    };

    /// Free-space gain (lambda / (4 pi d))^2, linear.
    double path_gain(double range_km, double carrier_hz);

    /// sqrt(path_gain * elem_gain) * exp(j psi) * a(dir), psi = -2 pi range / lambda (mod 2 pi).
    ChannelVector los_channel(const UpaGeometry &geom, SteeringDirection dir, double range_km, const LinkBudget &budget,
                              Link link);

    double snr_uplink_db(const BeamWeights &f, const ChannelVector &h_ul, const LinkBudget &budget);
    double snr_downlink_db(const BeamWeights &w, const ChannelVector &h_dl, const LinkBudget &budget);

    /// Static N_r x N_t self-interference channel, row-major.
    struct SiChannel
    {
        std::size_t n_r = 0;
        std::size_t n_t = 0;
        CVector matrix;
        std::string model_id;
        std::uint64_t seed = 0;
        double entry_variance = 0.0;

        cdouble at(std::size_t r, std::size_t c) const { return matrix[r * n_t + c]; }
    };

    /// Factory signature for pluggable SI models: (n_r, n_t, entry_variance, seed) -> row-major matrix.
    using SiModelFactory = std::function<CVector(std::size_t, std::size_t, double, std::uint64_t)>;

    /// Registers or replaces a model. "iid-rayleigh" and "zero" are built in.
    void register_si_model(const std::string &model_id, SiModelFactory factory);
    std::vector<std::string> si_model_ids();

    /// Throws ConfigError for an unknown model id.
    SiChannel build_si_channel(std::string_view model_id, std::size_t n_r, std::size_t n_t, double entry_variance,
                               std::uint64_t seed);

    /// H f.
    CVector si_apply(const SiChannel &si, const BeamWeights &f);

    /// w^H H f.
    cdouble si_coupling(const BeamWeights &w, const SiChannel &si, const BeamWeights &f);

    double inr_db(const BeamWeights &w, const SiChannel &si, const BeamWeights &f, const LinkBudget &budget);

    /// (uplink direction, downlink direction).
    using DirectionPair = std::pair<SteeringDirection, SteeringDirection>;

    /// Directions drawn uniformly over the spherical cap el_from_broadside <= max_el_deg.
    std::vector<DirectionPair> sample_direction_pairs(std::size_t count, double max_el_deg, std::uint64_t seed);

    /// Per-entry variance of an iid-rayleigh channel that puts the median INR of
    /// matched-filter pairs over `sample_dirs` at target_median_inr_db. The reference
    /// unit-variance channel is drawn from `seed`.
    double calibrate_si(const LinkBudget &budget, const UpaGeometry &geom_tx, const UpaGeometry &geom_rx,
                        std::span<const DirectionPair> sample_dirs, double target_median_inr_db, std::uint64_t seed,
                        QuantizerSpec quant = {});

    double sinr_downlink_db(double snr_dl_db, double inr_db);
    double sum_se(double snr_ul_db, double sinr_dl_db);

    struct Metrics
    {
        double snr_ul_db = kDbFloor;
        double snr_dl_db = kDbFloor;
        double inr_db = kDbFloor;
        double sinr_dl_db = kDbFloor;
        double sum_se_bps_hz = 0.0;
    };

    Metrics evaluate_metrics(double snr_ul_db, double snr_dl_db, double inr_db);

    double median(std::vector<double> values);
} // namespace fdx
