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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fdx
{
    inline constexpr double kEarthRadiusKm = 6371.0;
    inline constexpr double kEarthMu = 398600.4418;             // km^3/s^2
    inline constexpr double kEarthRotationRate = 7.2921159e-5; // rad/s

    using Vec3 = std::array<double, 3>;

    struct GroundSite
    {
        double latitude_deg = 34.0722;
        double longitude_deg = -118.4441;
        double altitude_m = 0.0;

        void validate() const;
    };

    /// One Walker-delta shell (i : T/P/F with T = plane_count * sats_per_plane).
    struct ShellSpec
    {
        double altitude_km = 0.0;
        double inclination_deg = 0.0;
        int plane_count = 0;
        int sats_per_plane = 0;
        int phasing = 0;

        void validate() const;
        int total() const { return plane_count * sats_per_plane; }
    };

    /// Three shells at 590/610/630 km totalling 3236 satellites.
    std::vector<ShellSpec> default_shells();

    /// Circular-orbit element set. Angles in degrees at scenario time t = 0.
    struct OrbitalElements
    {
        int sat_id = 0;
        int shell = 0;
        int plane = 0;
        int slot = 0;
        double altitude_km = 0.0;
        double inclination_deg = 0.0;
        double raan_deg = 0.0;
        double arg_latitude_deg = 0.0;

        double radius_km() const { return kEarthRadiusKm + altitude_km; }
        double mean_motion() const; // rad/s
        double period_s() const;
    };

    struct SatState
    {
        int sat_id = 0;
        Vec3 position_km{};  // Earth-centered Earth-fixed
        double epoch_s = 0.0;
    };

    struct TimeHorizon
    {
        double t_start = 0.0;
        double t_end = 120.0;
        double step = 1.0;

        void validate() const;
        std::size_t sample_count() const;
        double time_at(std::size_t i) const { return t_start + static_cast<double>(i) * step; }
    };

    struct LookAngles
    {
        double azimuth_deg = 0.0;   // [-180, 180), clockwise from north
        double elevation_deg = 0.0; // above the local horizon
        double range_km = 0.0;

        double el_from_broadside() const { return 90.0 - elevation_deg; }
    };

    /// Uplink/downlink direction tuple at time t, referenced to a zenith-facing array.
    /// Elevations are measured from broadside (0 = zenith).
    struct TrajectorySample
    {
        double t = 0.0;
        double ul_az = 0.0;
        double ul_el = 0.0;
        double dl_az = 0.0;
        double dl_el = 0.0;
        double ul_range_km = 0.0;
        double dl_range_km = 0.0;
    };

    using Trajectory = std::vector<TrajectorySample>;

    struct PairSearch
    {
        double mask_el_deg = 35.0;
        double min_duration_s = 120.0;
        double step_s = 1.0;
        double scan_step_s = 60.0;
        double scan_limit_s = 86400.0;
    };

    struct SatellitePair
    {
        int ul_sat = -1;
        int dl_sat = -1;
        TimeHorizon horizon;
        Trajectory trajectory;
        std::size_t qualifying_count = 0; // satellites eligible at the chosen epoch
    };

    std::vector<OrbitalElements> generate_constellation(std::span<const ShellSpec> shells, std::uint64_t seed);

    Vec3 propagate_inertial(const OrbitalElements &el, double t);
    SatState propagate(const OrbitalElements &el, double t);

    Vec3 site_ecef(const GroundSite &site);
    LookAngles look_angles(const GroundSite &site, const SatState &sat);

    /// Picks two distinct satellites that stay above the mask for the whole window.
    /// The scan starts at a seeded epoch (a whole multiple of scan_step_s within one day)
    /// and advances by scan_step_s until scan_limit_s of scenario time has been covered.
    /// Throws NoVisiblePairError when nothing qualifies.
    SatellitePair select_pair(std::span<const OrbitalElements> constellation, const GroundSite &site,
                              const PairSearch &search, std::uint64_t seed);

    /// Columns t,ul_az,ul_el,dl_az,dl_el,ul_range_km,dl_range_km; t relative to the first sample.
    void write_trajectory_csv(const Trajectory &traj, const std::filesystem::path &path);

    void write_constellation_csv(std::span<const OrbitalElements> constellation, const std::filesystem::path &path);
} // namespace fdx
